//! Monte Carlo validation of the bound.
//!
//! Simulates the on/off target with its detections, runs a Bernoulli
//! particle filter over the same models, scores each scan with the
//! set-valued error convention (`e0` for a false report, `e1` for a missed
//! report, `x - x̂` when both sides report, zero when both stay silent), and
//! averages the squared errors over independent runs. A correct lower bound
//! must sit at or below the resulting mean-square-error curve up to
//! statistical noise, which is what the acceptance suite asserts.
//!
//! Runs are embarrassingly parallel: each owns a counter-mode RNG stream
//! derived from `(seed, run index)`, and aggregation is a fixed-order fold
//! over the collected results, so output is deterministic for a given seed
//! regardless of thread count.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::linalg::{compensated_sum, outer, trace, Matrix, Vector};
use crate::models::{
    sample_measurement, sample_transition, BernoulliParams, GaussianPrior, LinearGaussianModel,
    SensorModel,
};
use crate::scenarios::ScenarioSpec;
use crate::{Error, Result};

/// Default particle count for the Bernoulli particle filter.
pub const DEFAULT_PARTICLES: usize = 2000;

/// Default existence probability above which a state estimate is reported.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Fraction of the particle budget reserved for fresh birth particles
/// whenever the birth mixture weight is nonzero, so a revived target can be
/// re-acquired even after the existence mass was concentrated elsewhere.
const BIRTH_FLOOR: f64 = 0.1;

/// Weighted-particle representation of a single-target existence posterior:
/// `q_exist` is the probability the target is present, and the particles
/// approximate the state density conditional on presence.
#[derive(Clone, Debug)]
pub struct BernoulliPosterior {
    pub q_exist: f64,
    pub particles: Vec<Vector>,
    pub weights: Vec<f64>,
}

impl BernoulliPosterior {
    /// Posterior before any measurement: existence probability `b`, particles
    /// drawn from the prior with uniform weights.
    pub fn from_prior<R: Rng>(
        prior: &GaussianPrior,
        b: f64,
        n_particles: usize,
        rng: &mut R,
    ) -> Self {
        let particles: Vec<Vector> = (0..n_particles).map(|_| prior.sample(rng)).collect();
        let w = 1.0 / n_particles as f64;
        BernoulliPosterior {
            q_exist: b,
            particles,
            weights: vec![w; n_particles],
        }
    }

    /// Effective sample size `1 / Σ wᵢ²` of the weight vector.
    pub fn effective_sample_size(&self) -> f64 {
        let s = compensated_sum(self.weights.iter().map(|w| w * w));
        if s > 0.0 {
            1.0 / s
        } else {
            0.0
        }
    }

    /// Weight simplex deviation `|Σ wᵢ - 1|`, for audits.
    pub fn weight_dev(&self) -> f64 {
        (compensated_sum(self.weights.iter().copied()) - 1.0).abs()
    }
}

/// Propagate every particle one scan through the dynamics, adding process
/// noise unless the model is noiseless. Weights and existence are untouched:
/// this is the first-scan step, where the state moves but no
/// survival-or-birth transition has happened yet.
pub fn propagate_only<R: Rng>(
    post: &BernoulliPosterior,
    model: &LinearGaussianModel,
    rng: &mut R,
) -> BernoulliPosterior {
    let particles = post
        .particles
        .iter()
        .map(|x| propagate_particle(x, model, rng))
        .collect();
    BernoulliPosterior {
        q_exist: post.q_exist,
        particles,
        weights: post.weights.clone(),
    }
}

fn propagate_particle<R: Rng>(x: &Vector, model: &LinearGaussianModel, rng: &mut R) -> Vector {
    let moved = model.f.mul_vec(x).add(&model.offset);
    if model.noiseless {
        return moved;
    }
    let l = crate::linalg::cholesky(&model.q).expect("process noise must be SPD when sampled");
    let mut w = Vector::zeros(moved.len());
    for i in 0..w.len() {
        w[i] = rng.sample(rand_distr::StandardNormal);
    }
    moved.add(&l.mul_vec(&w))
}

/// One prediction step of the Bernoulli filter.
///
/// Existence follows the two-term survival/birth mixture
/// `q' = r q + (1 - r)(1 - q)`. Conditional on presence next scan the state
/// density is a mixture of propagated survivors (weight `r q / q'`) and
/// fresh births from the prior (weight `(1 - r)(1 - q) / q'`). When the
/// birth weight is nonzero, at least [`BIRTH_FLOOR`] of the particle budget
/// is spent on births and the survivor block is filled by systematic
/// resampling of the current weights; when it is zero the particles are
/// simply propagated and keep their weights.
pub fn bpf_predict<R: Rng>(
    post: &BernoulliPosterior,
    params: &BernoulliParams,
    model: &LinearGaussianModel,
    prior: &GaussianPrior,
    rng: &mut R,
) -> BernoulliPosterior {
    let q = post.q_exist;
    let r = params.r;
    let survive_mass = r * q;
    let birth_mass = (1.0 - r) * (1.0 - q);
    let q_next = survive_mass + birth_mass;
    let n = post.particles.len();

    if q_next <= 0.0 || birth_mass <= 0.0 {
        // Never-present chain or pure survival: no birth block. The particle
        // cloud conditional on presence is just the old cloud, propagated.
        let mut out = propagate_only(post, model, rng);
        out.q_exist = q_next;
        return out;
    }

    let birth_frac = birth_mass / q_next;
    let floor = ((n as f64) * BIRTH_FLOOR).ceil() as usize;
    let n_birth = (((n as f64) * birth_frac).round() as usize)
        .max(floor)
        .min(n);
    let n_surv = n - n_birth;

    let mut particles = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    if n_surv > 0 {
        let idx = systematic_indices(&post.weights, n_surv, rng);
        let w_surv = (survive_mass / q_next) / n_surv as f64;
        for i in idx {
            particles.push(propagate_particle(&post.particles[i], model, rng));
            weights.push(w_surv);
        }
    }
    let w_birth = birth_frac / n_birth as f64;
    for _ in 0..n_birth {
        particles.push(prior.sample(rng));
        weights.push(w_birth);
    }
    BernoulliPosterior {
        q_exist: q_next,
        particles,
        weights,
    }
}

/// One measurement update of the Bernoulli filter. `scan` is only used to
/// tag a degenerate-weight failure.
///
/// A detection proves presence in this zero-false-alarm model, so `q_exist`
/// jumps to one and the weights are rescaled by the measurement likelihood
/// (computed in log space, largest exponent subtracted). An empty scan
/// leaves the weights alone — a missed detection is equally likely for every
/// state — and moves only the existence probability: with `a = 1 - q` the
/// absence posterior is `a / ((1 - P_d) + P_d a)`.
pub fn bpf_update(
    post: &BernoulliPosterior,
    z: Option<&Vector>,
    params: &BernoulliParams,
    sensor: &SensorModel,
    scan: usize,
) -> Result<BernoulliPosterior> {
    match z {
        None => {
            let absent = 1.0 - post.q_exist;
            let denom = (1.0 - params.pd) + params.pd * absent;
            let absent_post = if denom > 0.0 { absent / denom } else { 1.0 };
            Ok(BernoulliPosterior {
                q_exist: 1.0 - absent_post,
                particles: post.particles.clone(),
                weights: post.weights.clone(),
            })
        }
        Some(z) => {
            let log_w: Vec<f64> = post
                .particles
                .iter()
                .zip(&post.weights)
                .map(|(x, w)| {
                    if *w > 0.0 {
                        w.ln() + sensor.log_likelihood(z, x)
                    } else {
                        f64::NEG_INFINITY
                    }
                })
                .collect();
            let m = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !m.is_finite() {
                return Err(Error::DegenerateWeights { scan });
            }
            let unnorm: Vec<f64> = log_w.iter().map(|lw| (lw - m).exp()).collect();
            let total = compensated_sum(unnorm.iter().copied());
            if !(total > 0.0) {
                return Err(Error::DegenerateWeights { scan });
            }
            let weights = unnorm.iter().map(|u| u / total).collect();
            Ok(BernoulliPosterior {
                q_exist: 1.0,
                particles: post.particles.clone(),
                weights,
            })
        }
    }
}

/// Systematic resampling: `n_out` index draws from one uniform offset, so a
/// weight `w` receives `⌊n w⌋` or `⌈n w⌉` copies.
fn systematic_indices<R: Rng>(weights: &[f64], n_out: usize, rng: &mut R) -> Vec<usize> {
    let total = compensated_sum(weights.iter().copied());
    let step = total / n_out as f64;
    let mut u = rng.random::<f64>() * step;
    let mut idx = Vec::with_capacity(n_out);
    let mut cum = 0.0;
    let mut i = 0;
    for _ in 0..n_out {
        while i < weights.len() - 1 && cum + weights[i] < u {
            cum += weights[i];
            i += 1;
        }
        idx.push(i);
        u += step;
    }
    idx
}

/// Replace the particle cloud by `n` equally weighted systematic draws.
pub fn systematic_resample<R: Rng>(
    post: &BernoulliPosterior,
    rng: &mut R,
) -> BernoulliPosterior {
    let n = post.particles.len();
    let idx = systematic_indices(&post.weights, n, rng);
    BernoulliPosterior {
        q_exist: post.q_exist,
        particles: idx.iter().map(|&i| post.particles[i]).collect(),
        weights: vec![1.0 / n as f64; n],
    }
}

/// Report a state estimate (the weighted particle mean) when the existence
/// probability reaches `threshold`, otherwise report the empty set. The
/// threshold moves only the report decision, never the conditional mean.
pub fn extract_estimate(post: &BernoulliPosterior, threshold: f64) -> Option<Vector> {
    if post.q_exist < threshold || post.particles.is_empty() {
        return None;
    }
    let dim = post.particles[0].len();
    let mut mean = Vector::zeros(dim);
    for (x, w) in post.particles.iter().zip(&post.weights) {
        mean = mean.add(&x.scale(*w));
    }
    Some(mean)
}

/// Set-valued estimation error: `x - x̂` when both truth and estimate report
/// a state, `e0` for a report with no target, `e1` for a silent estimator
/// with a target present, zero when both are empty.
pub fn set_error(
    truth: Option<&Vector>,
    est: Option<&Vector>,
    params: &BernoulliParams,
) -> Vector {
    match (truth, est) {
        (Some(x), Some(xh)) => x.sub(xh),
        (None, Some(_)) => params.e0,
        (Some(_), None) => params.e1,
        (None, None) => Vector::zeros(params.e0.len()),
    }
}

/// Everything recorded from one simulated run.
#[derive(Clone, Debug)]
pub struct RunResult {
    /// Squared set error `e eᵀ` per scan (rank at most one, PSD).
    pub sq_err: Vec<Matrix>,
    /// Whether the simulated target existed at each scan.
    pub truth_present: Vec<bool>,
    /// Whether the filter reported a state at each scan.
    pub est_present: Vec<bool>,
}

/// Controls for [`empirical_mse`].
#[derive(Clone, Debug)]
pub struct McConfig {
    pub runs: usize,
    pub particles: usize,
    pub threshold: f64,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            runs: 100,
            particles: DEFAULT_PARTICLES,
            threshold: DEFAULT_THRESHOLD,
            seed: 0,
        }
    }
}

/// Aggregated squared set error for one scan.
#[derive(Clone, Debug)]
pub struct McScan {
    pub k: usize,
    /// Mean of `e eᵀ` over runs.
    pub mse: Matrix,
    /// Square roots of the diagonal of `mse`.
    pub rmse: Vec<f64>,
    /// Trace of `mse`.
    pub trace_mean: f64,
    /// Standard error of the per-run trace mean.
    pub trace_se: f64,
    /// Fraction of runs in which the target existed at this scan.
    pub truth_present_rate: f64,
    /// Fraction of runs in which the filter reported a state.
    pub est_present_rate: f64,
}

/// Per-scan empirical mean squared set error over independent runs.
#[derive(Clone, Debug)]
pub struct McSeries {
    pub per_scan: Vec<McScan>,
    /// Runs requested.
    pub runs: usize,
    /// Runs that completed and entered the averages.
    pub effective_runs: usize,
    /// Indices of runs abandoned because every particle weight vanished.
    pub degenerate_runs: Vec<usize>,
}

impl McSeries {
    pub fn scan(&self, k: usize) -> &McScan {
        &self.per_scan[k - 1]
    }
}

/// Simulate one truth trajectory with its measurements, filter it, and score
/// every scan. All randomness comes from `rng`.
pub fn simulate_run<R: Rng>(
    spec: &ScenarioSpec,
    n_particles: usize,
    threshold: f64,
    rng: &mut R,
) -> Result<RunResult> {
    let prior = spec.prior();
    let params = &spec.params;
    let dim = params.e0.len();

    // Truth at "time zero": existence is a plain coin with probability b and
    // the state (if any) sits at the prior. The first scan applies the state
    // dynamics but no survival-or-birth transition, matching the recursion's
    // initialization where presence at scan one has probability exactly b.
    let mut truth: Option<Vector> = if rng.random::<f64>() < params.b {
        Some(prior.sample(rng))
    } else {
        None
    };
    let mut post = BernoulliPosterior::from_prior(&prior, params.b, n_particles, rng);

    let mut sq_err = Vec::with_capacity(spec.scans);
    let mut truth_present = Vec::with_capacity(spec.scans);
    let mut est_present = Vec::with_capacity(spec.scans);

    for k in 1..=spec.scans {
        let bundle = spec.scan_models(k)?;
        let r_eff = if k == 1 { 1.0 } else { params.r };
        truth = sample_transition(rng, truth.as_ref(), &bundle.dynamics, r_eff, &prior);
        let z = sample_measurement(rng, truth.as_ref(), &bundle.sensor, params.pd)?;

        post = if k == 1 {
            propagate_only(&post, &bundle.dynamics, rng)
        } else {
            bpf_predict(&post, params, &bundle.dynamics, &prior, rng)
        };
        post = bpf_update(&post, z.as_ref(), params, &bundle.sensor, k)?;
        if z.is_some() && post.effective_sample_size() < n_particles as f64 / 2.0 {
            post = systematic_resample(&post, rng);
        }

        let est = extract_estimate(&post, threshold);
        let e = set_error(truth.as_ref(), est.as_ref(), params);
        debug_assert_eq!(e.len(), dim);
        sq_err.push(outer(&e));
        truth_present.push(truth.is_some());
        est_present.push(est.is_some());
    }

    Ok(RunResult {
        sq_err,
        truth_present,
        est_present,
    })
}

/// Run `cfg.runs` independent simulations in parallel and average the
/// squared set errors per scan.
///
/// Run `i` draws from stream `i` of a counter-mode generator seeded with
/// `cfg.seed`, so results are independent of scheduling and thread count.
/// Runs whose weights degenerate are flagged and excluded from the averages;
/// the call only fails if every run degenerates (or a model error occurs).
pub fn empirical_mse(spec: &ScenarioSpec, cfg: &McConfig) -> Result<McSeries> {
    if cfg.runs == 0 {
        return Err(Error::InvalidParams("runs must be at least 1".into()));
    }
    if cfg.particles == 0 {
        return Err(Error::InvalidParams("particles must be at least 1".into()));
    }
    spec.validate()?;

    let results: Vec<Result<RunResult>> = (0..cfg.runs)
        .into_par_iter()
        .map(|run_idx| {
            let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
            rng.set_stream(run_idx as u64);
            simulate_run(spec, cfg.particles, cfg.threshold, &mut rng)
        })
        .collect();

    let dim = spec.params.e0.len();
    let scans = spec.scans;
    let mut sum = vec![Matrix::zeros(dim, dim); scans];
    let mut traces: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.runs); scans];
    let mut truth_count = vec![0usize; scans];
    let mut est_count = vec![0usize; scans];
    let mut degenerate_runs = Vec::new();
    let mut effective_runs = 0usize;

    for (run_idx, res) in results.into_iter().enumerate() {
        match res {
            Ok(run) => {
                effective_runs += 1;
                for k in 0..scans {
                    sum[k] = sum[k].add(&run.sq_err[k]);
                    traces[k].push(trace(&run.sq_err[k]));
                    if run.truth_present[k] {
                        truth_count[k] += 1;
                    }
                    if run.est_present[k] {
                        est_count[k] += 1;
                    }
                }
            }
            Err(Error::DegenerateWeights { .. }) => degenerate_runs.push(run_idx),
            Err(e) => return Err(e),
        }
    }
    if effective_runs == 0 {
        return Err(Error::DegenerateWeights { scan: 1 });
    }

    let n = effective_runs as f64;
    let per_scan = (0..scans)
        .map(|k| {
            let mse = sum[k].scale(1.0 / n);
            let rmse = (0..dim).map(|i| mse[(i, i)].max(0.0).sqrt()).collect();
            let trace_mean = compensated_sum(traces[k].iter().copied()) / n;
            let trace_se = if effective_runs > 1 {
                let var = compensated_sum(
                    traces[k].iter().map(|t| (t - trace_mean) * (t - trace_mean)),
                ) / (n - 1.0);
                (var / n).sqrt()
            } else {
                0.0
            };
            McScan {
                k: k + 1,
                mse,
                rmse,
                trace_mean,
                trace_se,
                truth_present_rate: truth_count[k] as f64 / n,
                est_present_rate: est_count[k] as f64 / n,
            }
        })
        .collect();

    Ok(McSeries {
        per_scan,
        runs: cfg.runs,
        effective_runs,
        degenerate_runs,
    })
}
