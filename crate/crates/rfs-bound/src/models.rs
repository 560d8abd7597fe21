//! Motion models, sensor models, and the Bernoulli existence parameters.
//!
//! The target state is a set: empty (target absent) or a singleton with a
//! kinematic state `[x, vx, y, vy]`. Existence evolves as a two-state Markov
//! chain: a present target survives with probability `r`, an absent one
//! stays absent with probability `r` (birth probability `1 - r`, drawn from
//! the prior). The sensor sees a present target with probability `pd < 1`
//! and never reports false alarms.
//!
//! Angles are radians everywhere inside the library; the CLI converts from
//! degrees at the configuration boundary.

use crate::linalg::{cholesky, Matrix, Vector};
use crate::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

/// Existence / detection parameters plus the two mismatch error vectors.
///
/// `e0` prices reporting a state while the target is absent; `e1` prices
/// reporting absence while the target is present. Both have state dimension.
#[derive(Clone, Debug)]
pub struct BernoulliParams {
    /// Probability the target exists at the first scan.
    pub b: f64,
    /// Survival probability (and stay-absent probability) per scan.
    pub r: f64,
    /// Detection probability, strictly inside (0, 1).
    pub pd: f64,
    pub e0: Vector,
    pub e1: Vector,
}

impl BernoulliParams {
    pub fn new(b: f64, r: f64, pd: f64, e0: Vector, e1: Vector) -> Result<Self> {
        if !(0.0..=1.0).contains(&b) {
            return Err(Error::InvalidParams(format!("b = {b} outside [0, 1]")));
        }
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidParams(format!("r = {r} outside [0, 1]")));
        }
        if !(pd > 0.0 && pd < 1.0) {
            return Err(Error::InvalidParams(format!(
                "pd = {pd} outside the open interval (0, 1)"
            )));
        }
        if e0.len() != e1.len() {
            return Err(Error::InvalidParams(format!(
                "mismatch error vectors disagree in length: {} vs {}",
                e0.len(),
                e1.len()
            )));
        }
        for v in e0.as_slice().iter().chain(e1.as_slice()) {
            if !v.is_finite() {
                return Err(Error::InvalidParams("non-finite mismatch error entry".into()));
            }
        }
        Ok(BernoulliParams { b, r, pd, e0, e1 })
    }
}

/// One scan step of a linear-Gaussian model, already linearized where the
/// underlying sensor is nonlinear.
///
/// Transition: `x' = f x + offset (+ w, w ~ N(0, q))`, the noise dropped when
/// `noiseless` is set. Measurement: `z = h x + v, v ~ N(0, r)`. The `offset`
/// carries deterministic inputs such as own-platform motion and does not
/// affect information recursions.
#[derive(Clone, Debug)]
pub struct LinearGaussianModel {
    pub f: Matrix,
    pub q: Matrix,
    pub h: Matrix,
    pub r: Matrix,
    pub noiseless: bool,
    pub offset: Vector,
}

impl LinearGaussianModel {
    pub fn new(f: Matrix, q: Matrix, h: Matrix, r: Matrix, noiseless: bool) -> Self {
        assert!(f.is_square(), "transition must be square");
        assert_eq!(q.rows(), f.rows(), "process noise dimension mismatch");
        assert_eq!(h.cols(), f.rows(), "measurement map dimension mismatch");
        assert_eq!(r.rows(), h.rows(), "measurement noise dimension mismatch");
        assert!(r.is_square());
        let offset = Vector::zeros(f.rows());
        LinearGaussianModel { f, q, h, r, noiseless, offset }
    }

    pub fn with_offset(mut self, offset: Vector) -> Self {
        assert_eq!(offset.len(), self.f.rows());
        self.offset = offset;
        self
    }

    pub fn state_dim(&self) -> usize {
        self.f.rows()
    }
}

/// Constant-velocity transition over a step of `t` seconds for the state
/// `[x, vx, y, vy]`.
pub fn cv_transition(t: f64) -> Matrix {
    Matrix::from_rows(&[
        &[1.0, t, 0.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 1.0, t],
        &[0.0, 0.0, 0.0, 1.0],
    ])
}

/// Continuous white-noise-acceleration covariance over a step of `t`
/// seconds with intensity `q`, block diagonal per axis.
pub fn cv_process_noise(t: f64, q: f64) -> Matrix {
    let a = q * t * t * t / 3.0;
    let b = q * t * t / 2.0;
    let c = q * t;
    Matrix::from_rows(&[
        &[a, b, 0.0, 0.0],
        &[b, c, 0.0, 0.0],
        &[0.0, 0.0, a, b],
        &[0.0, 0.0, 0.0, c],
    ])
    .symmetrized()
}

/// Bearings-only geometry: an own ship in uniform circular motion observing
/// the bearing of the relative state `target - ownship`.
#[derive(Clone, Debug)]
pub struct BearingsScenarioModel {
    /// Turn rate of the own ship, rad/s.
    pub omega: f64,
    /// Scan interval, seconds.
    pub t_step: f64,
    /// Own-ship state at the first scan.
    pub ownship0: Vector,
    /// Target state at the first scan.
    pub target0: Vector,
    /// Bearing noise standard deviation, radians.
    pub sigma_z: f64,
}

impl BearingsScenarioModel {
    /// One-step turn matrix for the own ship. Velocity rotates by
    /// `omega * t_step` per scan; position integrates the rotating velocity.
    pub fn turn_matrix(&self) -> Matrix {
        let w = self.omega;
        let t = self.t_step;
        if w == 0.0 {
            return cv_transition(t);
        }
        let (s, c) = (w * t).sin_cos();
        // 1 - cos(wt) computed as 2 sin^2(wt/2) to avoid cancellation for
        // small turn rates.
        let vers = 2.0 * (0.5 * w * t).sin().powi(2);
        Matrix::from_rows(&[
            &[1.0, s / w, 0.0, -vers / w],
            &[0.0, c, 0.0, -s],
            &[0.0, vers / w, 1.0, s / w],
            &[0.0, s, 0.0, c],
        ])
    }

    /// Own-ship state at scan `k >= 1`: the initial state advanced through
    /// `k - 1` turn steps.
    pub fn ownship_state(&self, k: usize) -> Vector {
        assert!(k >= 1, "scans are 1-based");
        let theta = self.turn_matrix();
        let mut x = self.ownship0;
        for _ in 1..k {
            x = theta.mul_vec(&x);
        }
        x
    }

    /// Deterministic input `u` of the relative-state transition from scan
    /// `k` to `k + 1`: `rel' = F rel - u` with `u = own' - F own`, which is
    /// exactly the own-ship acceleration the target does not share.
    pub fn relative_offset(&self, k: usize) -> Vector {
        let f = cv_transition(self.t_step);
        let own_k = self.ownship_state(k);
        let own_next = self.ownship_state(k + 1);
        own_next.sub(&f.mul_vec(&own_k))
    }

    /// Noise-free relative state at scan `k >= 1`, advanced by the relative
    /// recursion from `target0 - ownship0`.
    pub fn nominal_relative(&self, k: usize) -> Vector {
        assert!(k >= 1, "scans are 1-based");
        let f = cv_transition(self.t_step);
        let mut rel = self.target0.sub(&self.ownship0);
        for j in 1..k {
            rel = f.mul_vec(&rel).sub(&self.relative_offset(j));
        }
        rel
    }
}

/// Normalize an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut x = a % two_pi;
    if x <= -PI {
        x += two_pi;
    } else if x > PI {
        x -= two_pi;
    }
    x
}

/// Four-quadrant bearing `atan2(x, y)` of the relative state `[x, ., y, .]`,
/// measured from the +y axis, in `(-pi, pi]`.
pub fn bearing(rel: &Vector) -> Result<f64> {
    let (chi, gamma) = (rel[0], rel[2]);
    if chi == 0.0 && gamma == 0.0 {
        return Err(Error::OriginSingularity);
    }
    let th = chi.atan2(gamma);
    Ok(if th == -PI { PI } else { th })
}

/// Gradient row of [`bearing`] with respect to the full state.
pub fn bearing_jacobian(rel: &Vector) -> Result<Vector> {
    let (chi, gamma) = (rel[0], rel[2]);
    let r2 = chi * chi + gamma * gamma;
    if r2 == 0.0 {
        return Err(Error::OriginSingularity);
    }
    Ok(Vector::from_slice(&[gamma / r2, 0.0, -chi / r2, 0.0]))
}

/// Diagonal Gaussian prior for a newborn or initial target state.
#[derive(Clone, Debug)]
pub struct GaussianPrior {
    pub mean: Vector,
    /// Per-component standard deviations.
    pub std: Vector,
}

impl GaussianPrior {
    pub fn cov(&self) -> Matrix {
        let n = self.std.len();
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.std[i] * self.std[i];
        }
        m
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vector {
        let mut x = self.mean;
        for i in 0..x.len() {
            let n: f64 = rng.sample(StandardNormal);
            x[i] += self.std[i] * n;
        }
        x
    }
}

/// Advance the set-valued state one scan: survival or death for a present
/// target, possible birth from the prior for an absent one.
pub fn sample_transition<R: Rng>(
    rng: &mut R,
    state: Option<&Vector>,
    model: &LinearGaussianModel,
    r: f64,
    prior: &GaussianPrior,
) -> Option<Vector> {
    let stay: f64 = rng.random();
    match state {
        Some(x) => {
            if stay < r {
                let mut next = model.f.mul_vec(x).add(&model.offset);
                if !model.noiseless {
                    let l = cholesky(&model.q).expect("process noise must be SPD when sampled");
                    let mut w = Vector::zeros(next.len());
                    for i in 0..w.len() {
                        w[i] = rng.sample(StandardNormal);
                    }
                    next = next.add(&l.mul_vec(&w));
                }
                Some(next)
            } else {
                None
            }
        }
        None => {
            if stay < r {
                None
            } else {
                Some(prior.sample(rng))
            }
        }
    }
}

/// Sensor used when actually simulating measurements (as opposed to the
/// linearized `h`/`r` pair the information recursions consume).
#[derive(Clone, Debug)]
pub enum SensorModel {
    /// `z = h x + v`, `v ~ N(0, r)`.
    Linear { h: Matrix, r: Matrix },
    /// One noisy bearing of the relative state, std `sigma` radians.
    Bearing { sigma: f64 },
}

impl SensorModel {
    pub fn dim(&self) -> usize {
        match self {
            SensorModel::Linear { h, .. } => h.rows(),
            SensorModel::Bearing { .. } => 1,
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R, x: &Vector) -> Result<Vector> {
        match self {
            SensorModel::Linear { h, r } => {
                let l = cholesky(r)?;
                let mut v = Vector::zeros(h.rows());
                for i in 0..v.len() {
                    v[i] = rng.sample(StandardNormal);
                }
                Ok(h.mul_vec(x).add(&l.mul_vec(&v)))
            }
            SensorModel::Bearing { sigma } => {
                let th = bearing(x)?;
                let n: f64 = rng.sample(StandardNormal);
                Ok(Vector::from_slice(&[wrap_angle(th + sigma * n)]))
            }
        }
    }

    /// Unnormalized log-likelihood of `z` given a present target at `x`.
    /// Constant factors cancel in particle-weight normalization.
    pub fn log_likelihood(&self, z: &Vector, x: &Vector) -> f64 {
        match self {
            SensorModel::Linear { h, r } => {
                let d = z.sub(&h.mul_vec(x));
                // Diagonal or small full covariance; solve via Cholesky.
                let l = match cholesky(r) {
                    Ok(l) => l,
                    Err(_) => return f64::NEG_INFINITY,
                };
                // Solve L y = d and use ||y||^2 = d^T R^-1 d.
                let mut y = d;
                for i in 0..y.len() {
                    let mut s = y[i];
                    for k in 0..i {
                        s -= l[(i, k)] * y[k];
                    }
                    y[i] = s / l[(i, i)];
                }
                -0.5 * y.dot(&y)
            }
            SensorModel::Bearing { sigma } => match bearing(x) {
                Ok(th) => {
                    let d = wrap_angle(z[0] - th);
                    -0.5 * d * d / (sigma * sigma)
                }
                Err(_) => f64::NEG_INFINITY,
            },
        }
    }
}

/// Draw the measurement set for one scan: empty when the target is absent or
/// missed, a singleton otherwise. Draw order (detection coin before noise)
/// is fixed for reproducibility.
pub fn sample_measurement<R: Rng>(
    rng: &mut R,
    state: Option<&Vector>,
    sensor: &SensorModel,
    pd: f64,
) -> Result<Option<Vector>> {
    match state {
        None => Ok(None),
        Some(x) => {
            let detect: f64 = rng.random();
            if detect < pd {
                Ok(Some(sensor.sample(rng, x)?))
            } else {
                Ok(None)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn params_reject_out_of_range() {
        let e = Vector::from_slice(&[100.0, 5.0, 100.0, 5.0]);
        assert!(BernoulliParams::new(1.0, 1.0, 0.8, e, e).is_ok());
        assert!(BernoulliParams::new(1.0, 1.0, 1.0, e, e).is_err());
        assert!(BernoulliParams::new(1.0, 1.0, 0.0, e, e).is_err());
        assert!(BernoulliParams::new(1.5, 1.0, 0.8, e, e).is_err());
        assert!(BernoulliParams::new(1.0, -0.1, 0.8, e, e).is_err());
    }

    #[test]
    fn cv_transition_at_zero_step_is_identity() {
        assert_eq!(cv_transition(0.0), Matrix::identity(4));
    }

    #[test]
    fn cv_transition_semigroup() {
        let a = cv_transition(2.0).mul(&cv_transition(3.0));
        let b = cv_transition(5.0);
        assert!(a.sub(&b).max_abs() < 1e-12);
    }

    #[test]
    fn cv_process_noise_matches_closed_form() {
        let q = cv_process_noise(5.0, 1e-8);
        assert!((q[(0, 0)] - 4.166666666666667e-7).abs() < 1e-19);
        assert!((q[(0, 1)] - 1.25e-7).abs() < 1e-19);
        assert!((q[(1, 1)] - 5e-8).abs() < 1e-19);
        assert_eq!(q[(0, 2)], 0.0);
        assert!(cholesky(&q).is_ok());
    }

    #[test]
    fn cv_process_noise_zero_intensity_is_zero() {
        assert_eq!(cv_process_noise(5.0, 0.0).max_abs(), 0.0);
    }

    fn bearings_model() -> BearingsScenarioModel {
        BearingsScenarioModel {
            omega: 1.0125_f64.to_radians(),
            t_step: 5.0,
            ownship0: Vector::from_slice(&[-30000.0, 200.0, 50000.0, 0.0]),
            target0: Vector::from_slice(&[-25000.0, 150.0, 20000.0, 100.0]),
            sigma_z: 1.0_f64.to_radians(),
        }
    }

    #[test]
    fn turn_matrix_tiny_rate_matches_cv() {
        let mut m = bearings_model();
        m.omega = 1e-12;
        let rel = m.turn_matrix().sub(&cv_transition(5.0)).max_abs();
        assert!(rel < 1e-9, "turn matrix limit off by {rel}");
        m.omega = 0.0;
        assert_eq!(m.turn_matrix(), cv_transition(5.0));
    }

    #[test]
    fn ownship_keeps_constant_speed() {
        let m = bearings_model();
        let v0 = {
            let x = m.ownship0;
            (x[1] * x[1] + x[3] * x[3]).sqrt()
        };
        for k in 1..=20 {
            let x = m.ownship_state(k);
            let v = (x[1] * x[1] + x[3] * x[3]).sqrt();
            assert!((v - v0).abs() / v0 < 1e-9, "speed drifted at scan {k}");
        }
    }

    #[test]
    fn ownship_first_scan_is_initial_state() {
        let m = bearings_model();
        assert_eq!(m.ownship_state(1), m.ownship0);
    }

    #[test]
    fn relative_offset_vanishes_for_straight_ownship() {
        let mut m = bearings_model();
        m.omega = 0.0;
        for k in 1..=5 {
            assert!(m.relative_offset(k).as_slice().iter().all(|v| v.abs() < 1e-9));
        }
    }

    #[test]
    fn relative_recursion_reconstructs_direct_target_track() {
        // The target flies constant velocity; relative + ownship must equal
        // direct target propagation.
        let m = bearings_model();
        let f = cv_transition(m.t_step);
        let mut target = m.target0;
        for k in 1..=20 {
            let rel = m.nominal_relative(k);
            let recon = rel.add(&m.ownship_state(k));
            for i in 0..4 {
                assert!(
                    (recon[i] - target[i]).abs() < 1e-6,
                    "scan {k} component {i}: {} vs {}",
                    recon[i],
                    target[i]
                );
            }
            target = f.mul_vec(&target);
        }
    }

    #[test]
    fn nominal_range_stays_far_from_origin() {
        let m = bearings_model();
        for k in 1..=20 {
            let rel = m.nominal_relative(k);
            let range = (rel[0] * rel[0] + rel[2] * rel[2]).sqrt();
            assert!(range > 1000.0, "range {range} too small at scan {k}");
        }
    }

    #[test]
    fn bearing_cardinal_directions() {
        let north = Vector::from_slice(&[0.0, 0.0, 10000.0, 0.0]);
        assert_eq!(bearing(&north).unwrap(), 0.0);
        let east = Vector::from_slice(&[10000.0, 0.0, 0.0, 0.0]);
        assert!((bearing(&east).unwrap() - PI / 2.0).abs() < 1e-15);
        let south = Vector::from_slice(&[0.0, 0.0, -1.0, 0.0]);
        assert_eq!(bearing(&south).unwrap(), PI);
        let origin = Vector::from_slice(&[0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(bearing(&origin), Err(Error::OriginSingularity)));
    }

    #[test]
    fn bearing_jacobian_closed_form_case() {
        let x = Vector::from_slice(&[0.0, 0.0, 10000.0, 0.0]);
        let j = bearing_jacobian(&x).unwrap();
        assert_eq!(j.as_slice(), &[1e-4, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn bearing_jacobian_matches_finite_differences_on_nominal_track() {
        let m = bearings_model();
        for k in 1..=20 {
            let x = m.nominal_relative(k);
            let j = bearing_jacobian(&x).unwrap();
            let range = (x[0] * x[0] + x[2] * x[2]).sqrt();
            let h = range * 1e-6;
            for (i, step_i) in [(0usize, h), (2usize, h)] {
                let mut xp = x;
                xp[i] += step_i;
                let mut xm = x;
                xm[i] -= step_i;
                let fd = wrap_angle(bearing(&xp).unwrap() - bearing(&xm).unwrap()) / (2.0 * step_i);
                let rel = (fd - j[i]).abs() / j[i].abs().max(1e-12);
                assert!(rel < 1e-5, "scan {k} component {i}: fd {fd} vs {}", j[i]);
            }
            assert_eq!(j[1], 0.0);
            assert_eq!(j[3], 0.0);
        }
    }

    #[test]
    fn bearing_jacobian_scales_inversely_with_range() {
        let x = Vector::from_slice(&[3000.0, 10.0, -4000.0, 20.0]);
        let j1 = bearing_jacobian(&x).unwrap();
        let j2 = bearing_jacobian(&x.scale(2.0)).unwrap();
        for i in [0, 2] {
            assert!((j2[i] - j1[i] / 2.0).abs() < 1e-18);
        }
    }

    fn linear_model() -> LinearGaussianModel {
        LinearGaussianModel::new(
            cv_transition(5.0),
            cv_process_noise(5.0, 1e-8),
            Matrix::from_rows(&[&[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0]]),
            Matrix::from_diag(&[625.0, 625.0]),
            false,
        )
    }

    fn prior() -> GaussianPrior {
        GaussianPrior {
            mean: Vector::zeros(4),
            std: Vector::from_slice(&[100.0, 5.0, 100.0, 5.0]),
        }
    }

    #[test]
    fn certain_survival_never_kills_or_births() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let model = linear_model();
        let p = prior();
        let x = Vector::from_slice(&[1.0, 2.0, 3.0, 4.0]);
        for _ in 0..1000 {
            assert!(sample_transition(&mut rng, Some(&x), &model, 1.0, &p).is_some());
            assert!(sample_transition(&mut rng, None, &model, 1.0, &p).is_none());
        }
    }

    #[test]
    fn survival_frequency_tracks_r() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let model = linear_model();
        let p = prior();
        let x = Vector::zeros(4);
        let n = 100_000;
        let mut alive = 0;
        for _ in 0..n {
            if sample_transition(&mut rng, Some(&x), &model, 0.9, &p).is_some() {
                alive += 1;
            }
        }
        let freq = alive as f64 / n as f64;
        assert!((freq - 0.9).abs() < 0.01, "survival frequency {freq}");
    }

    #[test]
    fn noiseless_transition_is_exact_propagation() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let mut model = linear_model();
        model.noiseless = true;
        let p = prior();
        let x = Vector::from_slice(&[10.0, 1.0, -5.0, 2.0]);
        let y = sample_transition(&mut rng, Some(&x), &model, 1.0, &p).unwrap();
        let expect = model.f.mul_vec(&x);
        assert_eq!(y.as_slice(), expect.as_slice());
    }

    #[test]
    fn absent_target_yields_empty_measurement() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let sensor = SensorModel::Bearing { sigma: 0.01 };
        for _ in 0..100 {
            assert!(sample_measurement(&mut rng, None, &sensor, 0.9).unwrap().is_none());
        }
    }

    #[test]
    fn detection_frequency_tracks_pd() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let model = linear_model();
        let sensor = SensorModel::Linear { h: model.h, r: model.r };
        let x = Vector::from_slice(&[100.0, 0.0, 100.0, 0.0]);
        let n = 100_000;
        let mut hits = 0;
        for _ in 0..n {
            if sample_measurement(&mut rng, Some(&x), &sensor, 0.8).unwrap().is_some() {
                hits += 1;
            }
        }
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.8).abs() < 0.01, "detection frequency {freq}");
    }

    #[test]
    fn linear_measurement_noise_has_expected_spread() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let model = linear_model();
        let sensor = SensorModel::Linear { h: model.h, r: model.r };
        let x = Vector::from_slice(&[1000.0, 0.0, -2000.0, 0.0]);
        let n = 50_000;
        let mut sum2 = [0.0_f64; 2];
        for _ in 0..n {
            let z = sensor.sample(&mut rng, &x).unwrap();
            sum2[0] += (z[0] - 1000.0) * (z[0] - 1000.0);
            sum2[1] += (z[1] + 2000.0) * (z[1] + 2000.0);
        }
        for v in sum2 {
            let var = v / n as f64;
            assert!((var - 625.0).abs() / 625.0 < 0.05, "sample variance {var}");
        }
    }

    #[test]
    fn bearing_log_likelihood_peaks_at_truth() {
        let sensor = SensorModel::Bearing { sigma: 0.0175 };
        let x = Vector::from_slice(&[5000.0, 0.0, -30000.0, 0.0]);
        let z = Vector::from_slice(&[bearing(&x).unwrap()]);
        let at_truth = sensor.log_likelihood(&z, &x);
        assert_eq!(at_truth, 0.0);
        let off = Vector::from_slice(&[6000.0, 0.0, -30000.0, 0.0]);
        assert!(sensor.log_likelihood(&z, &off) < at_truth);
    }

    #[test]
    fn wrap_angle_covers_branch_cuts() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-2.5 * PI) + 0.5 * PI).abs() < 1e-12);
        assert_eq!(wrap_angle(0.25), 0.25);
    }
}
