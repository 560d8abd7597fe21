//! Per-history error bounds and their probability-weighted total.
//!
//! For a detection-ended history the bound is the inverse information matrix
//! weighted by the history probability. For an empty-ended history two
//! candidate bounds exist, reflecting the two rational cardinality calls an
//! estimator can make after seeing nothing:
//!
//! - declare absent: pay `e1 e1ᵀ` on the mass where the target was actually
//!   present (`P* = e1 e1ᵀ (Pr - ρ)`),
//! - declare present: pay `e0 e0ᵀ` on the absent mass plus the information
//!   bound on the present mass (`P** = e0 e0ᵀ ρ + J⁻¹ Pr`).
//!
//! The smaller-trace candidate is kept (ties go to `P**`); the minimum of
//! two lower bounds is itself a lower bound, so the selection is always
//! safe. The total per-scan bound is the fixed-order sum over histories.

use crate::fim::{initial_fim, FimLayer, ScanOps};
use crate::linalg::{compensated_sum, invert_spd, is_psd, outer, trace, MatSlab, Matrix};
use crate::models::BernoulliParams;
use crate::scenarios::ScenarioSpec;
use crate::seqtree::SequenceLayer;
use crate::{Error, Result};

/// Which candidate produced a per-history bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// Empty-ended history, absent-declaration candidate `e1 e1ᵀ (Pr - ρ)`.
    Star,
    /// Empty-ended history, present-declaration candidate
    /// `e0 e0ᵀ ρ + J⁻¹ Pr`.
    DoubleStar,
    /// Detection-ended history, `J⁻¹ Pr`.
    Detection,
}

/// Tolerance for PSD audits of information and bound matrices.
pub const PSD_TOL: f64 = 1e-9;

/// Bound for one empty-ended history: the smaller-trace candidate, `P**` on
/// ties.
pub fn bound_empty_branch(
    j: &Matrix,
    pr_empty: f64,
    rho: f64,
    params: &BernoulliParams,
) -> Result<(Matrix, Branch)> {
    if rho < -1e-12 || rho > pr_empty + 1e-12 {
        return Err(Error::Domain(format!(
            "absence mass {rho} outside [0, {pr_empty}]"
        )));
    }
    let dim = j.rows();
    if pr_empty <= 0.0 {
        // Both candidates vanish; the tie rule picks the second.
        return Ok((Matrix::zeros(dim, dim), Branch::DoubleStar));
    }
    let rho = rho.clamp(0.0, pr_empty);
    let p_star = outer(&params.e1).scale(pr_empty - rho);
    let p_double = outer(&params.e0).scale(rho).add(&invert_spd(j)?.scale(pr_empty));
    if trace(&p_star) < trace(&p_double) {
        Ok((p_star, Branch::Star))
    } else {
        Ok((p_double, Branch::DoubleStar))
    }
}

/// Bound for one detection-ended history: `J⁻¹ Pr`.
pub fn bound_detection_branch(j: &Matrix, pr: f64) -> Result<Matrix> {
    if pr <= 0.0 {
        return Ok(Matrix::zeros(j.rows(), j.cols()));
    }
    Ok(invert_spd(j)?.scale(pr))
}

/// Square roots of selected diagonal entries (clamped at zero so roundoff
/// never produces NaN).
pub fn rmse_components(p: &Matrix, indices: &[usize]) -> Vec<f64> {
    indices.iter().map(|&i| p[(i, i)].max(0.0).sqrt()).collect()
}

/// Per-history bounds for every pattern of one scan depth, materialized.
/// Useful for inspection and small-depth tests; the series driver streams
/// instead.
#[derive(Clone, Debug)]
pub struct BoundLayer {
    pub k: usize,
    pub per_seq: MatSlab,
    pub selected_branch: Vec<Branch>,
}

impl BoundLayer {
    pub fn assemble(
        seq: &SequenceLayer,
        fims: &FimLayer,
        params: &BernoulliParams,
    ) -> Result<BoundLayer> {
        assert_eq!(seq.k, fims.k, "sequence and information layers must align");
        let n = seq.n_patterns();
        let dim = fims.fims.dim();
        let mut per_seq = MatSlab::zeros(dim, n);
        let mut selected_branch = Vec::with_capacity(n);
        let detection_start = n / 2;
        for m in 0..n {
            let j = fims.fims.get(m);
            if m >= detection_start {
                per_seq.set(m, &bound_detection_branch(&j, seq.prob[m])?);
                selected_branch.push(Branch::Detection);
            } else {
                let (p, branch) = bound_empty_branch(&j, seq.prob[m], seq.rho[m], params)?;
                per_seq.set(m, &p);
                selected_branch.push(branch);
            }
        }
        Ok(BoundLayer { k: seq.k, per_seq, selected_branch })
    }

    /// Fixed index-order sum of the per-history bounds.
    pub fn total_bound(&self) -> Matrix {
        let dim = self.per_seq.dim();
        let mut total = Matrix::zeros(dim, dim);
        for m in 0..self.per_seq.len() {
            total = total.add(&self.per_seq.get(m));
        }
        total
    }
}

/// One scan's aggregated bound plus bookkeeping for audits and reports.
#[derive(Clone, Debug)]
pub struct ScanBound {
    pub k: usize,
    pub p_k: Matrix,
    /// Square root of every diagonal entry of `p_k`.
    pub rmse: Vec<f64>,
    pub star: usize,
    pub double_star: usize,
    pub detection: usize,
    /// Compensated sum of retained history probabilities.
    pub pr_mass_kept: f64,
    /// Mass removed by pruning, cumulative over scans.
    pub dropped_mass: f64,
    /// `|pr_mass_kept + dropped_mass - 1|`.
    pub mass_dev: f64,
    /// Whether every information matrix, per-history bound, and the total
    /// passed a PSD check at [`PSD_TOL`] this scan.
    pub psd_ok: bool,
}

#[derive(Clone, Debug)]
pub struct BoundSeries {
    pub per_scan: Vec<ScanBound>,
}

impl BoundSeries {
    pub fn scan(&self, k: usize) -> &ScanBound {
        &self.per_scan[k - 1]
    }
}

fn check_cap(spec: &ScenarioSpec) -> Result<()> {
    if spec.scans > spec.node_cap {
        return Err(Error::CapExceeded(format!(
            "{} scans need 2^{} sequence nodes, over the 2^{} budget",
            spec.scans, spec.scans, spec.node_cap
        )));
    }
    Ok(())
}

fn run_series(spec: &ScenarioSpec, enumeration: bool) -> Result<BoundSeries> {
    spec.validate()?;
    check_cap(spec)?;
    let params = if enumeration {
        // Enumeration comparator: certain existence, no absence bookkeeping.
        BernoulliParams::new(1.0, 1.0, spec.params.pd, spec.params.e0, spec.params.e1)?
    } else {
        spec.params.clone()
    };
    let prior = spec.prior();
    let mut fims = FimLayer::root(initial_fim(&prior.cov())?);
    let mut seq: Option<SequenceLayer> = None;
    let mut per_scan = Vec::with_capacity(spec.scans);
    for k in 1..=spec.scans {
        let bundle = spec.scan_models(k)?;
        let ops = ScanOps::new(&bundle.dynamics)?;
        let keep: Vec<bool> = match &seq {
            None => vec![true],
            Some(s) => s.prob.iter().map(|&p| p >= spec.prune_eps).collect(),
        };
        let next_seq = match &seq {
            None => SequenceLayer::init(&params)?,
            Some(s) => s.advance(&params, spec.prune_eps)?,
        };
        let next_fims = fims.advance(&ops, &keep)?;
        per_scan.push(accumulate_scan(&next_seq, &next_fims, &params, enumeration)?);
        seq = Some(next_seq);
        fims = next_fims;
    }
    Ok(BoundSeries { per_scan })
}

fn accumulate_scan(
    seq: &SequenceLayer,
    fims: &FimLayer,
    params: &BernoulliParams,
    enumeration: bool,
) -> Result<ScanBound> {
    let n = seq.n_patterns();
    let dim = fims.fims.dim();
    let detection_start = n / 2;
    let mut total = Matrix::zeros(dim, dim);
    let (mut star, mut double_star, mut detection) = (0usize, 0usize, 0usize);
    let mut psd_ok = true;
    for m in 0..n {
        let j = fims.fims.get(m);
        let pr = seq.prob[m];
        let contribution = if enumeration {
            detection += 1;
            bound_detection_branch(&j, pr)?
        } else if m >= detection_start {
            detection += 1;
            bound_detection_branch(&j, pr)?
        } else {
            let (p, branch) = bound_empty_branch(&j, pr, seq.rho[m], params)?;
            match branch {
                Branch::Star => star += 1,
                Branch::DoubleStar => double_star += 1,
                Branch::Detection => unreachable!("empty branch never yields Detection"),
            }
            p
        };
        if pr > 0.0 {
            psd_ok &= is_psd(&j, PSD_TOL) && is_psd(&contribution, PSD_TOL);
        }
        total = total.add(&contribution);
    }
    psd_ok &= is_psd(&total, PSD_TOL);
    let pr_mass_kept = compensated_sum(seq.prob.iter().copied());
    let mass_dev = (pr_mass_kept + seq.dropped_mass - 1.0).abs();
    let rmse = rmse_components(&total, &(0..dim).collect::<Vec<_>>());
    Ok(ScanBound {
        k: seq.k,
        p_k: total,
        rmse,
        star,
        double_star,
        detection,
        pr_mass_kept,
        dropped_mass: seq.dropped_mass,
        mass_dev,
        psd_ok,
    })
}

/// The full per-scan bound series for a scenario: sequence probabilities,
/// per-history information, candidate selection, and the total.
pub fn rfs_bound_series(spec: &ScenarioSpec) -> Result<BoundSeries> {
    run_series(spec, false)
}

/// Enumeration comparator: the same information chain weighted by the
/// detection-pattern probabilities of an always-present target, with
/// `J⁻¹ Pr` terms only.
pub fn enum_pcrlb_series(spec: &ScenarioSpec) -> Result<BoundSeries> {
    run_series(spec, true)
}
