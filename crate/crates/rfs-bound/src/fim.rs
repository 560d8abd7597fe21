//! Fisher information recursions for linear-Gaussian dynamics.
//!
//! One `FimLayer` holds the information matrix conditioned on each
//! detection/miss pattern of a given depth. Advancing a layer predicts every
//! parent through the scan's dynamics and gives the detection child the
//! extra measurement information; the empty child keeps the prediction
//! unchanged (an empty scan carries no gradient information about a target
//! that is present, and the absence hypothesis is handled outside the
//! information recursion).
//!
//! The prediction operator is defined by
//!
//! `J' = Q⁻¹ - Q⁻¹ F (J + Fᵀ Q⁻¹ F)⁻¹ Fᵀ Q⁻¹`
//!
//! which by the matrix inversion lemma equals `(F J⁻¹ Fᵀ + Q)⁻¹` whenever
//! `J` is invertible. The subtraction form cancels catastrophically when `Q`
//! is many orders of magnitude smaller than `F J⁻¹ Fᵀ` (the tracking
//! scenarios here run process noise near 1e-8 while state covariances sit
//! near 1e4), so for invertible `J` the covariance form is evaluated
//! instead; the subtraction form remains as the fallback for singular PSD
//! `J`, where it is well conditioned precisely because `J` contributes
//! little to the bracket.

use crate::linalg::{cholesky, invert, invert_spd, MatSlab, Matrix};
use crate::models::LinearGaussianModel;
use crate::Result;

/// Information matrix of a Gaussian prior: the inverse covariance.
pub fn initial_fim(prior_cov: &Matrix) -> Result<Matrix> {
    invert_spd(prior_cov)
}

fn predict_information_form(j: &Matrix, f: &Matrix, q_inv: &Matrix) -> Result<Matrix> {
    let a = q_inv.mul(f);
    let s = j.add(&f.transpose().mul(&a));
    let s_inv = invert_spd(&s)?;
    Ok(q_inv.sub(&a.mul(&s_inv).mul(&a.transpose())).symmetrized())
}

fn predict_covariance_form(j: &Matrix, f: &Matrix, q: &Matrix) -> Result<Matrix> {
    let p = invert_spd(j)?;
    let p_pred = f.mul(&p).mul(&f.transpose()).add(q).symmetrized();
    invert_spd(&p_pred)
}

/// Predict an information matrix through `x' = F x + w`, `w ~ N(0, Q)`.
pub fn fim_predict(j: &Matrix, f: &Matrix, q: &Matrix) -> Result<Matrix> {
    if cholesky(j).is_ok() {
        predict_covariance_form(j, f, q)
    } else {
        predict_information_form(j, f, &invert_spd(q)?)
    }
}

/// Measurement information `Hᵀ R⁻¹ H` carried by one detection.
pub fn measurement_information(h: &Matrix, r: &Matrix) -> Result<Matrix> {
    let r_inv = invert_spd(r)?;
    Ok(h.transpose().mul(&r_inv).mul(h).symmetrized())
}

/// Predict and fold in one detection: `fim_predict(j, f, q) + Hᵀ R⁻¹ H`.
pub fn fim_update(j: &Matrix, f: &Matrix, q: &Matrix, h: &Matrix, r: &Matrix) -> Result<Matrix> {
    Ok(fim_predict(j, f, q)?.add(&measurement_information(h, r)?).symmetrized())
}

/// Predict through exactly known dynamics, `J' = F⁻ᵀ J F⁻¹`, plus the
/// measurement information when the scan produced a detection.
pub fn fim_noiseless(
    j: &Matrix,
    f: &Matrix,
    detection: Option<(&Matrix, &Matrix)>,
) -> Result<Matrix> {
    let f_inv = invert(f)?;
    let pred = f_inv.transpose().mul(j).mul(&f_inv).symmetrized();
    match detection {
        Some((h, r)) => Ok(pred.add(&measurement_information(h, r)?).symmetrized()),
        None => Ok(pred),
    }
}

/// Per-scan operators precomputed once and shared by every node of a layer.
#[derive(Clone, Debug)]
pub struct ScanOps {
    f: Matrix,
    noise: Option<(Matrix, Matrix)>,
    f_inv: Option<Matrix>,
    info: Matrix,
}

impl ScanOps {
    pub fn new(model: &LinearGaussianModel) -> Result<Self> {
        let (noise, f_inv) = if model.noiseless {
            (None, Some(invert(&model.f)?))
        } else {
            (Some((model.q, invert_spd(&model.q)?)), None)
        };
        Ok(ScanOps { f: model.f, noise, f_inv, info: measurement_information(&model.h, &model.r)? })
    }

    pub fn predict(&self, j: &Matrix) -> Result<Matrix> {
        match (&self.noise, &self.f_inv) {
            (Some((q, q_inv)), _) => {
                if cholesky(j).is_ok() {
                    predict_covariance_form(j, &self.f, q)
                } else {
                    predict_information_form(j, &self.f, q_inv)
                }
            }
            (None, Some(f_inv)) => Ok(f_inv.transpose().mul(j).mul(f_inv).symmetrized()),
            (None, None) => unreachable!("constructor always fills one branch"),
        }
    }

    pub fn measurement_info(&self) -> &Matrix {
        &self.info
    }
}

/// Information matrices for every pattern of one scan depth. Depth 0 is the
/// virtual root holding just the prior information.
#[derive(Clone, Debug)]
pub struct FimLayer {
    pub k: usize,
    pub fims: MatSlab,
}

impl FimLayer {
    /// The root layer: a single node carrying the prior information matrix.
    pub fn root(prior_info: Matrix) -> Self {
        let mut fims = MatSlab::zeros(prior_info.rows(), 1);
        fims.set(0, &prior_info);
        FimLayer { k: 0, fims }
    }

    pub fn n_patterns(&self) -> usize {
        1usize << self.k
    }

    /// Advance every kept parent one scan. Parent `m` spawns the empty child
    /// at `m` (prediction only) and the detection child at `m + 2^k`
    /// (prediction plus measurement information). Parents with
    /// `keep[m] == false` are skipped and their children stay zero; callers
    /// must never read those slots.
    pub fn advance(&self, ops: &ScanOps, keep: &[bool]) -> Result<FimLayer> {
        let n = self.n_patterns();
        assert_eq!(keep.len(), n, "keep mask must cover the layer");
        let mut fims = MatSlab::zeros(self.fims.dim(), 2 * n);
        for m in 0..n {
            if !keep[m] {
                continue;
            }
            let pred = ops.predict(&self.fims.get(m))?;
            fims.set(m, &pred);
            fims.set(m + n, &pred.add(&ops.info).symmetrized());
        }
        Ok(FimLayer { k: self.k + 1, fims })
    }
}
