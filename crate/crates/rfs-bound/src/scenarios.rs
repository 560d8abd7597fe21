//! Concrete experiment definitions: a linear constant-velocity scenario with
//! position measurements, and a bearings-only scenario with a circling own
//! ship. Each produces, per scan, the linearized model bundle the
//! information recursions consume and the sensor the Monte Carlo simulation
//! samples from.
//!
//! Timing convention: the prior describes the state one transition before
//! the first scan in the linear scenario (so scan 1 already includes one
//! step of dynamics), while the bearings prior sits directly at scan 1 (its
//! scan-1 transition is the identity and the bearing Jacobian is evaluated
//! at the initial relative state).

use crate::linalg::{Matrix, Vector};
use crate::models::{
    bearing_jacobian, cv_process_noise, cv_transition, BearingsScenarioModel, BernoulliParams,
    GaussianPrior, LinearGaussianModel, SensorModel,
};
use crate::seqtree::MAX_SCANS;
use crate::{Error, Result};

/// Log2 of the default sequence-node budget: `2^20` nodes per layer.
pub const DEFAULT_NODE_CAP: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioKind {
    LinearCv,
    BearingsOnly,
}

/// Everything needed to run the bound pipeline and the Monte Carlo
/// validation for one experiment.
#[derive(Clone, Debug)]
pub struct ScenarioSpec {
    pub name: String,
    pub kind: ScenarioKind,
    /// Scan interval, seconds.
    pub t_step: f64,
    /// Process-noise intensity (LinearCv only; BearingsOnly is noiseless).
    pub q_intensity: f64,
    /// Measurement noise: per-axis position std (LinearCv, meters) or
    /// bearing std (BearingsOnly, radians).
    pub sensor_noise: f64,
    /// Prior standard deviations (c_r, c_v) applied per axis.
    pub prior_std: (f64, f64),
    /// Target state at the first scan (LinearCv: prior mean at the scan
    /// before the first; BearingsOnly: absolute target state at scan 1).
    pub initial_target: Vector,
    /// Own-ship state at scan 1 (BearingsOnly).
    pub initial_ownship: Option<Vector>,
    /// Own-ship turn rate, rad/s (BearingsOnly).
    pub omega: Option<f64>,
    pub scans: usize,
    pub params: BernoulliParams,
    /// Drop sequence nodes whose probability falls below this (0 disables).
    pub prune_eps: f64,
    /// Log2 of the largest admissible layer; runs needing more error out.
    pub node_cap: usize,
}

/// One scan's models: the linearized dynamics/measurement bundle consumed by
/// the information recursions, and the sampling sensor for simulation.
#[derive(Clone, Debug)]
pub struct ScanBundle {
    pub dynamics: LinearGaussianModel,
    pub sensor: SensorModel,
}

fn e_vector(c_r: f64, c_v: f64) -> Vector {
    Vector::from_slice(&[c_r, c_v, c_r, c_v])
}

/// Constant-velocity target in the plane, position measurements every 5 s,
/// near-deterministic dynamics. Ten scans, P_d = 0.8, certain existence by
/// default.
pub fn linear_default() -> ScenarioSpec {
    let (c_r, c_v) = (100.0, 5.0);
    let e = e_vector(c_r, c_v);
    ScenarioSpec {
        name: "linear".to_string(),
        kind: ScenarioKind::LinearCv,
        t_step: 5.0,
        q_intensity: 1e-8,
        sensor_noise: 25.0,
        prior_std: (c_r, c_v),
        initial_target: Vector::zeros(4),
        initial_ownship: None,
        omega: None,
        scans: 10,
        params: BernoulliParams::new(1.0, 1.0, 0.8, e, e).expect("default params are valid"),
        prune_eps: 0.0,
        node_cap: DEFAULT_NODE_CAP,
    }
}

/// Bearings-only tracking of a constant-velocity target from an own ship in
/// uniform circular motion, deterministic dynamics, twenty scans, P_d = 0.9.
pub fn bearings_default() -> ScenarioSpec {
    let (c_r, c_v) = (10000.0, 100.0);
    let e = e_vector(c_r, c_v);
    ScenarioSpec {
        name: "bearings".to_string(),
        kind: ScenarioKind::BearingsOnly,
        t_step: 5.0,
        q_intensity: 0.0,
        sensor_noise: 1.0_f64.to_radians(),
        prior_std: (c_r, c_v),
        initial_target: Vector::from_slice(&[-25000.0, 150.0, 20000.0, 100.0]),
        initial_ownship: Some(Vector::from_slice(&[-30000.0, 200.0, 50000.0, 0.0])),
        omega: Some(1.0125_f64.to_radians()),
        scans: 20,
        params: BernoulliParams::new(1.0, 1.0, 0.9, e, e).expect("default params are valid"),
        prune_eps: 0.0,
        node_cap: DEFAULT_NODE_CAP,
    }
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.scans < 1 {
            return Err(Error::InvalidParams("scans must be at least 1".to_string()));
        }
        if self.node_cap > MAX_SCANS {
            return Err(Error::InvalidParams(format!(
                "node cap 2^{} exceeds the hard limit 2^{MAX_SCANS}",
                self.node_cap
            )));
        }
        if !(self.t_step > 0.0 && self.t_step.is_finite()) {
            return Err(Error::InvalidParams(format!("scan interval {} s", self.t_step)));
        }
        if !(self.sensor_noise > 0.0 && self.sensor_noise.is_finite()) {
            return Err(Error::InvalidParams(format!("sensor noise {}", self.sensor_noise)));
        }
        if !(0.0..1.0).contains(&self.prune_eps) {
            return Err(Error::InvalidParams(format!(
                "prune threshold {} outside [0, 1)",
                self.prune_eps
            )));
        }
        match self.kind {
            ScenarioKind::LinearCv => {
                if self.q_intensity <= 0.0 {
                    return Err(Error::InvalidParams(
                        "linear scenario needs positive process-noise intensity".to_string(),
                    ));
                }
            }
            ScenarioKind::BearingsOnly => {
                if self.initial_ownship.is_none() || self.omega.is_none() {
                    return Err(Error::InvalidParams(
                        "bearings scenario needs an own-ship state and turn rate".to_string(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// The Gaussian prior on the (relative, for bearings) target state.
    pub fn prior(&self) -> GaussianPrior {
        let (c_r, c_v) = self.prior_std;
        let mean = match self.kind {
            ScenarioKind::LinearCv => self.initial_target,
            ScenarioKind::BearingsOnly => {
                let own = self.initial_ownship.expect("validated: ownship present");
                self.initial_target.sub(&own)
            }
        };
        GaussianPrior { mean, std: e_vector(c_r, c_v) }
    }

    fn bearings_geometry(&self) -> BearingsScenarioModel {
        BearingsScenarioModel {
            omega: self.omega.expect("validated: turn rate present"),
            t_step: self.t_step,
            ownship0: self.initial_ownship.expect("validated: ownship present"),
            target0: self.initial_target,
            sigma_z: self.sensor_noise,
        }
    }

    /// Models for scan `k` (1-based): the transition leading into the scan
    /// and the measurement taken at it.
    pub fn scan_models(&self, k: usize) -> Result<ScanBundle> {
        if k < 1 || k > self.scans {
            return Err(Error::InvalidParams(format!(
                "scan {k} outside 1..={}",
                self.scans
            )));
        }
        match self.kind {
            ScenarioKind::LinearCv => {
                let h = Matrix::from_rows(&[&[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0]]);
                let s2 = self.sensor_noise * self.sensor_noise;
                let r = Matrix::from_diag(&[s2, s2]);
                let dynamics = LinearGaussianModel::new(
                    cv_transition(self.t_step),
                    cv_process_noise(self.t_step, self.q_intensity),
                    h,
                    r,
                    false,
                );
                let sensor = SensorModel::Linear { h, r };
                Ok(ScanBundle { dynamics, sensor })
            }
            ScenarioKind::BearingsOnly => {
                let geo = self.bearings_geometry();
                let nominal = geo.nominal_relative(k);
                let jac = bearing_jacobian(&nominal)?;
                let mut h = Matrix::zeros(1, 4);
                for i in 0..4 {
                    h[(0, i)] = jac[i];
                }
                let s2 = self.sensor_noise * self.sensor_noise;
                let r = Matrix::from_diag(&[s2]);
                let (f, offset) = if k == 1 {
                    // The prior sits directly at the first scan.
                    (Matrix::identity(4), Vector::zeros(4))
                } else {
                    (cv_transition(self.t_step), geo.relative_offset(k - 1).scale(-1.0))
                };
                let dynamics =
                    LinearGaussianModel::new(f, Matrix::zeros(4, 4), h, r, true).with_offset(offset);
                let sensor = SensorModel::Bearing { sigma: self.sensor_noise };
                Ok(ScanBundle { dynamics, sensor })
            }
        }
    }

    /// Multiply both cardinality-mismatch vectors by `s >= 0`.
    pub fn apply_e_scale(&mut self, s: f64) -> Result<()> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::InvalidParams(format!("e-scale {s} must be finite and >= 0")));
        }
        let p = &self.params;
        self.params =
            BernoulliParams::new(p.b, p.r, p.pd, p.e0.scale(s), p.e1.scale(s))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{outer, trace};

    #[test]
    fn linear_defaults_match_pinned_values() {
        let s = linear_default();
        s.validate().unwrap();
        assert_eq!(s.scans, 10);
        assert_eq!(s.params.pd, 0.8);
        assert_eq!(s.params.b, 1.0);
        assert_eq!(s.params.r, 1.0);
        assert_eq!(s.t_step, 5.0);
        let bundle = s.scan_models(1).unwrap();
        assert_eq!(bundle.dynamics.r[(0, 0)], 625.0);
        assert_eq!(bundle.dynamics.r[(1, 1)], 625.0);
        assert_eq!(s.params.e1.as_slice(), &[100.0, 5.0, 100.0, 5.0]);
        assert_eq!(trace(&outer(&s.params.e1)), 20050.0);
        let prior = s.prior();
        assert_eq!(prior.cov()[(0, 0)], 1e4);
        assert_eq!(prior.cov()[(1, 1)], 25.0);
    }

    #[test]
    fn bearings_defaults_match_pinned_values() {
        let s = bearings_default();
        s.validate().unwrap();
        assert_eq!(s.scans, 20);
        assert_eq!(s.params.pd, 0.9);
        assert!((s.sensor_noise - std::f64::consts::PI / 180.0).abs() < 1e-15);
        assert!((s.omega.unwrap() - 1.0125 * std::f64::consts::PI / 180.0).abs() < 1e-15);
        let prior = s.prior();
        assert_eq!(prior.mean.as_slice(), &[5000.0, -50.0, -30000.0, 100.0]);
        assert_eq!(prior.cov()[(0, 0)], 1e8);
        assert_eq!(prior.cov()[(1, 1)], 1e4);
    }

    #[test]
    fn linear_bundles_are_scan_invariant() {
        let s = linear_default();
        let first = s.scan_models(1).unwrap();
        for k in 2..=s.scans {
            let b = s.scan_models(k).unwrap();
            assert_eq!(b.dynamics.f.sub(&first.dynamics.f).max_abs(), 0.0);
            assert_eq!(b.dynamics.q.sub(&first.dynamics.q).max_abs(), 0.0);
            assert_eq!(b.dynamics.h.sub(&first.dynamics.h).max_abs(), 0.0);
            assert_eq!(b.dynamics.offset.as_slice(), first.dynamics.offset.as_slice());
        }
    }

    #[test]
    fn bearings_first_scan_keeps_prior_in_place() {
        let s = bearings_default();
        let b = s.scan_models(1).unwrap();
        assert!(b.dynamics.noiseless);
        assert_eq!(b.dynamics.f.sub(&Matrix::identity(4)).max_abs(), 0.0);
        assert_eq!(b.dynamics.offset.as_slice(), &[0.0; 4]);
        // Jacobian evaluated at the initial relative state.
        let jac = bearing_jacobian(&Vector::from_slice(&[5000.0, -50.0, -30000.0, 100.0])).unwrap();
        for i in 0..4 {
            assert!((b.dynamics.h[(0, i)] - jac[i]).abs() < 1e-18);
        }
    }

    #[test]
    fn bearings_bundles_propagate_the_nominal_track() {
        let s = bearings_default();
        let geo = s.bearings_geometry();
        let mut rel = s.prior().mean;
        for k in 2..=s.scans {
            let b = s.scan_models(k).unwrap();
            rel = b.dynamics.f.mul_vec(&rel).add(&b.dynamics.offset);
            let nominal = geo.nominal_relative(k);
            for i in 0..4 {
                assert!(
                    (rel[i] - nominal[i]).abs() < 1e-6 * nominal[i].abs().max(1.0),
                    "scan {k} component {i}"
                );
            }
        }
    }

    #[test]
    fn e_scale_doubles_the_outer_trace() {
        let mut s = linear_default();
        s.apply_e_scale(2.0).unwrap();
        assert_eq!(trace(&outer(&s.params.e1)), 80200.0);
        assert!(s.apply_e_scale(-1.0).is_err());
    }

    #[test]
    fn validation_rejects_incoherent_specs() {
        let mut s = linear_default();
        s.scans = 0;
        assert!(s.validate().is_err());

        let mut s = linear_default();
        s.node_cap = 30;
        assert!(s.validate().is_err());

        let mut s = bearings_default();
        s.initial_ownship = None;
        assert!(s.validate().is_err());

        let mut s = linear_default();
        s.prune_eps = 1.5;
        assert!(s.validate().is_err());
    }
}
