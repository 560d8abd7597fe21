//! Per-history scalar recursions over the binary tree of detection/miss
//! patterns.
//!
//! A pattern of `k` scans is encoded as a `k`-bit integer `code`: bit `j`
//! (0-based) is 1 iff scan `j + 1` produced a detection. Appending an empty
//! scan keeps the code; appending a detection adds `2^k`. Layer `k` holds,
//! for each of the `2^k` codes:
//!
//! - `prob`: the pattern probability,
//! - `rho`: the joint probability that the pattern occurred *and* the target
//!   is absent at scan `k` (zero whenever scan `k` was a detection, since a
//!   detection proves presence under a zero false-alarm rate),
//! - `p_empty_next`: the conditional probability that scan `k + 1` will be
//!   empty given the pattern.
//!
//! All three advance by closed-form scalar recursions; `brute_force_layer`
//! recomputes them by exhaustive enumeration of existence histories and is
//! the oracle the recursions are tested against.

use crate::linalg::compensated_sum;
use crate::models::BernoulliParams;
use crate::{Error, Result};

/// Hard cap on the tree depth; `2^24` nodes per layer is the largest any
/// interface accepts.
pub const MAX_SCANS: usize = 24;

/// Identifies one detection/miss pattern: `k` scans, `code` with bit `j` set
/// iff scan `j + 1` was a detection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PatternIndex {
    pub k: usize,
    pub code: usize,
}

impl PatternIndex {
    pub fn new(k: usize, code: usize) -> Self {
        assert!(k >= 1 && k <= MAX_SCANS, "scan count {k} out of range");
        assert!(code < (1usize << k), "code {code} too wide for {k} scans");
        PatternIndex { k, code }
    }

    /// Whether scan `k` (the newest) was a detection.
    pub fn last_was_detection(&self) -> bool {
        (self.code >> (self.k - 1)) & 1 == 1
    }

    /// Child pattern appending an empty scan.
    pub fn empty_child(&self) -> PatternIndex {
        PatternIndex::new(self.k + 1, self.code)
    }

    /// Child pattern appending a detection.
    pub fn detection_child(&self) -> PatternIndex {
        PatternIndex::new(self.k + 1, self.code | (1 << self.k))
    }
}

/// The three per-pattern scalars for every pattern of one scan depth.
#[derive(Clone, Debug)]
pub struct SequenceLayer {
    pub k: usize,
    pub prob: Vec<f64>,
    pub rho: Vec<f64>,
    pub p_empty_next: Vec<f64>,
    /// Probability mass removed by pruning in this layer and all ancestors.
    /// Never redistributed: `sum(prob) + dropped_mass = 1`.
    pub dropped_mass: f64,
}

/// Conditional probability that the next scan is empty, advanced one scan.
///
/// For a pattern ending in a detection the target was certainly present, so
/// the next scan is empty iff the target dies or is missed: `1 - r * pd`,
/// independent of `p_prev`. For a pattern ending empty, `p_prev` (the same
/// quantity one scan earlier) encodes the current absence belief
/// `(p_prev - (1 - pd)) / (pd * p_prev)`; propagating it through the
/// survival/birth chain gives the new empty probability.
///
/// `p_prev` must lie in `[1 - pd, 1]`; values outside by more than `1e-12`
/// are a domain error, values inside the slack are clamped.
pub fn gamma(p_prev: f64, last_was_detection: bool, params: &BernoulliParams) -> Result<f64> {
    let (r, pd) = (params.r, params.pd);
    if last_was_detection {
        return Ok(1.0 - r * pd);
    }
    let lo = 1.0 - pd;
    if p_prev < lo - 1e-12 || p_prev > 1.0 + 1e-12 {
        return Err(Error::Domain(format!(
            "conditional empty probability {p_prev} outside [{lo}, 1]"
        )));
    }
    let p = p_prev.clamp(lo, 1.0);
    let absent = (p - lo) / (pd * p);
    Ok(1.0 - r * pd + pd * (2.0 * r - 1.0) * absent)
}

impl SequenceLayer {
    /// Layer for the first scan. The prior acts directly: the scan is empty
    /// with probability `1 - b * pd`, and the target is absent jointly with
    /// an empty scan with probability `1 - b`.
    pub fn init(params: &BernoulliParams) -> Result<Self> {
        let p_empty_1 = 1.0 - params.b * params.pd;
        Ok(SequenceLayer {
            k: 1,
            prob: vec![p_empty_1, params.b * params.pd],
            rho: vec![1.0 - params.b, 0.0],
            p_empty_next: vec![gamma(p_empty_1, false, params)?, gamma(0.0, true, params)?],
            dropped_mass: 0.0,
        })
    }

    pub fn n_patterns(&self) -> usize {
        1usize << self.k
    }

    /// Advance every pattern by one scan. Parent `m` spawns the empty child
    /// at code `m` and the detection child at code `m + 2^k`. Parents with
    /// probability below `prune_eps` are dropped: their subtree keeps zero
    /// probability and the lost mass is accounted, never renormalized.
    pub fn advance(&self, params: &BernoulliParams, prune_eps: f64) -> Result<SequenceLayer> {
        assert!(self.k < MAX_SCANS, "advancing past the {MAX_SCANS}-scan cap");
        let n = self.n_patterns();
        let mut prob = vec![0.0; 2 * n];
        let mut rho = vec![0.0; 2 * n];
        let mut p_empty_next = vec![0.0; 2 * n];
        let p_empty_after_detection = gamma(0.0, true, params)?;
        let mut dropped = self.dropped_mass;
        for m in 0..n {
            let parent_prob = self.prob[m];
            let p_e = self.p_empty_next[m];
            if parent_prob < prune_eps {
                dropped += parent_prob;
                p_empty_next[m] = p_empty_after_detection;
                p_empty_next[m + n] = p_empty_after_detection;
                continue;
            }
            let child_empty = parent_prob * p_e;
            prob[m] = child_empty;
            // Exact complement keeps each parent's mass conserved.
            prob[m + n] = parent_prob - child_empty;
            rho[m] = parent_prob * ((p_e - (1.0 - params.pd)) / params.pd);
            rho[m + n] = 0.0;
            p_empty_next[m] = gamma(p_e, false, params)?;
            p_empty_next[m + n] = p_empty_after_detection;
        }
        Ok(SequenceLayer { k: self.k + 1, prob, rho, p_empty_next, dropped_mass: dropped })
    }

    /// Compensated total of retained probability mass plus dropped mass;
    /// equals 1 up to accumulated roundoff.
    pub fn total_mass(&self) -> f64 {
        compensated_sum(self.prob.iter().copied()) + self.dropped_mass
    }
}

/// Exhaustive oracle: recompute layer `k` by enumerating all `2^k` existence
/// histories against all `2^k` detection patterns (`4^k` joint paths).
///
/// Slow by design; capped at `k <= 12`. For patterns of zero probability the
/// conditional `p_empty_next` is undefined and reported as `1 - r * pd`.
pub fn brute_force_layer(k: usize, params: &BernoulliParams) -> SequenceLayer {
    assert!(k >= 1 && k <= 12, "brute force is for k <= 12, got {k}");
    let n = 1usize << k;
    let (b, r, pd) = (params.b, params.r, params.pd);
    let mut prob = vec![0.0; n];
    let mut rho = vec![0.0; n];
    let mut empty_next_joint = vec![0.0; n];
    for code in 0..n {
        let mut p_sum = 0.0;
        let mut rho_sum = 0.0;
        let mut next_sum = 0.0;
        for exist in 0..n {
            // exist bit j: target present at scan j+1.
            let mut p_path = if exist & 1 == 1 { b } else { 1.0 - b };
            for j in 1..k {
                let prev = (exist >> (j - 1)) & 1;
                let cur = (exist >> j) & 1;
                p_path *= if cur == prev { r } else { 1.0 - r };
            }
            let mut p_pattern = 1.0;
            for j in 0..k {
                let present = (exist >> j) & 1 == 1;
                let detected = (code >> j) & 1 == 1;
                p_pattern *= match (present, detected) {
                    (true, true) => pd,
                    (true, false) => 1.0 - pd,
                    (false, true) => 0.0,
                    (false, false) => 1.0,
                };
            }
            let joint = p_path * p_pattern;
            p_sum += joint;
            let present_last = (exist >> (k - 1)) & 1 == 1;
            if !present_last {
                rho_sum += joint;
            }
            // One more transition: next scan empty iff the target is absent
            // then, or present and missed.
            let p_present_next = if present_last { r } else { 1.0 - r };
            next_sum += joint * ((1.0 - p_present_next) + p_present_next * (1.0 - pd));
        }
        prob[code] = p_sum;
        rho[code] = rho_sum;
        empty_next_joint[code] = next_sum;
    }
    let p_empty_next = prob
        .iter()
        .zip(&empty_next_joint)
        .map(|(&p, &j)| if p > 0.0 { j / p } else { 1.0 - r * pd })
        .collect();
    SequenceLayer { k, prob, rho, p_empty_next, dropped_mass: 0.0 }
}
