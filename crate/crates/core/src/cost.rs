//! Closed-form cost model and cut-threshold advisor.
//!
//! Costs are unit-free scalings of the three cut phases for equal
//! partitioning. Thresholds compare subcircuit simulation against the
//! uncut simulation only; merging is left to measurement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Schmidt rank of CZ/CX. Formulas below that take `k` are written for
/// general rank but only rank 2 is exercised.
pub const SCHMIDT_RANK_CZ: u32 = 2;

/// Cutoffs around 1 for the subcircuit/merge ratio.
const MERGE_DOMINANT_BELOW: f64 = 0.5;
const SUB_DOMINANT_ABOVE: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    pub q: usize,
    pub n: usize,
    pub cuts_per_boundary: Vec<usize>,
    pub schmidt_rank: u32,
    /// Depth of the original circuit.
    pub depth: f64,
    /// Maximum segment depth.
    pub segment_depth: f64,
}

fn check_segments(q: usize, n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("n must be at least 2, got {n}")));
    }
    if n > q {
        return Err(Error::InvalidConfig(format!("n={n} exceeds q={q}")));
    }
    if !q.is_multiple_of(n) {
        return Err(Error::InvalidConfig(format!(
            "q={q} is not divisible by n={n}"
        )));
    }
    Ok(())
}

impl CostParams {
    /// `c` cuts on every boundary.
    pub fn uniform(q: usize, n: usize, c: usize, depth: f64, segment_depth: f64) -> Result<Self> {
        Self::new(q, n, vec![c; n.saturating_sub(1)], depth, segment_depth)
    }

    pub fn new(
        q: usize,
        n: usize,
        cuts_per_boundary: Vec<usize>,
        depth: f64,
        segment_depth: f64,
    ) -> Result<Self> {
        let params = CostParams {
            q,
            n,
            cuts_per_boundary,
            schmidt_rank: SCHMIDT_RANK_CZ,
            depth,
            segment_depth,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        check_segments(self.q, self.n)?;
        if self.cuts_per_boundary.len() != self.n - 1 {
            return Err(Error::InvalidConfig(format!(
                "{} boundary cut counts for {} segments",
                self.cuts_per_boundary.len(),
                self.n
            )));
        }
        if !(self.depth > 0.0 && self.depth.is_finite()) {
            return Err(Error::InvalidConfig("depth must be positive".into()));
        }
        let lo = self.depth / self.n as f64;
        let slack = 1e-9 * self.depth;
        if self.segment_depth < lo - slack || self.segment_depth > self.depth + slack {
            return Err(Error::InvalidConfig(format!(
                "segment depth {} outside [D/n, D] = [{lo}, {}]",
                self.segment_depth, self.depth
            )));
        }
        Ok(())
    }

    pub fn c_total(&self) -> usize {
        self.cuts_per_boundary.iter().sum()
    }

    /// Cuts adjacent to each segment.
    pub fn c_per_segment(&self) -> Vec<usize> {
        (0..self.n)
            .map(|i| {
                let left = if i > 0 { self.cuts_per_boundary[i - 1] } else { 0 };
                let right = self.cuts_per_boundary.get(i).copied().unwrap_or(0);
                left + right
            })
            .collect()
    }

    pub fn c_max(&self) -> usize {
        self.c_per_segment().into_iter().max().unwrap_or(0)
    }

    /// N_sub = Σ_i k^{c_i}.
    pub fn n_sub(&self) -> f64 {
        let k = self.schmidt_rank as f64;
        self.c_per_segment().iter().map(|&c| k.powi(c as i32)).sum()
    }

    fn segment_qubits(&self) -> f64 {
        self.q as f64 / self.n as f64
    }

    /// q(1 - 1/n)
    fn complement_qubits(&self) -> f64 {
        self.q as f64 - self.segment_qubits()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    SubDominant,
    MergeDominant,
    Comparable,
}

impl Regime {
    pub fn classify(sub_merge_ratio: f64) -> Self {
        if sub_merge_ratio < MERGE_DOMINANT_BELOW {
            Regime::MergeDominant
        } else if sub_merge_ratio > SUB_DOMINANT_ABOVE {
            Regime::SubDominant
        } else {
            Regime::Comparable
        }
    }
}

/// Threshold line `c_total < slope * q + delta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub q: usize,
    pub n: usize,
    pub slope: f64,
    pub delta: f64,
    pub c_total_max: f64,
}

impl ThresholdReport {
    /// Strict comparison against the threshold.
    pub fn satisfied(&self, c_total: usize) -> bool {
        (c_total as f64) < self.c_total_max
    }
}

fn uniform_line(n: usize) -> (f64, f64) {
    if n == 2 {
        (0.5, 0.0)
    } else {
        let nf = n as f64;
        let slope = (nf - 1.0).powi(2) / (2.0 * nf);
        let delta = (nf - 1.0) * (nf / (nf - 2.0)).log2() / 2.0;
        (slope, delta)
    }
}

/// `(slope, delta)` of the uniform threshold line for `n` segments.
pub fn threshold_line(n: usize) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("n must be at least 2, got {n}")));
    }
    Ok(uniform_line(n))
}

/// Subcircuit-simulation threshold under uniform gate distribution
/// (`D_seg = D/n`). Depth does not enter.
pub fn threshold_uniform(q: usize, n: usize) -> Result<ThresholdReport> {
    check_segments(q, n)?;
    let (slope, delta) = uniform_line(n);
    Ok(ThresholdReport {
        q,
        n,
        slope,
        delta,
        c_total_max: slope * q as f64 + delta,
    })
}

/// Threshold when segments have depth `segment_depth_ratio · D`.
///
/// The ratio lies in `[1/n, 1]`; at `1/n` this equals [`threshold_uniform`].
/// For `n >= 3` the interior-segment approximation of N_sub is used.
pub fn threshold_for_depth_ratio(
    q: usize,
    n: usize,
    segment_depth_ratio: f64,
) -> Result<ThresholdReport> {
    let uniform = threshold_uniform(q, n)?;
    let nf = n as f64;
    if !(segment_depth_ratio >= 1.0 / nf - 1e-12 && segment_depth_ratio <= 1.0 + 1e-12) {
        return Err(Error::InvalidConfig(format!(
            "segment depth ratio {segment_depth_ratio} outside [1/n, 1]"
        )));
    }
    // Shift relative to the uniform case: log2(D/D_seg) replaces log2(n).
    let gain = (1.0 / segment_depth_ratio).log2() - nf.log2();
    let shift = if n == 2 { gain } else { (nf - 1.0) / 2.0 * gain };
    Ok(ThresholdReport {
        delta: uniform.delta + shift,
        c_total_max: uniform.c_total_max + shift,
        ..uniform
    })
}

/// `(N_sub / 2^{q(1-1/n)}) · (D_seg / D) < 1`.
pub fn threshold_nonuniform(params: &CostParams, n_sub: usize) -> bool {
    let lhs = (n_sub as f64).log2() - params.complement_qubits()
        + (params.segment_depth / params.depth).log2();
    lhs < 0.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeRatios {
    pub pre_sub: f64,
    pub pre_merge: f64,
    pub sub_merge: f64,
    pub regime: Regime,
}

pub fn regime_ratios(params: &CostParams) -> RegimeRatios {
    let k = params.schmidt_rank as f64;
    let d = params.depth;
    let d_seg = params.segment_depth;
    let spread = params.n_sub() / k.powi(params.c_max() as i32);
    let pre_sub = d / (params.segment_qubits().exp2() * d_seg);
    let pre_merge = spread * d / (params.q as f64).exp2();
    let sub_merge = spread * d_seg / params.complement_qubits().exp2();
    RegimeRatios {
        pre_sub,
        pre_merge,
        sub_merge,
        regime: Regime::classify(sub_merge),
    }
}

/// Unit-free phase costs (pre, sub, merge).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostPrediction {
    pub pre: f64,
    pub sub: f64,
    pub merge: f64,
}

pub fn predict_costs(params: &CostParams, n_sub: usize) -> CostPrediction {
    let n_sub = n_sub as f64;
    let k = params.schmidt_rank as f64;
    CostPrediction {
        pre: n_sub * params.depth,
        sub: n_sub * params.segment_qubits().exp2() * params.segment_depth,
        merge: k.powi(params.c_max() as i32) * (params.q as f64).exp2(),
    }
}

/// Threshold verdict for one `(q, n, c_total)` plus the predicted regime.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Advice {
    pub schema_version: u32,
    pub q: usize,
    pub n: usize,
    pub c_total: usize,
    pub c_total_max: f64,
    pub slope: f64,
    pub delta: f64,
    pub satisfied: bool,
    pub regime: Regime,
}

pub const ADVICE_SCHEMA_VERSION: u32 = 1;

/// Spreads `c_total` over the `n-1` boundaries as evenly as possible.
pub fn spread_cuts(c_total: usize, n: usize) -> Vec<usize> {
    let boundaries = n.saturating_sub(1).max(1);
    let base = c_total / boundaries;
    let extra = c_total % boundaries;
    (0..boundaries).map(|b| base + usize::from(b < extra)).collect()
}

/// Threshold check with the regime evaluated at `depth`/`segment_depth`.
pub fn advise(
    q: usize,
    n: usize,
    c_total: usize,
    depth: f64,
    segment_depth: f64,
) -> Result<Advice> {
    let report = threshold_uniform(q, n)?;
    let params = CostParams::new(q, n, spread_cuts(c_total, n), depth, segment_depth)?;
    Ok(Advice {
        schema_version: ADVICE_SCHEMA_VERSION,
        q,
        n,
        c_total,
        c_total_max: report.c_total_max,
        slope: report.slope,
        delta: report.delta,
        satisfied: report.satisfied(c_total),
        regime: regime_ratios(&params).regime,
    })
}
