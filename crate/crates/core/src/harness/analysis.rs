//! Crossover detection and log-scale slope fits on measured series.

use serde::{Deserialize, Serialize};

use super::measure::TimingBreakdown;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Crossovers {
    /// Smallest q with t_merge > t_pre.
    pub q_pre_cross: Option<usize>,
    /// Smallest q with t_merge > t_sub.
    pub q_sub_cross: Option<usize>,
}

/// Finds where merging overtakes preprocessing and subcircuit simulation.
/// Points that did not complete are ignored.
pub fn detect_crossovers(series: &[TimingBreakdown]) -> Crossovers {
    let mut pts: Vec<&TimingBreakdown> = series.iter().filter(|b| b.is_ok()).collect();
    pts.sort_by_key(|b| b.q);
    let first = |pred: &dyn Fn(&TimingBreakdown) -> bool| pts.iter().find(|b| pred(b)).map(|b| b.q);
    Crossovers {
        q_pre_cross: first(&|b| b.t_merge > b.t_pre),
        q_sub_cross: first(&|b| b.t_merge > b.t_sub),
    }
}

/// Ordinary least-squares slope of `log2(y)` against `x`.
/// Returns `None` with fewer than two distinct x values or a non-positive y.
pub fn log2_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|&(_, y)| !(y > 0.0) || !y.is_finite()) {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let ly: Vec<f64> = points.iter().map(|p| p.1.log2()).collect();
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().zip(&ly).map(|(p, y)| (p.0 - mx) * (y - my)).sum();
    Some(sxy / sxx)
}
