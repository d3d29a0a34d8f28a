//! Composite experiments built on [`measure`](super::measure) and sweeps.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::analysis::{detect_crossovers, log2_slope, Crossovers};
use super::measure::{
    mean, measure_cut, measure_orig, measure_point, relative_delta, MeasureOptions, Status,
    TimingBreakdown,
};
use super::svm::{fit_boundary, BoundaryFit};
use super::sweep::{sweep_heatmap, SweepOptions, SweepResult};
use crate::circuit::{staircase, BenchmarkSpec};
use crate::cutter::Partition;
use crate::deadline::Deadline;
use crate::error::{Error, Result};
use crate::pipeline::run_cut;
use crate::statevec::{simulate_until, SimConfig};

fn blocks_for(c_total: usize, n: usize) -> Result<usize> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("n must be at least 2, got {n}")));
    }
    if c_total == 0 || !c_total.is_multiple_of(n - 1) {
        return Err(Error::InvalidConfig(format!(
            "c_total={c_total} is not a positive multiple of n-1={}",
            n - 1
        )));
    }
    Ok(c_total / (n - 1))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BreakdownSeries {
    pub n: usize,
    pub c_total: usize,
    pub points: Vec<TimingBreakdown>,
    pub crossovers: Crossovers,
    /// Slope of log2(t_merge) against q.
    pub merge_slope: Option<f64>,
}

/// Phase timings over increasing q at fixed `(n, c_total)`.
pub fn breakdown_series(
    q_values: &[usize],
    n: usize,
    c_total: usize,
    opts: &MeasureOptions,
) -> Result<BreakdownSeries> {
    let blocks = blocks_for(c_total, n)?;
    let mut qs = q_values.to_vec();
    qs.sort_unstable();
    qs.dedup();
    let points = qs
        .iter()
        .map(|&q| measure_point(&BenchmarkSpec::new(q, n, blocks), opts))
        .collect::<Result<Vec<_>>>()?;
    let merge: Vec<_> = points
        .iter()
        .filter(|p| p.is_ok())
        .map(|p| (p.q as f64, p.t_merge))
        .collect();
    Ok(BreakdownSeries {
        n,
        c_total,
        crossovers: detect_crossovers(&points),
        merge_slope: log2_slope(&merge),
        points,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    Orig,
    Cut,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanTrial {
    pub pipeline: Pipeline,
    pub q: usize,
    pub status: Status,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub depth_pad_exponent: Option<u32>,
    pub q_max_orig: Option<usize>,
    pub q_max_cut: Option<usize>,
    /// Every run attempted, in order.
    pub trials: Vec<ScanTrial>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanOptions {
    pub budget: Duration,
    pub n: usize,
    pub c_total: usize,
    pub config: SimConfig,
    /// Stop after this q even if runs still fit in the budget.
    pub q_limit: Option<usize>,
}

fn scan_pipeline(
    pipeline: Pipeline,
    depth: Option<u32>,
    blocks: usize,
    opts: &ScanOptions,
    trials: &mut Vec<ScanTrial>,
) -> Result<Option<usize>> {
    let n = opts.n;
    let mut best = None;
    let mut q = n.max(2).div_ceil(n) * n;
    while opts.q_limit.is_none_or(|lim| q <= lim) {
        let mut spec = BenchmarkSpec::new(q, n, blocks);
        spec.depth_pad_exponent = depth;
        let circuit = spec.build()?;
        let deadline = Deadline::after(opts.budget);
        let start = Instant::now();
        let outcome = match pipeline {
            Pipeline::Orig => simulate_until(&circuit, &opts.config, &deadline).map(drop),
            Pipeline::Cut => run_cut(
                &circuit,
                Partition::equal(q, n)?,
                &opts.config,
                Default::default(),
                &deadline,
            )
            .map(drop),
        };
        let seconds = start.elapsed().as_secs_f64();
        let status = match outcome {
            Ok(()) if seconds <= opts.budget.as_secs_f64() => Status::Ok,
            Ok(()) => Status::Timeout,
            Err(e) => match Status::from_error(&e) {
                Some(Status::Skipped) | None => return Err(e),
                Some(s) => s,
            },
        };
        trials.push(ScanTrial {
            pipeline,
            q,
            status,
            seconds,
        });
        if status != Status::Ok {
            break;
        }
        best = Some(q);
        q += n;
    }
    Ok(best)
}

/// Largest q completing within the budget, per padding depth, for both pipelines.
///
/// q increases in steps of `n` until a run times out or hits the memory guard.
pub fn scan_feasible(depths: &[Option<u32>], opts: &ScanOptions) -> Result<Vec<ScanRow>> {
    if opts.budget.is_zero() {
        return Err(Error::InvalidConfig("budget must be positive".into()));
    }
    let blocks = blocks_for(opts.c_total, opts.n)?;
    depths
        .iter()
        .map(|&depth| {
            let mut trials = Vec::new();
            let q_max_orig = scan_pipeline(Pipeline::Orig, depth, blocks, opts, &mut trials)?;
            let q_max_cut = scan_pipeline(Pipeline::Cut, depth, blocks, opts, &mut trials)?;
            Ok(ScanRow {
                depth_pad_exponent: depth,
                q_max_orig,
                q_max_cut,
                trials,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitPoint {
    pub c_total: usize,
    /// Size of the low-qubit segment.
    pub split: usize,
    pub n_sub: usize,
    pub t_cut: f64,
    pub t_orig: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSweep {
    pub q: usize,
    pub points: Vec<SplitPoint>,
    /// `(c_total, split)` minimizing T_cut/T_orig for each cut count.
    pub minima: Vec<(usize, usize)>,
}

impl SplitSweep {
    pub fn minimum(&self, c_total: usize) -> Option<usize> {
        self.minima.iter().find(|m| m.0 == c_total).map(|m| m.1)
    }
}

/// Sweeps the bipartition point `s = 1..q-1` for each cut count.
/// The uncut baseline is measured once per cut count.
pub fn split_sweep(q: usize, c_values: &[usize], opts: &MeasureOptions) -> Result<SplitSweep> {
    if q < 2 || !q.is_multiple_of(2) {
        return Err(Error::InvalidConfig(format!("q must be even and at least 2, got {q}")));
    }
    let mut points = Vec::new();
    let mut minima = Vec::new();
    for &c in c_values {
        let circuit = staircase(q, c)?;
        let t_orig = mean(&measure_orig(&circuit, opts)?);
        let mut best: Option<(f64, usize)> = None;
        for s in 1..q {
            let partition = Partition::from_sizes(vec![s, q - s])?;
            let b = match measure_cut(&circuit, &partition, opts) {
                Ok(b) => b,
                Err(e) if Status::from_error(&e).is_some() => continue,
                Err(e) => return Err(e),
            };
            let ratio = b.t_cut / t_orig;
            if best.is_none_or(|(r, _)| ratio < r) {
                best = Some((ratio, s));
            }
            points.push(SplitPoint {
                c_total: c,
                split: s,
                n_sub: b.n_sub,
                t_cut: b.t_cut,
                t_orig,
                ratio,
            });
        }
        if let Some((_, s)) = best {
            minima.push((c, s));
        }
    }
    Ok(SplitSweep { q, points, minima })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthFit {
    pub depth_pad_exponent: u32,
    pub fit: BoundaryFit,
    pub sweep: SweepResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeDiff {
    pub p_a: u32,
    pub p_b: u32,
    pub diff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthSweep {
    pub fits: Vec<DepthFit>,
    pub slope_diffs: Vec<SlopeDiff>,
}

/// Runs the heatmap on padded circuits for each `p` and fits each boundary.
pub fn depth_sweep(
    p_values: &[u32],
    q_values: &[usize],
    c_values: &[usize],
    n: usize,
    opts: &SweepOptions,
) -> Result<DepthSweep> {
    let fits = p_values
        .iter()
        .map(|&p| {
            let o = SweepOptions {
                depth_pad_exponent: Some(p),
                ..opts.clone()
            };
            let sweep = sweep_heatmap(q_values, c_values, n, &o)?;
            Ok(DepthFit {
                depth_pad_exponent: p,
                fit: fit_boundary(&sweep)?,
                sweep,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut slope_diffs = Vec::new();
    for (i, a) in fits.iter().enumerate() {
        for b in &fits[i + 1..] {
            slope_diffs.push(SlopeDiff {
                p_a: a.depth_pad_exponent,
                p_b: b.depth_pad_exponent,
                diff: b.fit.slope - a.fit.slope,
            });
        }
    }
    Ok(DepthSweep { fits, slope_diffs })
}

/// Timings of one `(q, n, c_total)` point at each padding depth.
pub fn depth_response(
    q: usize,
    n: usize,
    c_total: usize,
    p_values: &[u32],
    opts: &MeasureOptions,
) -> Result<Vec<TimingBreakdown>> {
    let blocks = blocks_for(c_total, n)?;
    p_values
        .iter()
        .map(|&p| measure_point(&BenchmarkSpec::new(q, n, blocks).with_padding(p), opts))
        .collect()
}

/// Relative change `(b - a) / a`.
pub fn relative_change(a: f64, b: f64) -> f64 {
    relative_delta(b, a)
}
