//! (q, c_total) grid sweeps and their CSV form.

use std::io::{Read, Write};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::measure::{measure_point, MeasureOptions, PhaseSamples, Status, TimingBreakdown};
use crate::circuit::BenchmarkSpec;
use crate::error::{Error, Result};

pub const SWEEP_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Default)]
pub struct SweepOptions {
    pub measure: MeasureOptions,
    pub depth_pad_exponent: Option<u32>,
    /// Measure different grid points concurrently. Results are marked contended.
    pub parallel_points: bool,
    pub machine_tag: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub schema_version: u32,
    pub n: usize,
    pub reps: usize,
    /// Seconds since the Unix epoch at sweep start.
    pub timestamp: u64,
    pub machine_tag: Option<String>,
    pub contended: bool,
    pub depth_pad_exponent: Option<u32>,
    pub points: Vec<TimingBreakdown>,
}

impl SweepResult {
    pub fn point(&self, q: usize, c_total: usize) -> Option<&TimingBreakdown> {
        self.points.iter().find(|p| p.q == q && p.c_total == c_total)
    }
}

/// Grids scaled down to desk limits.
pub fn default_grid(n: usize) -> (Vec<usize>, Vec<usize>) {
    match n {
        2 => ((2..=20).step_by(2).collect(), (1..=10).collect()),
        3 => ((3..=18).step_by(3).collect(), (2..=12).step_by(2).collect()),
        _ => (
            (n..=20).step_by(n.max(1)).collect(),
            (1..=5).map(|b| b * n.saturating_sub(1)).collect(),
        ),
    }
}

fn unique_sorted(xs: &[usize]) -> Vec<usize> {
    let mut v = xs.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

fn now_secs() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

fn sweep_point(q: usize, c: usize, n: usize, opts: &SweepOptions) -> Result<TimingBreakdown> {
    let per_block = n - 1;
    if !c.is_multiple_of(per_block) || c == 0 {
        return Ok(TimingBreakdown::failed(q, n, c, None, Status::Skipped));
    }
    let mut spec = BenchmarkSpec::new(q, n, c / per_block);
    spec.depth_pad_exponent = opts.depth_pad_exponent;
    let mut point = measure_point(&spec, &opts.measure)?;
    point.c_total = c;
    Ok(point)
}

/// Measures Δ on every `(q, c_total)` grid point.
///
/// Points whose `c_total` is not a multiple of `n - 1` or whose `q` is not
/// divisible by `n` are recorded as skipped; timeouts and capacity failures
/// are recorded in the status column.
pub fn sweep_heatmap(
    q_values: &[usize],
    c_values: &[usize],
    n: usize,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("n must be at least 2, got {n}")));
    }
    let grid: Vec<(usize, usize)> = unique_sorted(q_values)
        .into_iter()
        .flat_map(|q| unique_sorted(c_values).into_iter().map(move |c| (q, c)))
        .collect();
    let timestamp = now_secs();
    let points = if opts.parallel_points {
        grid.par_iter()
            .map(|&(q, c)| sweep_point(q, c, n, opts))
            .collect::<Result<Vec<_>>>()?
    } else {
        grid.iter()
            .map(|&(q, c)| sweep_point(q, c, n, opts))
            .collect::<Result<Vec<_>>>()?
    };
    Ok(SweepResult {
        schema_version: SWEEP_SCHEMA_VERSION,
        n,
        reps: opts.measure.reps,
        timestamp,
        machine_tag: opts.machine_tag.clone(),
        contended: opts.parallel_points,
        depth_pad_exponent: opts.depth_pad_exponent,
        points,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    q: usize,
    n: usize,
    c_total: usize,
    #[serde(rename = "D")]
    depth: usize,
    #[serde(rename = "G")]
    gates: usize,
    t_pre: f64,
    t_sub: f64,
    t_merge: f64,
    t_cut: f64,
    t_orig: f64,
    delta: f64,
    reps: usize,
    status: Status,
    schema_version: u32,
}

pub fn write_csv<W: Write>(points: &[TimingBreakdown], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(CsvRow {
            q: p.q,
            n: p.n,
            c_total: p.c_total,
            depth: p.depth,
            gates: p.gates,
            t_pre: p.t_pre,
            t_sub: p.t_sub,
            t_merge: p.t_merge,
            t_cut: p.t_cut,
            t_orig: p.t_orig,
            delta: p.delta,
            reps: p.reps,
            status: p.status,
            schema_version: SWEEP_SCHEMA_VERSION,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads rows written by [`write_csv`]; standard deviations and samples are not stored.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<TimingBreakdown>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in r.deserialize() {
        let row: CsvRow = row?;
        if row.schema_version != SWEEP_SCHEMA_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported CSV schema version {}",
                row.schema_version
            )));
        }
        let nan = f64::NAN;
        out.push(TimingBreakdown {
            q: row.q,
            n: row.n,
            c_total: row.c_total,
            depth: row.depth,
            gates: row.gates,
            n_sub: 0,
            t_pre: row.t_pre,
            t_sub: row.t_sub,
            t_merge: row.t_merge,
            t_cut: row.t_cut,
            t_orig: row.t_orig,
            sd_pre: nan,
            sd_sub: nan,
            sd_merge: nan,
            sd_cut: nan,
            sd_orig: nan,
            delta: row.delta,
            reps: row.reps,
            status: row.status,
            max_error: None,
            samples: PhaseSamples::default(),
        });
    }
    Ok(out)
}
