//! Repeated, phase-timed runs of the uncut and cut pipelines.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::circuit::{BenchmarkSpec, Circuit};
use crate::cutter::Partition;
use crate::deadline::Deadline;
use crate::error::{Error, Result};
use crate::pipeline::{run_cut, MergeMode};
use crate::statevec::{simulate_until, SimConfig};
use crate::timing::timed;

pub const DEFAULT_REPETITIONS: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct MeasureOptions {
    pub reps: usize,
    pub config: SimConfig,
    /// Per-run wall-clock budget; exceeding it aborts with a timeout.
    pub budget: Option<Duration>,
    pub mode: MergeMode,
    /// Compare the first merged state with the uncut state.
    pub verify: bool,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        MeasureOptions {
            reps: DEFAULT_REPETITIONS,
            config: SimConfig::default(),
            budget: None,
            mode: MergeMode::Retained,
            verify: false,
        }
    }
}

impl MeasureOptions {
    pub fn with_reps(reps: usize) -> Self {
        MeasureOptions {
            reps,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidConfig("repetitions must be at least 1".into()));
        }
        if self.budget == Some(Duration::ZERO) {
            return Err(Error::InvalidConfig("budget must be positive".into()));
        }
        Ok(())
    }

    fn deadline(&self) -> Deadline {
        Deadline::from_budget(self.budget)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Timeout,
    Capacity,
    Skipped,
}

impl Status {
    /// Status recorded for a point that failed with `err`, if the failure is data.
    pub fn from_error(err: &Error) -> Option<Status> {
        match err {
            Error::Timeout => Some(Status::Timeout),
            Error::Capacity { .. } => Some(Status::Capacity),
            Error::InvalidConfig(_) | Error::UnsupportedTopology { .. } => Some(Status::Skipped),
            _ => None,
        }
    }
}

/// Per-repetition wall times in seconds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseSamples {
    pub pre: Vec<f64>,
    pub sub: Vec<f64>,
    pub merge: Vec<f64>,
    pub cut: Vec<f64>,
    pub orig: Vec<f64>,
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation; zero for fewer than two samples.
pub fn stddev(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

pub fn relative_delta(t_cut: f64, t_orig: f64) -> f64 {
    (t_cut - t_orig) / t_orig
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingBreakdown {
    pub q: usize,
    pub n: usize,
    pub c_total: usize,
    #[serde(rename = "D")]
    pub depth: usize,
    #[serde(rename = "G")]
    pub gates: usize,
    pub n_sub: usize,
    pub t_pre: f64,
    pub t_sub: f64,
    pub t_merge: f64,
    pub t_cut: f64,
    pub t_orig: f64,
    pub sd_pre: f64,
    pub sd_sub: f64,
    pub sd_merge: f64,
    pub sd_cut: f64,
    pub sd_orig: f64,
    pub delta: f64,
    pub reps: usize,
    pub status: Status,
    /// L∞ distance between merged and uncut states, when verified.
    pub max_error: Option<f64>,
    #[serde(default)]
    pub samples: PhaseSamples,
}

impl TimingBreakdown {
    /// A point that produced no timings.
    pub fn failed(q: usize, n: usize, c_total: usize, circuit: Option<&Circuit>, status: Status) -> Self {
        let nan = f64::NAN;
        TimingBreakdown {
            q,
            n,
            c_total,
            depth: circuit.map_or(0, Circuit::depth),
            gates: circuit.map_or(0, Circuit::gate_count),
            n_sub: 0,
            t_pre: nan,
            t_sub: nan,
            t_merge: nan,
            t_cut: nan,
            t_orig: nan,
            sd_pre: nan,
            sd_sub: nan,
            sd_merge: nan,
            sd_cut: nan,
            sd_orig: nan,
            delta: nan,
            reps: 0,
            status,
            max_error: None,
            samples: PhaseSamples::default(),
        }
    }

    fn from_samples(
        circuit: &Circuit,
        n: usize,
        c_total: usize,
        n_sub: usize,
        samples: PhaseSamples,
        max_error: Option<f64>,
    ) -> Self {
        let t_cut = mean(&samples.cut);
        let t_orig = mean(&samples.orig);
        TimingBreakdown {
            q: circuit.num_qubits(),
            n,
            c_total,
            depth: circuit.depth(),
            gates: circuit.gate_count(),
            n_sub,
            t_pre: mean(&samples.pre),
            t_sub: mean(&samples.sub),
            t_merge: mean(&samples.merge),
            t_cut,
            t_orig,
            sd_pre: stddev(&samples.pre),
            sd_sub: stddev(&samples.sub),
            sd_merge: stddev(&samples.merge),
            sd_cut: stddev(&samples.cut),
            sd_orig: stddev(&samples.orig),
            delta: relative_delta(t_cut, t_orig),
            reps: samples.cut.len(),
            status: Status::Ok,
            max_error,
            samples,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok
    }

    /// `(t_cut, t_orig, delta)` with the first repetition dropped as warm-up.
    pub fn without_warmup(&self) -> Option<(f64, f64, f64)> {
        let s = &self.samples;
        if s.cut.len() < 2 || s.orig.len() < 2 {
            return None;
        }
        let cut = mean(&s.cut[1..]);
        let orig = mean(&s.orig[1..]);
        Some((cut, orig, relative_delta(cut, orig)))
    }
}

/// Times the uncut simulation `opts.reps` times.
pub fn measure_orig(circuit: &Circuit, opts: &MeasureOptions) -> Result<Vec<f64>> {
    opts.validate()?;
    opts.config.check(circuit.num_qubits())?;
    let mut out = Vec::with_capacity(opts.reps);
    for _ in 0..opts.reps {
        let deadline = opts.deadline();
        let mut d = Duration::ZERO;
        let state = timed(&mut d, || simulate_until(circuit, &opts.config, &deadline))?;
        drop(state);
        out.push(d.as_secs_f64());
    }
    Ok(out)
}

fn run_reps(
    circuit: &Circuit,
    partition: &Partition,
    opts: &MeasureOptions,
    with_orig: bool,
) -> Result<TimingBreakdown> {
    opts.validate()?;
    opts.config.check(circuit.num_qubits())?;
    let mut samples = PhaseSamples::default();
    let mut max_error = None;
    let mut info = (0, 0);
    for rep in 0..opts.reps {
        let mut oracle = None;
        if with_orig {
            let deadline = opts.deadline();
            let mut d = Duration::ZERO;
            let state = timed(&mut d, || simulate_until(circuit, &opts.config, &deadline))?;
            samples.orig.push(d.as_secs_f64());
            if opts.verify && rep == 0 {
                oracle = Some(state);
            }
        }
        let deadline = opts.deadline();
        let run = run_cut(circuit, partition.clone(), &opts.config, opts.mode, &deadline)?;
        if let Some(o) = oracle {
            max_error = Some(run.state.max_abs_diff(&o)?);
        }
        samples.pre.push(run.times.pre.as_secs_f64());
        samples.sub.push(run.times.sub.as_secs_f64());
        samples.merge.push(run.times.merge.as_secs_f64());
        samples.cut.push(run.times.total().as_secs_f64());
        info = (run.plan.c_total(), run.n_sub);
    }
    Ok(TimingBreakdown::from_samples(
        circuit,
        partition.num_segments(),
        info.0,
        info.1,
        samples,
        max_error,
    ))
}

/// Times the cut pipeline and the uncut baseline on an arbitrary partition.
pub fn measure_circuit(
    circuit: &Circuit,
    partition: &Partition,
    opts: &MeasureOptions,
) -> Result<TimingBreakdown> {
    run_reps(circuit, partition, opts, true)
}

/// Times the cut pipeline only; `t_orig` and `delta` are NaN.
pub fn measure_cut(
    circuit: &Circuit,
    partition: &Partition,
    opts: &MeasureOptions,
) -> Result<TimingBreakdown> {
    run_reps(circuit, partition, opts, false)
}

/// Times one benchmark configuration under equal partitioning.
pub fn measure(spec: &BenchmarkSpec, opts: &MeasureOptions) -> Result<TimingBreakdown> {
    let circuit = spec.build()?;
    let partition = Partition::equal(spec.q, spec.n)?;
    measure_circuit(&circuit, &partition, opts)
}

/// Like [`measure`], but folds timeouts, capacity and validation failures into the status.
pub fn measure_point(spec: &BenchmarkSpec, opts: &MeasureOptions) -> Result<TimingBreakdown> {
    let circuit = spec.build();
    let failed = |status| {
        TimingBreakdown::failed(spec.q, spec.n, spec.blocks * spec.n.saturating_sub(1), circuit.as_ref().ok(), status)
    };
    match measure(spec, opts) {
        Ok(b) => Ok(b),
        Err(e) => match Status::from_error(&e) {
            Some(status) => Ok(failed(status)),
            None => Err(e),
        },
    }
}
