use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use svcut_core::circuit::BenchmarkSpec;
use svcut_core::cost::advise;
use svcut_core::cutter::{decompose, plan_cut_with, Partition};
use svcut_core::deadline::Deadline;
use svcut_core::harness::experiments::ScanTrial;
use svcut_core::harness::measure::measure_cut;
use svcut_core::harness::{
    breakdown_series, default_grid, depth_sweep, measure_circuit, scan_feasible, split_sweep, sweep_heatmap,
    write_csv, MeasureOptions, ScanOptions, Status, SweepOptions, TimingBreakdown,
};
use svcut_core::pipeline::MergeMode;
use svcut_core::statevec::{simulate_until, SimConfig, DEFAULT_MAX_QUBITS};
use svcut_core::Error;

/// Statevector simulation with circuit cutting.
#[derive(Parser)]
#[command(name = "svcut", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Largest statevector allowed, in qubits.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_QUBITS)]
    guard: usize,
    /// Free-form label stored with sweep results.
    #[arg(long, global = true, env = "SVCUT_MACHINE_TAG")]
    machine_tag: Option<String>,
    /// Timing repetitions per point (1 for single runs, 10 for experiments).
    #[arg(long, global = true)]
    reps: Option<usize>,
    /// Wall-clock budget per run, in seconds.
    #[arg(long, global = true)]
    budget: Option<f64>,
    /// Treat timeouts as failures.
    #[arg(long, global = true)]
    strict: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct CircuitArgs {
    #[arg(long)]
    q: usize,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    blocks: usize,
    /// Pad 10^p gates on the outermost qubits.
    #[arg(long)]
    p: Option<u32>,
}

impl CircuitArgs {
    fn spec(&self) -> BenchmarkSpec {
        BenchmarkSpec {
            q: self.q,
            n: self.n,
            blocks: self.blocks,
            depth_pad_exponent: self.p,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Uncut simulation of the benchmark circuit.
    Simulate {
        #[command(flatten)]
        circuit: CircuitArgs,
        /// Write amplitudes as little-endian f64 (re, im) pairs; stdout if no path.
        #[arg(long, num_args = 0..=1, default_missing_value = "-")]
        dump_state: Option<PathBuf>,
    },
    /// Full cut pipeline with phase timings.
    Cutrun {
        #[command(flatten)]
        circuit: CircuitArgs,
        /// Also run the uncut simulation and report the L-inf error.
        #[arg(long)]
        verify: bool,
        /// Regenerate segment states during the merge instead of keeping them.
        #[arg(long)]
        streaming: bool,
    },
    /// Emit the subcircuit set as JSON.
    Preprocess {
        #[command(flatten)]
        circuit: CircuitArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check whether a cut count is inside the speedup threshold.
    Threshold {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        c: usize,
        #[arg(long, default_value_t = 1.0)]
        depth: f64,
        /// Maximum segment depth (defaults to depth / n).
        #[arg(long)]
        segment_depth: Option<f64>,
    },
    /// Measure the relative change in runtime over a (q, c_total) grid.
    Sweep {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, value_parser = parse_range)]
        q: Option<Range>,
        #[arg(long, value_parser = parse_range)]
        c: Option<Range>,
        #[arg(long)]
        p: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Measure grid points concurrently.
        #[arg(long)]
        parallel_points: bool,
    },
    /// Phase timings over q at a fixed cut count.
    Breakdown {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 6)]
        c: usize,
        #[arg(long, value_parser = parse_range, default_value = "12:22:2")]
        q: Range,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Largest q each pipeline finishes within the budget.
    Feasible {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 6)]
        c: usize,
        /// Padding exponents to scan; unpadded if omitted.
        #[arg(long, value_parser = parse_range)]
        p: Option<Range>,
        #[arg(long)]
        q_limit: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-segment splits [s, q-s] of the staircase.
    Split {
        #[arg(long, default_value_t = 16)]
        q: usize,
        #[arg(long, value_parser = parse_range, default_value = "1:3")]
        c: Range,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Boundary fits at several padding depths.
    Depthsweep {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, value_parser = parse_range, default_value = "0:2")]
        p: Range,
        #[arg(long, value_parser = parse_range)]
        q: Option<Range>,
        #[arg(long, value_parser = parse_range)]
        c: Option<Range>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Debug)]
struct Range(Vec<usize>);

/// `start:stop:step` with inclusive stop, `start:stop`, a single integer,
/// or a comma-separated list of those.
fn parse_range(s: &str) -> Result<Range, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let nums = part
            .split(':')
            .map(|x| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        match nums[..] {
            [v] => out.push(v),
            [a, b] | [a, b, 1] => out.extend(a..=b),
            [_, _, 0] => return Err(format!("{part:?}: step must be positive")),
            [a, b, step] => out.extend((a..=b).step_by(step)),
            _ => return Err(format!("{part:?}: expected start:stop[:step]")),
        }
    }
    if out.is_empty() {
        return Err(format!("{s:?} is an empty range"));
    }
    Ok(Range(out))
}

enum Failure {
    Core(Error),
    TimedOut,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Core(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Core(e.into())
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidCircuit(_)
        | Error::InvalidConfig(_)
        | Error::UnsupportedTopology { .. }
        | Error::DimensionMismatch(_) => 2,
        Error::Capacity { .. } => 3,
        Error::DegenerateFit(_) => 4,
        Error::Timeout => 5,
        _ => 1,
    }
}

struct Ctx {
    g: Global,
}

impl Ctx {
    fn config(&self) -> SimConfig {
        SimConfig::with_max_qubits(self.g.guard)
    }

    fn budget(&self) -> Result<Option<Duration>, Failure> {
        match self.g.budget {
            None => Ok(None),
            Some(s) if s > 0.0 && s.is_finite() => Ok(Some(Duration::from_secs_f64(s))),
            Some(s) => Err(Error::InvalidConfig(format!("budget must be positive, got {s}")).into()),
        }
    }

    fn measure(&self, default_reps: usize) -> Result<MeasureOptions, Failure> {
        Ok(MeasureOptions {
            reps: self.g.reps.unwrap_or(default_reps),
            config: self.config(),
            budget: self.budget()?,
            ..MeasureOptions::default()
        })
    }

    fn sweep(&self, p: Option<u32>, parallel: bool) -> Result<SweepOptions, Failure> {
        Ok(SweepOptions {
            measure: self.measure(10)?,
            depth_pad_exponent: p,
            parallel_points: parallel,
            machine_tag: self.g.machine_tag.clone(),
        })
    }

    /// Fails under `--strict` when any point timed out.
    fn check_points(&self, points: &[TimingBreakdown]) -> Result<(), Failure> {
        if self.g.strict && points.iter().any(|p| p.status == Status::Timeout) {
            return Err(Failure::TimedOut);
        }
        Ok(())
    }
}

fn open_out(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) if p != Path::new("-") => Box::new(BufWriter::new(File::create(p)?)),
        _ => Box::new(BufWriter::new(io::stdout())),
    })
}

fn emit_json<T: serde::Serialize>(value: &T, out: Option<&Path>) -> Result<(), Failure> {
    let mut w = open_out(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn emit_points<T: serde::Serialize>(
    ctx: &Ctx,
    points: &[TimingBreakdown],
    whole: &T,
    out: Option<&Path>,
) -> Result<(), Failure> {
    match ctx.g.format {
        Format::Csv => write_csv(points, open_out(out)?)?,
        Format::Json => emit_json(whole, out)?,
    }
    ctx.check_points(points)
}

fn simulate(ctx: &Ctx, args: &CircuitArgs, dump: Option<&Path>) -> Result<(), Failure> {
    let circuit = args.spec().build()?;
    let deadline = Deadline::from_budget(ctx.budget()?);
    let start = Instant::now();
    let state = match simulate_until(&circuit, &ctx.config(), &deadline) {
        Err(Error::Timeout) if !ctx.g.strict => {
            eprintln!("q={} timed out after {:.3}s", args.q, start.elapsed().as_secs_f64());
            return Ok(());
        }
        r => r?,
    };
    let secs = start.elapsed().as_secs_f64();
    let line = match ctx.g.format {
        Format::Json => json!({"q": args.q, "D": circuit.depth(), "G": circuit.gate_count(), "seconds": secs})
            .to_string(),
        Format::Csv => format!("q,D,G,seconds\n{},{},{},{secs}", args.q, circuit.depth(), circuit.gate_count()),
    };
    match dump {
        Some(p) if p == Path::new("-") => {
            eprintln!("{line}");
            state.write_binary(BufWriter::new(io::stdout().lock()))?;
        }
        Some(p) => {
            println!("{line}");
            state.write_binary(BufWriter::new(File::create(p)?))?;
        }
        None => println!("{line}"),
    }
    Ok(())
}

fn cutrun(ctx: &Ctx, args: &CircuitArgs, verify: bool, streaming: bool) -> Result<(), Failure> {
    let spec = args.spec();
    let circuit = spec.build()?;
    let opts = MeasureOptions {
        verify,
        mode: if streaming { MergeMode::Streaming } else { MergeMode::Retained },
        ..ctx.measure(1)?
    };
    let partition = Partition::equal(spec.q, spec.n)?;
    let result = if verify {
        measure_circuit(&circuit, &partition, &opts)
    } else {
        measure_cut(&circuit, &partition, &opts)
    };
    let b = match result {
        Err(Error::Timeout) if !ctx.g.strict => {
            eprintln!("q={} n={} timed out", spec.q, spec.n);
            return Ok(());
        }
        r => r?,
    };
    match ctx.g.format {
        Format::Json => emit_json(&b, None)?,
        Format::Csv => write_csv(std::slice::from_ref(&b), io::stdout())?,
    }
    if let Some(err) = b.max_error {
        eprintln!("max_error={err:e}");
    }
    Ok(())
}

fn preprocess(args: &CircuitArgs, out: Option<&Path>) -> Result<(), Failure> {
    let spec = args.spec();
    let circuit = spec.build()?;
    let plan = plan_cut_with(&circuit, Partition::equal(spec.q, spec.n)?)?;
    let set = decompose(&circuit, &plan)?;
    let mut w = open_out(out)?;
    writeln!(w, "{}", set.to_json()?)?;
    w.flush()?;
    Ok(())
}

fn run(ctx: &Ctx, command: Command) -> Result<(), Failure> {
    match command {
        Command::Simulate { circuit, dump_state } => simulate(ctx, &circuit, dump_state.as_deref()),
        Command::Cutrun {
            circuit,
            verify,
            streaming,
        } => cutrun(ctx, &circuit, verify, streaming),
        Command::Preprocess { circuit, out } => preprocess(&circuit, out.as_deref()),
        Command::Threshold {
            q,
            n,
            c,
            depth,
            segment_depth,
        } => {
            let advice = advise(q, n, c, depth, segment_depth.unwrap_or(depth / n as f64))?;
            emit_json(&advice, None)
        }
        Command::Sweep {
            n,
            q,
            c,
            p,
            out,
            parallel_points,
        } => {
            let (dq, dc) = default_grid(n);
            let opts = ctx.sweep(p, parallel_points)?;
            let result = sweep_heatmap(&q.map_or(dq, |r| r.0), &c.map_or(dc, |r| r.0), n, &opts)?;
            emit_points(ctx, &result.points, &result, out.as_deref())
        }
        Command::Breakdown { n, c, q, out } => {
            let series = breakdown_series(&q.0, n, c, &ctx.measure(10)?)?;
            emit_points(ctx, &series.points, &series, out.as_deref())
        }
        Command::Feasible {
            n,
            c,
            p,
            q_limit,
            out,
        } => {
            let opts = ScanOptions {
                budget: ctx.budget()?.unwrap_or(Duration::from_secs(3600)),
                n,
                c_total: c,
                config: ctx.config(),
                q_limit,
            };
            let depths: Vec<Option<u32>> = match p {
                None => vec![None],
                Some(ps) => ps.0.into_iter().map(|p| Some(p as u32)).collect(),
            };
            let rows = scan_feasible(&depths, &opts)?;
            match ctx.g.format {
                Format::Json => emit_json(&rows, out.as_deref())?,
                Format::Csv => {
                    let mut w = open_out(out.as_deref())?;
                    writeln!(w, "depth_pad_exponent,pipeline,q,status,seconds")?;
                    for row in &rows {
                        let p = row.depth_pad_exponent.map(|p| p.to_string()).unwrap_or_default();
                        for ScanTrial {
                            pipeline,
                            q,
                            status,
                            seconds,
                        } in &row.trials
                        {
                            let status = serde_json::to_value(status)?;
                            let pipeline = serde_json::to_value(pipeline)?;
                            writeln!(
                                w,
                                "{p},{},{q},{},{seconds}",
                                pipeline.as_str().unwrap_or_default(),
                                status.as_str().unwrap_or_default()
                            )?;
                        }
                    }
                    w.flush()?;
                }
            }
            let timed_out = rows
                .iter()
                .flat_map(|r| &r.trials)
                .any(|t| t.status == Status::Timeout);
            if ctx.g.strict && timed_out {
                return Err(Failure::TimedOut);
            }
            Ok(())
        }
        Command::Split { q, c, out } => {
            let sweep = split_sweep(q, &c.0, &ctx.measure(10)?)?;
            match ctx.g.format {
                Format::Json => emit_json(&sweep, out.as_deref()),
                Format::Csv => {
                    let mut w = open_out(out.as_deref())?;
                    writeln!(w, "q,c_total,split,n_sub,t_cut,t_orig,ratio")?;
                    for s in &sweep.points {
                        writeln!(
                            w,
                            "{q},{},{},{},{},{},{}",
                            s.c_total, s.split, s.n_sub, s.t_cut, s.t_orig, s.ratio
                        )?;
                    }
                    w.flush()?;
                    Ok(())
                }
            }
        }
        Command::Depthsweep { n, p, q, c, out } => {
            let (dq, dc) = default_grid(n);
            let ps: Vec<u32> = p.0.into_iter().map(|p| p as u32).collect();
            let result = depth_sweep(&ps, &q.map_or(dq, |r| r.0), &c.map_or(dc, |r| r.0), n, &ctx.sweep(None, false)?)?;
            let points: Vec<TimingBreakdown> = result
                .fits
                .iter()
                .flat_map(|f| f.sweep.points.iter().cloned())
                .collect();
            emit_points(ctx, &points, &result, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx { g: cli.global };
    match run(&ctx, cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::TimedOut) => {
            eprintln!("error: timed out");
            ExitCode::from(5)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
