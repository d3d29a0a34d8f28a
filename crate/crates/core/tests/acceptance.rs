//! End-to-end acceptance checks. Runs sequentially in one process so that
//! wall-clock measurements do not compete with each other.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use svcut_core::circuit::{BenchmarkSpec, Circuit, Gate};
use svcut_core::cost::threshold_uniform;
use svcut_core::cutter::{
    cut_coefficient, decompose, plan_cut, term_coefficients, Partition,
};
use svcut_core::harness::experiments::{depth_response, Pipeline};
use svcut_core::harness::measure::measure_cut;
use svcut_core::harness::{
    detect_crossovers, fit_points, log2_slope, measure, relative_change, scan_feasible,
    split_sweep, training_points, MeasureOptions, ScanOptions, Status, SvmOptions,
};
use svcut_core::pipeline::{run_cut, MergeMode};
use svcut_core::statevec::{simulate, SimConfig};
use svcut_core::Result;

type Outcome = Result<(bool, String)>;
type Criterion = (&'static str, fn() -> Outcome);

fn exact_reconstruction() -> Outcome {
    let cfg = SimConfig::default();
    let mut worst = 0.0f64;
    let mut count = 0;
    for q in 4..=16 {
        for n in [2, 3, 4] {
            if q % n != 0 {
                continue;
            }
            for blocks in 1..=4 {
                let circuit = BenchmarkSpec::new(q, n, blocks).build()?;
                let oracle = simulate(&circuit, &cfg)?;
                let run = run_cut(
                    &circuit,
                    Partition::equal(q, n)?,
                    &cfg,
                    MergeMode::Retained,
                    &Default::default(),
                )?;
                worst = worst.max(run.state.max_abs_diff(&oracle)?);
                count += 1;
            }
        }
    }
    Ok((worst < 1e-10, format!("{count} configurations, max L-inf error {worst:.3e}")))
}

fn threshold_formulas() -> Outcome {
    let expected = [
        (2, 24, 0.5, 0.0),
        (3, 24, 2.0 / 3.0, 3f64.log2()),
        (4, 16, 9.0 / 8.0, 1.5),
    ];
    let mut ok = true;
    for (n, q, slope, delta) in expected {
        let t = threshold_uniform(q, n)?;
        ok &= (t.slope - slope).abs() <= f64::EPSILON * 4.0;
        ok &= (t.delta - delta).abs() <= f64::EPSILON * 4.0;
    }
    let two = threshold_uniform(24, 2)?.c_total_max;
    let three = threshold_uniform(24, 3)?.c_total_max;
    ok &= two == 12.0;
    ok &= (three - 17.585).abs() < 5e-4;
    Ok((ok, format!("c_max(24,2)={two}, c_max(24,3)={three:.5}")))
}

/// Circuit on `2n` qubits with `cuts[b]` CX gates across boundary `b`.
fn cut_pattern(cuts: &[usize]) -> Circuit {
    let n = cuts.len() + 1;
    let mut c = Circuit::new(2 * n);
    for (b, &k) in cuts.iter().enumerate() {
        for _ in 0..k {
            c.push(Gate::cx(2 * b + 1, 2 * b + 2)).unwrap();
        }
    }
    c
}

fn subcircuit_count() -> Outcome {
    let mut checked = 0;
    for n in 2..=4usize {
        let boundaries = n - 1;
        for code in 0..6usize.pow(boundaries as u32) {
            let cuts: Vec<usize> = (0..boundaries).map(|b| code / 6usize.pow(b as u32) % 6).collect();
            let c_total: usize = cuts.iter().sum();
            let circuit = cut_pattern(&cuts);
            let plan = plan_cut(&circuit, n)?;
            let set = decompose(&circuit, &plan)?;
            // Distinct per-segment local-operation patterns over all terms.
            let mut distinct = 0;
            for seg in 0..n {
                let adjacent = plan.segment_cuts(seg);
                let patterns: BTreeSet<Vec<usize>> = (0..1usize << c_total)
                    .map(|m| adjacent.iter().map(|&j| (m >> j) & 1).collect())
                    .collect();
                distinct += patterns.len();
            }
            let c_seg: Vec<usize> = (0..n)
                .map(|i| cuts.get(i.wrapping_sub(1)).copied().unwrap_or(0) + cuts.get(i).copied().unwrap_or(0))
                .collect();
            let formula: usize = c_seg.iter().map(|&c| 1 << c).sum();
            if set.num_subcircuits() != distinct || distinct != formula {
                return Ok((false, format!("cuts {cuts:?}: built {}, enumerated {distinct}, formula {formula}", set.num_subcircuits())));
            }
            if n == 2 && distinct != 2 << c_total {
                return Ok((false, format!("n=2, c={c_total}: {distinct} != 2*2^c")));
            }
            checked += 1;
        }
    }
    Ok((true, format!("{checked} cut patterns for n <= 4, c_b <= 5")))
}

fn coefficient_law() -> Outcome {
    let mut worst = 0.0f64;
    for c in 0..=12 {
        let target = 2f64.powf(-(c as f64) / 2.0);
        for a in term_coefficients(c) {
            worst = worst.max((a.norm() - target).abs() / target);
        }
    }
    let a0 = cut_coefficient(0) - Complex64::new(0.5, -0.5);
    let a1 = cut_coefficient(1) - Complex64::new(0.5, 0.5);
    let single = a0.norm().max(a1.norm());
    Ok((
        worst < 1e-13 && single < 1e-15,
        format!("max relative |alpha| error {worst:.2e}, one-cut error {single:.2e}"),
    ))
}

fn merge_scaling() -> Outcome {
    let opts = MeasureOptions::with_reps(5);
    let mut series = Vec::new();
    for q in (12..=22).step_by(2) {
        let circuit = BenchmarkSpec::new(q, 2, 6).build()?;
        series.push(measure_cut(&circuit, &Partition::equal(q, 2)?, &opts)?);
    }
    let points: Vec<_> = series.iter().map(|b| (b.q as f64, b.t_merge)).collect();
    let slope = log2_slope(&points).unwrap_or(f64::NAN);
    let x = detect_crossovers(&series);
    let ordered = matches!((x.q_pre_cross, x.q_sub_cross), (Some(a), Some(b)) if a <= b);
    Ok((
        (slope - 1.0).abs() <= 0.2 && ordered,
        format!(
            "log2 t_merge slope {slope:.3}, crossovers pre={:?} sub={:?}",
            x.q_pre_cross, x.q_sub_cross
        ),
    ))
}

fn speedup_sign() -> Outcome {
    let opts = MeasureOptions::with_reps(3);
    let mut bad = Vec::new();
    let mut summary = Vec::new();
    for q in [16usize, 18, 20] {
        let fast: Vec<usize> = (1..=q / 2 - 2).collect();
        let slow = q / 2 + 4;
        for &c in fast.iter().chain([&slow]) {
            let b = measure(&BenchmarkSpec::new(q, 2, c), &opts)?;
            let want_negative = c <= q / 2 - 2;
            if want_negative != (b.delta < 0.0) {
                bad.push(format!("(q={q}, c={c}) delta={:.3}", b.delta));
            }
            if c == *fast.last().unwrap() || c == slow {
                summary.push(format!("({q},{c}):{:+.2}", b.delta));
            }
        }
    }
    let detail = if bad.is_empty() {
        summary.join(" ")
    } else {
        format!("wrong sign at {}", bad.join(", "))
    };
    Ok((bad.is_empty(), detail))
}

fn equal_partition() -> Outcome {
    let sweep = split_sweep(16, &[1, 2, 3], &MeasureOptions::with_reps(5))?;
    let minima: Vec<_> = [1, 2, 3].iter().map(|&c| (c, sweep.minimum(c))).collect();
    let ok = minima
        .iter()
        .all(|(_, s)| s.is_some_and(|s| (7..=9).contains(&s)));
    Ok((ok, format!("minimizing split per c: {minima:?}")))
}

fn depth_independence() -> Outcome {
    let r = depth_response(16, 2, 6, &[0, 2], &MeasureOptions::with_reps(5))?;
    let merge_change = relative_change(r[0].t_merge, r[1].t_merge).abs();
    let orig_growth = r[1].t_orig / r[0].t_orig;
    Ok((
        merge_change < 0.25 && orig_growth >= 5.0,
        format!(
            "t_merge change {:.1}%, t_orig growth {orig_growth:.2}x (G {} -> {})",
            merge_change * 100.0,
            r[0].gates,
            r[1].gates
        ),
    ))
}

fn boundary_recovery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut samples = Vec::new();
    for q in (2..=30).step_by(2) {
        for c in 0..=20 {
            let eps: f64 = rng.gen_range(-0.25..0.25);
            let line = 0.5 * q as f64 + 0.3 + eps;
            samples.push((q as f64, c as f64, (c as f64 - line) / 5.0));
        }
    }
    let fit = fit_points(training_points(&samples), &SvmOptions::for_segments(2)?)?;
    Ok((
        (fit.slope - 0.5).abs() <= 0.05,
        format!("slope {:.4}, intercept {:.3}", fit.slope, fit.intercept),
    ))
}

fn feasibility_scan() -> Outcome {
    let opts = ScanOptions {
        budget: Duration::from_secs(30),
        n: 2,
        c_total: 6,
        config: SimConfig::with_max_qubits(26),
        q_limit: None,
    };
    let row = scan_feasible(&[None], &opts)?.remove(0);
    let executed = |pipeline: Pipeline, q: Option<usize>| {
        q.is_none_or(|q| {
            row.trials
                .iter()
                .any(|t| t.pipeline == pipeline && t.q == q && t.status == Status::Ok)
        })
    };
    let ran = executed(Pipeline::Orig, row.q_max_orig) && executed(Pipeline::Cut, row.q_max_cut);
    let stops: Vec<String> = row
        .trials
        .iter()
        .filter(|t| t.status != Status::Ok)
        .map(|t| format!("{:?}@q={}:{:?}", t.pipeline, t.q, t.status))
        .collect();
    let ok = ran && row.q_max_cut.is_some() && row.q_max_cut >= row.q_max_orig;
    Ok((
        ok,
        format!(
            "q_max_orig={:?}, q_max_cut={:?}, stops [{}]",
            row.q_max_orig,
            row.q_max_cut,
            stops.join(", ")
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("exact reconstruction", exact_reconstruction),
        ("threshold formulas", threshold_formulas),
        ("subcircuit count", subcircuit_count),
        ("coefficient law", coefficient_law),
        ("merge scaling and crossovers", merge_scaling),
        ("speedup sign", speedup_sign),
        ("equal partition optimality", equal_partition),
        ("merge depth independence", depth_independence),
        ("boundary fit recovery", boundary_recovery),
        ("feasibility scan", feasibility_scan),
    ];
    let only: Vec<usize> = std::env::var("SVCUT_ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect())
        .unwrap_or_default();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!(
            "{} [{id:>2}] {name}: {detail} ({:.1}s)",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
