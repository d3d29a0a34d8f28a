//! Merge cost grows by one doubling per added cut at fixed width.

use svcut_core::circuit::BenchmarkSpec;
use svcut_core::cutter::Partition;
use svcut_core::harness::log2_slope;
use svcut_core::harness::measure::{measure_cut, MeasureOptions};

#[test]
fn merge_time_doubles_per_cut() {
    let q = 16;
    let opts = MeasureOptions::with_reps(3);
    let points: Vec<(f64, f64)> = (4..=10)
        .map(|c| {
            let circuit = BenchmarkSpec::new(q, 2, c).build().unwrap();
            let b = measure_cut(&circuit, &Partition::equal(q, 2).unwrap(), &opts).unwrap();
            (c as f64, b.t_merge)
        })
        .collect();
    let slope = log2_slope(&points).unwrap();
    assert!((slope - 1.0).abs() <= 0.2, "slope {slope}, points {points:?}");
}
