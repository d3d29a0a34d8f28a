//! Wall-clock benchmarking of the cut pipeline against uncut simulation.

pub mod analysis;
pub mod experiments;
pub mod measure;
pub mod svm;
pub mod sweep;

pub use analysis::{detect_crossovers, log2_slope, Crossovers};
pub use experiments::{
    breakdown_series, depth_response, depth_sweep, relative_change, scan_feasible, split_sweep,
    BreakdownSeries, DepthSweep, ScanOptions, ScanRow, SplitSweep,
};
pub use measure::{measure, measure_circuit, measure_point, MeasureOptions, Status, TimingBreakdown};
pub use svm::{fit_boundary, fit_points, training_points, BoundaryFit, SvmOptions};
pub use sweep::{default_grid, read_csv, sweep_heatmap, write_csv, SweepOptions, SweepResult};
