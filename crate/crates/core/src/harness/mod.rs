//! Experiment orchestration: weight selection, sweeps, timing and output.

mod cv;
mod output;
mod sweep;
mod timing;

pub use cv::{
    build_penalty, calibrate_nonconvex_params, calibrate_on_dataset, cross_validate_nu, nu_grid, Calibration,
    MAX_DOUBLINGS,
};
pub use output::{
    plot_series, read_long_csv, save_sweep, write_long_csv, write_plot_series, write_summary_csv, write_timing_csv,
    LongRow, PLOT_METRICS,
};
pub use sweep::{
    run_methods, run_sweep, run_trial, select_nu, spec_digest, CellSummary, Method, Stat, Status, SweepAxis,
    SweepResult, TrialRecord,
};
pub use timing::{run_timing, TimingRow, TABLE_CELLS};
