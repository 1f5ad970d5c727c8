//! Experiment orchestration: configuration, Monte Carlo BER and figure sweeps.

pub mod config;
pub mod montecarlo;
pub mod sweep;
pub mod table;

pub use config::{ExperimentConfig, GammaPolicy, MoleculeGrid, SCHEMA_VERSION};
pub use montecarlo::{
    collect_statistics, count_errors, draw_block, point_key, LinkPoint, MonteCarlo, Tally, WORKERS_ENV,
};
pub use sweep::{
    binomial_estimate, choose_thresholds, figure_specs, link_point, monte_carlo, order_table, rows_table,
    run_ber_point, run_figure_sweep, run_point, run_point_with, sinr_table, theory_for, theory_table, threshold_table,
    BerRecord, EvalSpec, Extras, Figure, SweepRow, ThresholdOutcome, RECORD_COLUMNS,
};
pub use table::Table;
