//! Experiment configuration, drivers, baselines and CSV output.

pub mod baseline;
pub mod config;
pub mod experiments;
pub mod output;

pub use baseline::{rru_selection_baseline, rru_selection_precoders, select_rru};
pub use config::{CellAlgorithm, ChannelModel, ConstraintMode, ExperimentConfig};
pub use experiments::{
    properness_table, run_backoff_prediction, run_cell_experiments, run_cell_map, run_rate_vs_distance,
    run_snr_sweep, DistanceStudy,
};
pub use output::{write_csv, write_csv_file, Coordinate, ResultRow};
