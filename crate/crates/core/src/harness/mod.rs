//! Configuration, random streams, Monte Carlo CCDF experiments and result
//! files.

mod config;
mod experiment;
mod output;
mod stream;

pub use config::{load_config, threshold_grid, ClipRatioUnit, SimConfig, EXHAUSTIVE_LIMIT};
pub use experiment::{
    run_ccdf_experiment, run_ccdf_experiment_on, Metadata, MethodCurve, ResultSet, RECEIVE_MODEL,
};
pub use output::{format_sig6, to_csv, to_json, write_results, OutputFormat};
pub use stream::RandomStream;
