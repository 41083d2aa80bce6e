//! Experiment orchestration: configuration, execution, metrics and map
//! rendering.

mod config;
mod map;
mod metrics;
mod run;

pub use config::{DataSource, ExperimentConfig, Scheme, SplitConfig};
pub use map::{class_color, render_map, CLASS_PALETTE};
pub use metrics::{compute_metrics, Metrics};
pub use run::{load_data, run_experiment, Report, RunOutput};
