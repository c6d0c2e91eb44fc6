//! Metrics, open splits, experiment orchestration, model bundles and
//! decision-boundary export.

mod boundary;
mod bundle;
mod experiment;
mod metrics;
mod split;

pub use boundary::{boundary_grid, export_boundary_grid, GridPoint};
pub use bundle::{load_bundle, save_bundle, ModelBundle, MANIFEST};
pub use experiment::{
    aggregate, evaluate, load_config, run_experiment, run_file_name, scalar_metrics, train_method,
    AggregateRow, DataSource, ExperimentConfig, ExperimentSummary, MeanStd, Method, RunReport,
    SeenClasses,
};
pub use metrics::{confusion_and_metrics, macro_f1_original, LabelMetrics, MetricsReport, Prf};
pub use split::{make_open_split, OpenSplit};
