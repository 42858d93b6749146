//! Cross-validation, metrics, threshold sweeps, cohort reports and error plots.

mod cv;
mod folds;
mod metrics;
mod plot;
mod report;
mod slice;
mod sweep;

pub use cv::{cross_validate, CvResult, Prediction};
pub use folds::{stratified_folds, Folds};
pub use metrics::{macro_from_confusion, ClassMetrics, ConfusionMatrix, MetricsReport, MIN_RELIABLE_SUPPORT};
pub use plot::{color, export_error_plot, render_plot_csv, render_svg};
pub use report::{
    fmt3, render_cohort_table, render_distribution, render_metrics_detail, render_predictions, render_sweep,
    CohortMetrics, ReportFormat,
};
pub use slice::{slice_dataset, Cohort, SliceBy};
pub use sweep::{default_thresholds, threshold_sweep, SweepRow, DEFAULT_SWEEP};
