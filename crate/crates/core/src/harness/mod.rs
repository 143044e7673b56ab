//! Configuration, orchestration and report emission.

mod config;
mod figures;
mod report;
mod run;
mod sanity;

pub use config::{Precision, ReportFormat, RosterConfig, RunConfig, DEFAULT_CELL_BUDGET_SECS};
pub use figures::{bar_chart_svg, box_plot_svg, quantile, BarDatum, BoxStats, FigureData, PerDatasetRow};
pub use report::{
    sanity_csv, sanity_markdown, Comparison, ConfigEcho, DirectionalChecks, EstimateRow,
    ExclusionEntry, ExperimentReport, MetricAnova, ResultRow, RuntimeInfo,
};
pub use run::{load_datasets, run_and_write, run_experiment};
pub use sanity::{half_counts, sanity_check, sanity_row, sanity_table, HalfCounts, SanityFailure, SanityRow, SanityTable};
