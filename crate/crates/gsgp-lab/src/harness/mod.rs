//! Experiment orchestration: planning the factorial design, executing it
//! with derived seeds and resumable CSV persistence, and turning record
//! sets into medians, robustness measures, significance tables, and
//! plot-data files.

pub mod analyze;
pub mod execute;
pub mod plan;
pub mod plot;
pub mod records;
pub mod report;
pub mod seeds;

pub use analyze::{
    analyze, analyze_with, AnalyzeOptions, CellSummary, Measure, MetricOrder, RobustnessReport,
    RobustnessRow, SignificanceCell, Verdict,
};
pub use execute::{execute, run_cell, ExecuteOptions, ExecuteSummary};
pub use plan::{plan_experiment, Cell, ExperimentPlan, Method, RepetitionScheme};
pub use plot::emit_plot_data;
pub use records::{read_records, read_records_dir, records_path, CellKey, RunRecord};
pub use report::{render_table, write_summary_csv};
