//! Evaluation: confusion counts, precision/recall/F1, ROC curves with
//! micro/macro averaging, diarization-output conversion, and reports.

mod diarization;
mod metrics;
mod report;
mod roc;

pub use diarization::{diarization_to_cpd, DiarizationErrors};
pub use metrics::{confusion, mean_std, prf, ConfusionMatrix, Prf};
pub use report::{
    evaluate, evaluate_scores, summarize, EvalReport, MetricSummary, OracleScorer, RepeatedSummary, Scorer,
};
pub use roc::{roc, roc_binary, RocCurve, RocSet, RocVariant, MACRO_GRID_POINTS};
