//! Scoring against activity labels, ROC tuning, feature dumps and the bias
//! regression.

pub mod features;
pub mod regress;
pub mod report;
pub mod roc;
pub mod score;

pub use features::{dump_features, FeatureRow};
pub use regress::{ols, parse_table, standard_reg, Gender, OlsFit, RegressionResult, RegressionRow};
pub use report::{subject_average, AccuracyReport, CellSummary, TrialResult};
pub use roc::{roc_sweep, staged_tune, Candidate, LabeledSeries, RocCurve, RocPoint, Stage, TuneGrids, TuneResult};
pub use score::{score, window_labels, ActivityGrouping, ConfusionCounts, ScoreResult};
