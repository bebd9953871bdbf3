use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("header lacks required column `{0}`")]
    MissingColumn(String),
    #[error("recording has no valid samples")]
    EmptyRecording,
    #[error("time decreases at row {row} (t = {t})")]
    NonMonotonicTime { row: usize, t: f64 },
    #[error("signal too short: need {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("recording carries no activity labels")]
    NoLabels,
    #[error("invalid frequency band: {0}")]
    BadBand(String),
    #[error("invalid detector parameters: {0}")]
    BadParams(String),
    #[error("invalid synthetic spec: {0}")]
    BadSpec(String),
    #[error("length mismatch: {left} predictions vs {right} truth windows")]
    LengthMismatch { left: usize, right: usize },
    #[error("nothing to average")]
    Empty,
    #[error("no positive (walking) windows in dataset")]
    NoPositives,
    #[error("no negative (non-walking) windows in dataset")]
    NoNegatives,
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("{dropped} incomplete rows dropped, {remaining} complete rows are not enough to fit {params} parameters")]
    IncompleteRows {
        dropped: usize,
        remaining: usize,
        params: usize,
    },
}

impl Error {
    /// Stable machine-readable category name.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Io { .. } => "Io",
            Error::Csv(_) => "Csv",
            Error::MissingColumn(_) => "MissingColumn",
            Error::EmptyRecording => "EmptyRecording",
            Error::NonMonotonicTime { .. } => "NonMonotonicTime",
            Error::TooShort { .. } => "TooShort",
            Error::NoLabels => "NoLabels",
            Error::BadBand(_) => "BadBand",
            Error::BadParams(_) => "BadParams",
            Error::BadSpec(_) => "BadSpec",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::Empty => "Empty",
            Error::NoPositives => "NoPositives",
            Error::NoNegatives => "NoNegatives",
            Error::RankDeficient => "RankDeficient",
            Error::IncompleteRows { .. } => "IncompleteRows",
        }
    }

    /// True for errors caused by user configuration rather than input data.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::BadBand(_) | Error::BadParams(_) | Error::BadSpec(_)
        )
    }
}
