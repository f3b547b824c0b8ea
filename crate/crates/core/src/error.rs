//! Crate-wide error type.

use thiserror::Error;

/// Pipeline stage names used to tag errors surfaced by `run_pipeline`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    TeacherGeneration,
    Annotation,
    StudentGeneration,
    Evaluation,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Stage::TeacherGeneration => "teacher-generation",
            Stage::Annotation => "annotation",
            Stage::StudentGeneration => "student-generation",
            Stage::Evaluation => "evaluation",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input data; `line` is 1-based and counts the header.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Label token rejected by a closed label vocabulary.
    #[error("label error: {0}")]
    Label(String),

    /// Requested partition sizes exceed what the source holds.
    #[error("size error: {0}")]
    Size(String),

    /// Operation applied to a dataset in the wrong labeling state.
    #[error("state error: {0}")]
    State(String),

    /// Training preconditions violated (empty data, single class, ...).
    #[error("training error: {0}")]
    Training(String),

    /// Model asked to score data it was not trained for.
    #[error("contract error: {0}")]
    Contract(String),

    /// Invalid configuration or hyperparameters.
    #[error("config error: {0}")]
    Config(String),

    /// Cross-validation failed for a roster entry.
    #[error("selection error for classifier `{spec}`: {source}")]
    Selection {
        spec: String,
        #[source]
        source: Box<Error>,
    },

    /// File I/O failure while saving or loading.
    #[error("storage error: {0}")]
    Storage(#[from] std::io::Error),

    /// Model file declares a format this build does not understand.
    #[error("version error: file format_version {found}, supported {supported}")]
    Version { found: u32, supported: u32 },

    /// Model file parsed but violates a family invariant.
    #[error("integrity error: {0}")]
    Integrity(String),

    /// First failing pipeline stage, tagged.
    #[error("pipeline stage `{stage}` failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_stage(self, stage: Stage) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
