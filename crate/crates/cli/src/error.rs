use std::fmt;
use std::path::Path;

use newsprom::comparator::{ComparatorError, ModelIoError};
use newsprom::layout::LayoutError;
use newsprom::links::RuleError;
use newsprom::pairs::PairError;
use newsprom::ranker::RankError;
use newsprom::store::StoreError;

use crate::config::ConfigError;

/// A failed command: the stage that failed, a stable upper-snake-case code
/// and a human-readable message. Displayed as `stage/CODE: message`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub stage: &'static str,
    pub code: String,
    pub message: String,
}

impl CliError {
    pub fn new(stage: &'static str, code: &str, message: impl Into<String>) -> Self {
        CliError {
            stage,
            code: code.to_string(),
            message: message.into(),
        }
    }

    pub fn io(stage: &'static str, path: &Path, err: impl fmt::Display) -> Self {
        CliError::new(stage, "IO", format!("{}: {err}", path.display()))
    }

    pub fn missing_input(stage: &'static str, path: &Path, hint: &str) -> Self {
        CliError::new(
            stage,
            "MISSING_STAGE_INPUT",
            format!("{} not found; run `{hint}` first", path.display()),
        )
    }

    /// Process exit status: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.stage == "config" {
            2
        } else {
            1
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}: {}", self.stage, self.code, self.message)
    }
}

impl std::error::Error for CliError {}

pub trait Coded: fmt::Display {
    fn code(&self) -> &'static str;

    fn at(&self, stage: &'static str) -> CliError {
        CliError::new(stage, self.code(), self.to_string())
    }
}

impl Coded for ConfigError {
    fn code(&self) -> &'static str {
        match self {
            ConfigError::Unreadable { .. } => "UNREADABLE_CONFIG",
            ConfigError::Malformed { .. } => "MALFORMED_CONFIG",
            ConfigError::OutOfRange { .. } => "OUT_OF_RANGE",
            ConfigError::UnknownValue { .. } => "UNKNOWN_VALUE",
        }
    }
}

impl Coded for StoreError {
    fn code(&self) -> &'static str {
        match self {
            StoreError::MissingFile(_) => "MISSING_FILE",
            StoreError::MalformedMeta(_) => "MALFORMED_META",
            StoreError::MalformedLinks(_) => "MALFORMED_LINKS",
            StoreError::MalformedGeometry(_) => "MALFORMED_GEOMETRY",
            StoreError::CorruptManifest { .. } => "CORRUPT_MANIFEST",
            StoreError::UnknownSnapshot(_) => "UNKNOWN_SNAPSHOT",
            StoreError::Io { .. } => "IO",
        }
    }
}

impl Coded for RuleError {
    fn code(&self) -> &'static str {
        match self {
            RuleError::UnknownRule { .. } => "UNKNOWN_RULE",
            RuleError::BadArgument { .. } => "BAD_RULE_ARGUMENT",
            RuleError::Io(_) => "IO",
        }
    }
}

impl Coded for LayoutError {
    fn code(&self) -> &'static str {
        match self {
            LayoutError::MalformedGeometry(_) => "MALFORMED_GEOMETRY",
            LayoutError::OutOfBounds { .. } => "OUT_OF_BOUNDS",
            LayoutError::MissingGeometry(_) => "MISSING_GEOMETRY",
            LayoutError::Io(_) => "IO",
        }
    }
}

impl Coded for PairError {
    fn code(&self) -> &'static str {
        match self {
            PairError::EmptyInput => "EMPTY_INPUT",
            PairError::InvalidRatio(_) => "INVALID_RATIO",
            PairError::MalformedPairs { .. } => "MALFORMED_PAIRS",
            PairError::Io(_) => "IO",
        }
    }
}

impl Coded for ComparatorError {
    fn code(&self) -> &'static str {
        match self {
            ComparatorError::EmptyTrainingSet => "EMPTY_TRAINING_SET",
            ComparatorError::EmptyTestSet => "EMPTY_TEST_SET",
            ComparatorError::InvalidHyper(_) => "INVALID_HYPER",
        }
    }
}

impl Coded for ModelIoError {
    fn code(&self) -> &'static str {
        match self {
            ModelIoError::BadMagic => "BAD_MAGIC",
            ModelIoError::VersionMismatch { .. } => "VERSION_MISMATCH",
            ModelIoError::CorruptModel(_) => "CORRUPT_MODEL",
            ModelIoError::Io(_) => "IO",
        }
    }
}

impl Coded for RankError {
    fn code(&self) -> &'static str {
        match self {
            RankError::MismatchedItems(_) => "MISMATCHED_ITEMS",
            RankError::EmptyInputs => "EMPTY_INPUTS",
            RankError::EmptyCorpus(_) => "EMPTY_CORPUS",
            RankError::MalformedArticles { .. } => "MALFORMED_ARTICLES",
            RankError::IoFailure(_) => "IO",
        }
    }
}
