//! Exit-code policy: 0 ok, 1 I/O, 2 format or flag problems, 3 data or
//! protocol problems (degenerate signals, fold/alignment failures).

use std::fmt;
use std::path::Path;

use tdec_core::classify::ClassifyError;
use tdec_core::embedding::EmbeddingError;
use tdec_core::fusion::FusionError;
use tdec_core::ingest::IngestError;
use tdec_core::spectrum::SpectrumError;
use tdec_core::synth::SynthError;
use tdec_core::types::ParseTagError;

pub const EXIT_IO: i32 = 1;
pub const EXIT_FORMAT: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Self {
            code: EXIT_IO,
            message: format!("{}: {err}", path.display()),
        }
    }

    pub fn format(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_FORMAT,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_DATA,
            message: message.into(),
        }
    }

    /// Prefix the message with the file or segment it concerns.
    pub fn context(mut self, what: impl fmt::Display) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        let code = match e {
            IngestError::BadTimestamp { .. }
            | IngestError::ReversedEntry { .. }
            | IngestError::OverlappingEntries { .. } => EXIT_DATA,
            _ => EXIT_FORMAT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<EmbeddingError> for CliError {
    fn from(e: EmbeddingError) -> Self {
        let code = match e {
            EmbeddingError::InsufficientLength { .. } | EmbeddingError::DegenerateChannel { .. } => {
                EXIT_DATA
            }
            _ => EXIT_FORMAT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<SpectrumError> for CliError {
    fn from(e: SpectrumError) -> Self {
        let code = match e {
            SpectrumError::BadRange { .. }
            | SpectrumError::BadRangeSyntax(_)
            | SpectrumError::BadSpectraCsv { .. } => EXIT_FORMAT,
            _ => EXIT_DATA,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<ClassifyError> for CliError {
    fn from(e: ClassifyError) -> Self {
        let code = match e {
            ClassifyError::BadParams(_) | ClassifyError::BadModelJson(_) => EXIT_FORMAT,
            _ => EXIT_DATA,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<FusionError> for CliError {
    fn from(e: FusionError) -> Self {
        let code = match e {
            FusionError::BadModelJson(_) => EXIT_FORMAT,
            FusionError::Classify(inner) => return inner.into(),
            _ => EXIT_DATA,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        Self {
            code: EXIT_FORMAT,
            message: e.to_string(),
        }
    }
}

impl From<ParseTagError> for CliError {
    fn from(e: ParseTagError) -> Self {
        Self {
            code: EXIT_FORMAT,
            message: e.to_string(),
        }
    }
}
