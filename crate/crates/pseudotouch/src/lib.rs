//! File formats, reports and the command-line pipeline built on
//! [`pseudotouch_core`].
//!
//! * [`ptnn`]: network parameter files.
//! * [`ptds`]: self-describing, checksummed dataset files.
//! * [`pgm`]: 16-bit depth images in 0.1 mm units.
//! * [`shapes`]: named object sets and shape JSON.
//! * [`cli`]: the `pseudotouch` subcommands.

mod binio;
pub mod cli;
pub mod pgm;
pub mod pipeline;
pub mod ptds;
pub mod ptnn;
pub mod report;
pub mod shapes;

use std::io;

/// Failure to read or write one of the crate's file formats.
#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("bad magic bytes: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },
    #[error("unsupported format version {found} (this build reads {expected})")]
    Version { found: u16, expected: u16 },
    #[error("architecture version {found} does not match expected {expected}")]
    Architecture { found: u16, expected: u16 },
    #[error("file truncated at byte {offset}")]
    Truncated { offset: usize },
    #[error("checksum mismatch in {section}")]
    Checksum { section: String },
    #[error("tensor shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("malformed {what}: {detail}")]
    Malformed { what: &'static str, detail: String },
    #[error("invalid header JSON: {0}")]
    Header(#[from] serde_json::Error),
}

impl FormatError {
    pub(crate) fn malformed(what: &'static str, detail: impl Into<String>) -> Self {
        FormatError::Malformed { what, detail: detail.into() }
    }
}
