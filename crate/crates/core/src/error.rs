use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus must be at least 2, got {0}")]
    Modulus(String),

    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    /// A printed residue table matched zero or several rules for an index.
    #[error("table defect at index {index}: {kind} (class {class})")]
    TableDefect {
        index: u64,
        kind: DefectKind,
        class: String,
    },

    #[error("factorial cursor queried out of order")]
    OutOfOrder,

    #[error("valuation not resolved below cap {cap} at index {index}")]
    CapExceeded { index: u64, cap: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectKind {
    Uncovered,
    Overlap,
}

impl std::fmt::Display for DefectKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DefectKind::Uncovered => f.write_str("no rule matches"),
            DefectKind::Overlap => f.write_str("several rules match"),
        }
    }
}
