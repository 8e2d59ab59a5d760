use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Which configured enumeration limit was hit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapKind {
    Opens,
    Mu,
    Maps,
    Elements,
    Branches,
}

impl std::fmt::Display for CapKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CapKind::Opens => "cap-opens",
            CapKind::Mu => "cap-mu",
            CapKind::Maps => "cap-maps",
            CapKind::Elements => "max-elements",
            CapKind::Branches => "cap-branches",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("order relation has a cycle through `{0}` and `{1}` (space is not T0)")]
    Cycle(String, String),
    #[error("duplicate element name `{0}`")]
    DuplicateName(String),
    #[error("space must have at least one element")]
    EmptySpace,
    #[error("index {index} out of range for a space with {len} elements")]
    InvalidIndex { index: usize, len: usize },
    #[error("unknown element name `{0}`")]
    UnknownName(String),
    #[error("set is not up-closed: {0}")]
    NotUpSet(String),
    #[error(
        "{cap} exceeded: need {requested}, limit is {limit} (raise it to at least {requested})"
    )]
    CapExceeded {
        cap: CapKind,
        requested: usize,
        limit: usize,
    },
    #[error("map is not open: image of {0} is not an up-set")]
    NotOpenMap(String),
    #[error("map is not continuous: {0}")]
    NotContinuous(String),
    #[error("not an envelope: {0}")]
    NotAnEnvelope(String),
    #[error("not a complete lattice: {0}")]
    NotALattice(String),
    #[error("not a section: {0}")]
    NotASection(String),
    #[error("map does not preserve joins: {0}")]
    NotJoinPreserving(String),
    #[error("not an advice bundle: {0}")]
    NotABundle(String),
    #[error("shape mismatch: {0}")]
    Mismatch(String),
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn cap(cap: CapKind, requested: usize, limit: usize) -> Self {
        Error::CapExceeded {
            cap,
            requested,
            limit,
        }
    }
}
