use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("position is at the origin; channel geometry is undefined")]
    PositionAtOrigin,

    #[error("degenerate geometry: polar singularity (sin θ = 0) at the {0} end of the link")]
    DegenerateGeometry(&'static str),

    #[error("beam Gram matrix is singular for beam set {0}")]
    SingularGram(String),

    #[error("no illumination: beamforming gain is zero")]
    NoIllumination,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("nuisance parameters unidentifiable: nuisance block is singular")]
    NuisanceUnidentifiable,

    #[error("delay unobservable: {0}")]
    DelayUnobservable(&'static str),

    #[error("parameter label mismatch: {left:?} vs {right:?}")]
    LabelMismatch {
        left: Vec<String>,
        right: Vec<String>,
    },

    #[error("protocol {0} requires a {1} channel FIM")]
    MissingFim(&'static str, &'static str),

    #[error("degenerate region: {0}")]
    DegenerateRegion(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
