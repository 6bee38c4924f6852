use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),

    #[error("nonconvex domain: {0}")]
    NonconvexDomain(String),

    #[error("non-finite value {value} at node {location:?}")]
    NonFinite { location: Vec<f64>, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty section: {0}")]
    EmptySection(String),

    #[error("centering failed after {iterations} iterations, best residual {residual:.3e}")]
    CenteringFailed { iterations: usize, residual: f64 },

    #[error("section touches the boundary band; centering not attempted")]
    SectionTouchesBoundary,

    #[error("flat set, no interior ellipsoid")]
    FlatSet,

    #[error("base point not interior")]
    BasePointNotInterior,

    #[error("not a tangent plane: u - l reaches {worst:.3e} below -tol")]
    NotTangent { worst: f64 },

    #[error("stiff state: dt = {dt:.3e} at t = {t}")]
    StiffState { dt: f64, t: f64 },

    #[error("subcritical exponent, construction invalid (beta <= 1): n = {n}, p = {p}")]
    SubcriticalExponent { n: usize, p: f64 },

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("matrix is not positive semidefinite")]
    NotPositiveSemidefinite,

    #[error("not ordered at parabolic boundary: gap {gap:.3e} at t = {t}")]
    NotOrdered { gap: f64, t: f64 },

    #[error("nonconvex samples: second difference {worst:.3e} at index {index}")]
    NonconvexSamples { worst: f64, index: usize },

    #[error("no motion at node {node}")]
    NoMotion { node: usize },

    #[error("under-resolved interface: {bins} distance bins")]
    UnderResolvedInterface { bins: usize },

    #[error("target node {location:?} maps outside the source domain")]
    OutsideSource { location: Vec<f64> },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("configuration: {0}")]
    Config(String),

    #[error("unknown experiment {0:?}")]
    UnknownExperiment(String),

    #[error("stage {stage}: {source}")]
    Stage { stage: &'static str, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
