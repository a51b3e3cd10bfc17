use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown state family `{0}`")]
    UnknownFamily(String),
    #[error("invalid support interval [{0}, {1}]")]
    InvalidSupport(f64, f64),
    #[error("state is not normalizable: {0}")]
    NotNormalizable(String),
    #[error("invalid sample mesh: {0}")]
    InvalidMesh(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("phase scale must be positive, got {0}")]
    NonPositivePhaseScale(f64),
    #[error("moment order {0} is not supported (expected 0 or 1)")]
    UnsupportedMomentOrder(u32),
    #[error("time step must be positive, got {0}")]
    NonPositiveTimeStep(f64),
    #[error("no output positions requested")]
    EmptyOutputs,
    #[error("reference quadrature did not converge at x = {x} (error estimate {estimate:.3e})")]
    OracleNotConverged { x: f64, estimate: f64 },
    #[error("tail beyond the integration cutoff is too large ({bound:.3e} of {probability:.3e})")]
    TailTooLarge { bound: f64, probability: f64 },
    #[error("energy moments diverge for {0} (non-smooth boundary)")]
    DivergentMoment(String),
    #[error("power-law fit needs at least two positive points: {0}")]
    BadFitData(String),
    #[error("surviving norm underflowed at step {0}")]
    NormUnderflow(usize),
    #[error("boundary layer of width {width:.3e} is not resolved with {nodes} mesh nodes")]
    UnresolvedBoundaryLayer { width: f64, nodes: usize },
    #[error("two-dimensional state is not a product of one-dimensional factors (residual {0:.3e})")]
    NonSeparable(f64),
}
