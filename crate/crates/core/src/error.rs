use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("step size underflow at x = {x}")]
    StepUnderflow { x: f64 },

    #[error("non-finite derivative at x = {x}")]
    NonFiniteDerivative { x: f64 },

    #[error("step budget of {max_steps} exhausted at x = {x}")]
    StepBudget { x: f64, max_steps: usize },

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("quadrature on [{a}, {b}] hit the subdivision limit with error estimate {error:e}")]
    SubdivisionLimit { a: f64, b: f64, error: f64 },

    #[error("line fit needs at least two distinct abscissae")]
    DegenerateAbscissae,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("at energy E = {energy}: {source}")]
    AtEnergy { energy: f64, source: Box<Error> },

    #[error("could not bracket the edges of band {band} below E = {ceiling}")]
    BandNotFound { band: usize, ceiling: f64 },

    #[error("quasimomentum k = {k} outside ({k_min}, pi - {k_min})")]
    QuasimomentumOutOfRange { k: f64, k_min: f64 },

    #[error("|S(1,E)| = {s1:e} at E = {energy} is too small (energy too close to a band edge)")]
    NearBandEdge { energy: f64, s1: f64 },

    #[error("assumption A1 violated: {0}")]
    Classification(#[from] crate::targets::ClassifyError),

    #[error("plan: {0}")]
    Plan(String),

    #[error("tail too short: {0}")]
    InsufficientTail(String),

    #[error("precondition: {0}")]
    Precondition(String),

    #[error("i/o: {0}")]
    Io(String),

    #[error("{source_name}, line {line}: {message}")]
    Format { source_name: String, line: usize, message: String },
}

impl Error {
    pub(crate) fn at_energy(self, energy: f64) -> Error {
        match self {
            e @ Error::AtEnergy { .. } => e,
            e => Error::AtEnergy { energy, source: Box::new(e) },
        }
    }

    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::StepUnderflow { .. }
            | Error::NonFiniteDerivative { .. }
            | Error::StepBudget { .. }
            | Error::NoSignChange { .. }
            | Error::SubdivisionLimit { .. }
            | Error::BandNotFound { .. }
            | Error::NearBandEdge { .. }
            | Error::DegenerateAbscissae
            | Error::InsufficientTail(_) => true,
            Error::AtEnergy { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
