use thiserror::Error;

use crate::polycore::Complex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("parameter `{name}` must be {requirement}, got {value}")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },

    #[error("non-finite coefficient or coordinate")]
    NonFinite,

    #[error("duplicate exponent tuple {0:?}")]
    DuplicateExponent(Vec<u32>),

    #[error("the zero polynomial is not allowed here")]
    ZeroPolynomial,

    #[error("polynomial must have degree at least 1")]
    ConstantPolynomial,

    #[error("polynomial is constant in variable {axis}")]
    ConstantInAxis { axis: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("root finder did not converge after {iterations} sweeps (residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        best: Vec<Complex>,
    },

    #[error("root {root} has |f'| = {derivative:e}; lifting needs a simple root")]
    MultipleRoot { root: Complex, derivative: f64 },

    #[error("division by the zero jet")]
    ZeroDivision,

    #[error("jet is infinite; its standard part is undefined")]
    InfiniteJet,

    #[error("truncation order {0} outside 1..=32")]
    InvalidOrder(i32),

    #[error("standard part of the jet polynomial differs from the target by {distance:e}")]
    StandardPartMismatch { distance: f64 },

    #[error("coefficient {exps:?} moved by {distance:e}, not below delta = {delta:e}")]
    NotADeformation {
        exps: Vec<u32>,
        distance: f64,
        delta: f64,
    },

    #[error("trial {trial} at delta = {delta:e}: {source}")]
    Trial {
        trial: usize,
        delta: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("no tested delta down to {floor:e} kept every trial aligned")]
    NoAlignedDelta { floor: f64 },

    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures of a numerical procedure (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::NonConvergence { .. } | Error::NoAlignedDelta { .. } => true,
            Error::Trial { source, .. } => source.is_numeric(),
            _ => false,
        }
    }

    pub(crate) fn positive(name: &'static str, value: f64) -> Result<()> {
        if value > 0.0 && value.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter {
                name,
                requirement: "positive and finite",
                value,
            })
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
