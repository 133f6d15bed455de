use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: String,
        found: String,
    },

    #[error("weight tensor has nonzero self-coupling w[{a}][{i}][{i}]")]
    NonZeroDiagonal { a: usize, i: usize },

    #[error("internal couplings have nonzero diagonal l[{i}][{a}][{a}]")]
    NonZeroCouplingDiagonal { i: usize, a: usize },

    #[error("internal couplings supplied for a non-interacting network")]
    UnexpectedCouplings,

    #[error("interacting network requires internal couplings")]
    MissingCouplings,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("characteristic `{kind}` is missing its {payload}")]
    MissingPayload {
        kind: &'static str,
        payload: &'static str,
    },

    #[error("continuous internal variables are only defined for the linear characteristic, not `{0}`")]
    ContinuousNotLinear(&'static str),

    #[error("operation requires a `{expected}` characteristic, network uses `{found}`")]
    WrongCharacteristic {
        expected: &'static str,
        found: &'static str,
    },

    #[error("operation does not support interacting networks")]
    InteractingUnsupported,

    #[error("empty pattern set")]
    EmptyPatternSet,

    #[error("root of {equation} not bracketed within [{lo}, {hi}]")]
    RootBracket {
        equation: &'static str,
        lo: f64,
        hi: f64,
    },

    #[error("{equation}: residual {residual:e} did not reach tolerance {tol:e}")]
    NoConvergence {
        equation: &'static str,
        residual: f64,
        tol: f64,
    },

    #[error("cannot parse characteristic `{input}`: {reason}")]
    ParseCharacteristic { input: String, reason: String },
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("{p} is not in the open interval (0, 1)")))
    }
}
