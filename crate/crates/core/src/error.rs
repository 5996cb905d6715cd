use thiserror::Error;

/// Errors raised by the model, the optimizers and the distillation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("detection probability {value} outside [0, 1]: coefficients are not realizable")]
    DegenerateModel { value: f64 },

    #[error("overlap denominator radicand {radicand} is not positive")]
    DegenerateDenominator { radicand: f64 },

    #[error("no angle satisfies the error-rate constraint (required sine {required})")]
    Infeasible { required: f64 },

    #[error("sin(lambda) vanishes: mu does not influence the error rate")]
    SingularLambda,

    #[error("error rate {error_rate} outside the admissible range [0, {max}]")]
    OutOfDomain { error_rate: f64, max: f64 },

    #[error("{what} = {value} outside its domain")]
    Domain { what: &'static str, value: f64 },

    #[error("leading polynomial coefficient is zero")]
    LeadingZero,

    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("{bits}-bit strings exceed the exhaustive enumeration limit of {limit} bits")]
    TooLarge { bits: u32, limit: u32 },

    #[error("no grid point satisfies the error-rate constraint")]
    EmptyFeasibleSet,

    #[error("simulation produced no sifted bits")]
    DegenerateRun,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
