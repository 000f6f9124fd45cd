use thiserror::Error;

/// Violations of a model precondition.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{quantity} must be {requirement}, got {value}")]
    Domain {
        quantity: &'static str,
        requirement: &'static str,
        value: f64,
    },

    #[error("relay location {location} m is outside the open span (0, {span}) m")]
    DegenerateHop { location: f64, span: f64 },

    #[error("{operation} requires {expected}, got t1 = {t1} s, t2 = {t2} s")]
    WrongRegime {
        operation: &'static str,
        expected: &'static str,
        t1: f64,
        t2: f64,
    },

    #[error("hop time {hop_time} s cannot be inverted: 2^(L/(B t)) - 1 = {excess} is not a usable positive number")]
    HopTimeUnderflow { hop_time: f64, excess: f64 },

    #[error("packet count {count} exceeds the in-memory timeline limit of {limit}; use the streaming fold")]
    TimelineTooLong { count: u64, limit: u64 },
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;

pub(crate) fn positive<T: crate::Scalar>(quantity: &'static str, value: T) -> Result<T> {
    let v = value.to_f64();
    if value > T::zero() && v.is_finite() {
        Ok(value)
    } else {
        Err(ModelError::Domain {
            quantity,
            requirement: "strictly positive and finite",
            value: v,
        })
    }
}

pub(crate) fn non_negative<T: crate::Scalar>(quantity: &'static str, value: T) -> Result<T> {
    let v = value.to_f64();
    if value >= T::zero() && v.is_finite() {
        Ok(value)
    } else {
        Err(ModelError::Domain {
            quantity,
            requirement: "non-negative and finite",
            value: v,
        })
    }
}
