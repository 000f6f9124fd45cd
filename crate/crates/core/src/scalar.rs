//! Numeric abstractions shared by the model.
//!
//! The packet pipeline and the sawtooth integration only need field
//! arithmetic, so they run over [`Scalar`], which covers `f32`, `f64` and
//! exact rationals. Everything touching logarithms or square roots (the link
//! budget and placement analysis) needs [`Real`].

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{Float, FloatConst, Num, NumCast, ToPrimitive};

/// Ordered field element usable for event times and areas.
pub trait Scalar: Num + Copy + PartialOrd + Debug {
    /// Exact conversion of a packet count or small integer constant.
    fn from_count(n: u64) -> Self;

    /// Lossy view used for diagnostics and error payloads.
    fn to_f64(self) -> f64;

    fn half() -> Self {
        Self::one() / Self::from_count(2)
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

macro_rules! float_scalar {
    ($($t:ty),*) => {$(
        impl Scalar for $t {
            fn from_count(n: u64) -> Self {
                n as $t
            }

            fn to_f64(self) -> f64 {
                self as f64
            }
        }

        impl Real for $t {}
    )*};
}

float_scalar!(f32, f64);

macro_rules! ratio_scalar {
    ($($t:ty),*) => {$(
        impl Scalar for Ratio<$t> {
            fn from_count(n: u64) -> Self {
                Ratio::from_integer(<$t>::try_from(n).expect("count exceeds rational range"))
            }

            fn to_f64(self) -> f64 {
                ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
            }
        }
    )*};
}

ratio_scalar!(i64, i128);

/// Floating-point scalar for the transcendental parts of the model.
pub trait Real: Scalar + Float + FloatConst {
    /// Converts an `f64` literal; panics only on values unrepresentable in `Self`.
    fn lit(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("literal out of range")
    }
}

/// `|a - b| / max(|a|, |b|)`, zero when both are zero.
pub fn rel_diff<T: Real>(a: T, b: T) -> T {
    let scale = a.abs().max(b.abs());
    if scale == T::zero() {
        T::zero()
    } else {
        (a - b).abs() / scale
    }
}
