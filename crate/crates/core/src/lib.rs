//! Two-hop UAV relay model: free-space link budget, full-duplex
//! store-and-forward pipeline, exact age-of-information integration and
//! relay placement.
//!
//! The model is generic over the scalar type. The pipeline and sawtooth
//! integration accept any [`Scalar`] (including exact rationals, handy for
//! checking closed forms without rounding); the link budget and placement
//! analysis need a floating-point [`Real`]. The aliases below fix `f64`.

// `!(a < b)` is used deliberately so that NaN falls into the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aoi;
pub mod error;
pub mod link_budget;
pub mod numdiff;
pub mod output;
pub mod pipeline;
pub mod placement;
pub mod scalar;
pub mod sweep;
pub mod verify;

pub use error::{ModelError, Result};
pub use scalar::{rel_diff, Real, Scalar};

pub use link_budget::{capacity, received_power, snr, total_delay, Regime};

pub type RadioParams = link_budget::RadioParams<f64>;
pub type PowerProfile = link_budget::PowerProfile<f64>;
pub type NoiseProfile = link_budget::NoiseProfile<f64>;
pub type DelayComponents = link_budget::DelayComponents<f64>;
pub type HopTimes = link_budget::HopTimes<f64>;
pub type Link = pipeline::Link<f64>;
pub type Scenario = pipeline::Scenario<f64>;
pub type PacketTimeline = pipeline::PacketTimeline<f64>;
pub type AoiTrace = aoi::AoiTrace<f64>;
pub type PlacementSolution = placement::PlacementSolution<f64>;
pub type AppendixConstants = placement::AppendixConstants<f64>;

/// Exact rational scalar for the pipeline and sawtooth.
pub type Exact = num_rational::Rational64;
pub type ExactTimeline = pipeline::PacketTimeline<Exact>;
pub type ExactTrace = aoi::AoiTrace<Exact>;
