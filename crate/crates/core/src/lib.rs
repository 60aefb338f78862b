//! Frame-repetition coverage model for IoT devices served by LEO satellites.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: zenith/elevation mapping, slant range and cap areas.
//! * [`channel`]: LoS probability, free-space gain and the lognormal
//!   LoS/NLoS excess-gain mixture.
//! * [`repetition`]: elevation-shaped duty cycle and repetition counts.
//! * [`zenith_distribution`]: distribution of the serving zenith angle over
//!   active devices.
//! * [`link_analysis`]: mean interference and success probabilities, up to
//!   constellation level.
//! * [`montecarlo`]: seeded stochastic estimators for every analytic quantity.
//! * [`sweep`]: grid search over the tuning factor and minimum elevation.
//!
//! All quantities are SI, linear and in radians. The crate is `no_std`
//! (with `alloc`); enable the `std` feature for `std::error::Error` glue.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod channel;
pub mod error;
pub mod geometry;
pub mod link_analysis;
pub mod montecarlo;
pub mod quadrature;
pub mod repetition;
pub mod stats;
pub mod sweep;
pub mod zenith_distribution;

pub use error::{Error, Result};
