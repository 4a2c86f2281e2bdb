//! Heights of thin-group orbits over imaginary quadratic orders: orbit-ball
//! enumeration, height forms, local densities, exponential sums, and an exact
//! circle-method decomposition of smoothed representation counts.

pub mod acceptance;
pub mod circle;
pub mod error;
pub mod expsum;
pub mod group;
pub mod local;
pub mod qform;
pub mod ring;

pub use error::{Error, Result};
