// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod linalg;
pub mod model;
pub mod optics;
pub mod propagator;
pub mod sambe;
pub mod spectral;
pub mod superop;
pub mod verify;

pub use error::{Error, Result};
