//! Kernel recursive least squares filters driven by quantized error-entropy
//! criteria, plus the signal generators, analysis tools and experiment runner
//! used to study them.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod criteria;
pub mod error;
pub mod experiments;
pub mod filters;
pub mod math;
pub mod properties;
pub mod quantizer;
pub mod signals;

pub use error::{KafError, Result};
