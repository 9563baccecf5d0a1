// `!(x > 0.0)` style guards deliberately reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod mixed_space;
pub mod piecewise;
pub mod quadrature;
pub mod reconstruction;
pub mod rng;
pub mod sampling;

pub use error::{Error, Result};
