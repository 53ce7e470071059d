// Negated comparisons such as `!(x > 0.0)` are used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod discretization;
pub mod eigensolver;
pub mod error;
pub mod flux;
pub mod linalg;
pub mod model;
pub mod quadrature;
pub mod singularity;

pub use error::{Error, Result};
