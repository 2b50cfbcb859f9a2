#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]
extern crate alloc;

pub mod baselines;
pub mod cone;
pub mod error;
pub mod matrix;
pub mod metrics;
pub mod nnls;
pub mod onmf;
pub mod pipeline;

pub use error::{Error, Result};
