// `!(x >= 0.0)` style checks are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cli;
pub mod error;
pub mod io;
pub mod synth;

pub use error::{CliError, CliResult};
