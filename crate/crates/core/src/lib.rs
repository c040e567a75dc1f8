// Range checks are written as `!(x > lo)` on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod gaussian;
pub mod optimize;
pub mod protocols;
pub mod security;
pub mod sweeps;
pub mod validation;

pub use error::{Error, Result};
pub use exec::Execution;
