#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

//! Exact simulation of push rumour spreading on the complete graph, together
//! with the numerics of its limiting runtime law.

pub mod error;
pub mod gumbel;
pub mod limit_c;
pub mod numeric;
pub mod recursions;
pub mod simulator;
pub mod validation;

pub use error::{Error, Result};
