//! Tripartite information measures, monogamy of mutual information, and
//! two-qubit dephasing dynamics in finite bosonic thermal baths.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dephasing;
pub mod error;
pub mod info;
pub mod linalg;
pub mod nm;
pub mod oracle;
pub mod scenario;
pub mod states;
pub mod verify;

pub use error::{Error, Result};
