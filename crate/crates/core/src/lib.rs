#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Phase-space machinery for generalized Gaussian cat states.

pub mod cat;
pub mod error;
pub mod kerr;
pub mod linalg;
pub mod lindblad;
pub mod oracle;
pub mod semiclassical;
pub mod states;
pub mod symplectic;
pub mod verify;

pub use error::{Error, Result};

/// Library version embedded in emitted artifacts.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
