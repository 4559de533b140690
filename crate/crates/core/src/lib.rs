//! Sums of Hecke eigenvalues over holomorphic newforms of arbitrary level,
//! evaluated through the Petersson formula, plus one-level density tooling.

pub mod arith;
pub mod basis;
pub mod bessel;
pub mod density;
pub mod error;
pub mod kloosterman;
pub mod newform_sums;
pub mod oracles;
pub mod petersson;
pub mod summation;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use arith::{factor, FactoredInteger};
pub use error::{Error, Result};
