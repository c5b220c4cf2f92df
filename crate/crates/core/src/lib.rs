//! Certified bounds for Seshadri constants of polarized toric varieties.
//!
//! Everything here is exact: polytopes carry rational vertices and integer
//! halfspaces, jet matrices have big-integer entries, and ranks are computed
//! either by fraction-free elimination or by modular screening with explicit
//! certification flags. Floating point never enters a computation, only
//! report formatting.

pub mod bound_engine;
pub mod estimation_methods;
pub mod jet_matrix;
pub mod lattice_geometry;
pub mod linalg;
pub mod lp;

#[doc(hidden)]
pub mod oracle;

mod error;
mod hashing;

pub use error::Error;
pub use hashing::{canonical_hash, derive_seed};

/// Exact rational scalar used throughout the geometry and the engine.
pub type Rat = num_rational::BigRational;
/// Exact integer scalar (halfspace data, jet-matrix entries).
pub type Int = num_bigint::BigInt;

/// Result alias for fallible operations in this crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Engine version stamped into cache records; bumping it invalidates caches.
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

pub(crate) fn rat_from_i64(v: i64) -> Rat {
    Rat::from_integer(Int::from(v))
}

pub(crate) fn rat_is_integer(v: &Rat) -> bool {
    use num_traits::One;
    v.denom().is_one()
}
