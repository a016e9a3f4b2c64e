//! Secure omniscience and secret key agreement for finite linear sources.
//!
//! The crate covers
//! - arithmetic over GF(p^k) and dense linear algebra ([`field`], [`matrix`]),
//! - finite linear sources and their rank-based information measures ([`fls`]),
//! - tree-PIN sources: reduction, closed-form capacities and explicit
//!   omniscience schemes ([`treepin`], [`scheme`]),
//! - the communication-for-omniscience linear program ([`lp`]),
//! - numerical tools for general discrete sources ([`classical`]),
//! - file formats and report serialization ([`io`]).

pub mod classical;
pub mod entropy;
pub mod error;
pub mod field;
pub mod fls;
pub mod io;
pub mod lp;
pub mod matrix;
pub mod scheme;
pub mod suite;
pub mod treepin;

pub use entropy::EntropyValue;
pub use error::{Error, Result, SearchFailure};
pub use field::{FieldContext, GfElement};
pub use matrix::MatrixGf;
