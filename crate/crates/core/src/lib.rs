//! Centralized multi-node repair for regenerating codes.
//!
//! The crate has two halves. [`tradeoff`] computes the functional
//! storage/bandwidth tradeoff exactly over the rationals. The code modules
//! ([`pm`], [`ia`], [`mds`], [`ambr`]) build concrete codes over GF(2^m) and
//! repair `e` failed nodes at once through a central repairer.

pub mod ambr;
pub mod error;
pub mod framework;
pub mod gf;
pub mod ia;
pub mod matrix;
pub mod mds;
pub mod pm;
pub mod tradeoff;
pub mod workbench;

pub use error::{Error, Result};
pub use gf::{Elem, Field};
pub use matrix::Matrix;
