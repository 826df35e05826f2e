//! Graph calculus over finite-dimensional cH-algebras.
//!
//! The crate builds genus-expansion potentials as formal sums of labeled
//! trivalent graphs, evaluates graphs over concrete algebra instances with
//! full Koszul sign tracking, normalizes graph sums symbolically and checks
//! the genus-2 three-point strata relation both symbolically and numerically.

pub mod chalg;
pub mod contract;
pub mod error;
pub mod genexp;
pub mod linalg;
pub mod oracle;
pub mod rational;
pub mod rewrite;
pub mod series;
pub mod strata;
pub mod supergraph;
pub mod verify;

pub use error::{Error, Result};
pub use rational::Rational;
