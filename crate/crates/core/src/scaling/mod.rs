//! Optimal scaling: monotone regression and the categorical regression engine.

pub mod catreg;
pub mod pava;

pub use catreg::{catreg_fit, CatregConfig, CatregFit};
pub use pava::{pava, Direction};
