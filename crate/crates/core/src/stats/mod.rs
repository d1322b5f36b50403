//! Least squares with inference, and the distribution functions behind it.

pub mod descriptive;
pub mod ols;
pub mod special;

pub use descriptive::{mean, pearson_r, population_sd, standardize};
pub use ols::{adjusted_r_squared, ols_fit, CoefficientStats, OlsFit};
pub use special::{ln_gamma, regularized_incomplete_beta, t_pvalue};
