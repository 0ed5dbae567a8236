//! Small numerical kernel: dense matrices, Cholesky, chi-square tails,
//! correlation and seeded normal draws.
//!
//! Everything here is sized for series of a few hundred points at most, so
//! the algorithms are the plain textbook ones.

mod chisq;
mod matrix;
mod rng;
mod stats;

pub use chisq::{chisq_cdf, chisq_isf, chisq_pdf, chisq_sf, ln_gamma, regularized_gamma_p, regularized_gamma_q};
pub use matrix::{centering_projection, cholesky_lower, forward_substitution, Matrix};
pub use rng::{sample_normal, seeded_rng, substream_rng, SimRng};
pub use stats::{mean, pearson_correlation, sample_variance};
