//! Monte Carlo check of the test's null distribution.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::validation::ValidationTest;
use crate::error::{Error, Result};
use crate::numkit::{chisq_sf, sample_normal, substream_rng};

const BATCH: usize = 1_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSummary {
    pub n_sims: usize,
    pub alpha: f64,
    pub df: u32,
    pub rejection_rate: f64,
    pub mean_statistic: f64,
    pub variance_statistic: f64,
}

/// Simulates `X_t = mu + e_t`, `e_t ~ N(0, σ_t²)`, and reports how often the
/// test rejects at `alpha` along with the first two moments of `D`.
///
/// Simulations run in batches of 1000, batch `b` drawing from stream `b` of
/// `seed`, so the result does not depend on thread scheduling.
pub fn calibrate_null(
    sigma: &[f64],
    mu: f64,
    n_sims: usize,
    alpha: f64,
    seed: u64,
) -> Result<CalibrationSummary> {
    if n_sims < 1_000 {
        return Err(Error::Parameter(format!("need at least 1000 simulations, got {n_sims}")));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Parameter(format!("alpha out of range: {alpha}")));
    }
    let test = ValidationTest::diagonal(sigma, None)?;
    let df = test.df();
    let n_batches = n_sims.div_ceil(BATCH);

    let stats: Vec<f64> = (0..n_batches)
        .into_par_iter()
        .map(|b| -> Result<Vec<f64>> {
            let mut rng = substream_rng(seed, b as u64);
            let size = BATCH.min(n_sims - b * BATCH);
            let mut x = vec![0.0; sigma.len()];
            let mut out = Vec::with_capacity(size);
            for _ in 0..size {
                for (xi, &s) in x.iter_mut().zip(sigma) {
                    *xi = sample_normal(&mut rng, mu, s);
                }
                out.push(test.statistic(&x)?);
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .concat();

    let mut rejections = 0usize;
    for &d in &stats {
        if chisq_sf(d, df)? <= alpha {
            rejections += 1;
        }
    }
    let n = stats.len() as f64;
    let mean = stats.iter().sum::<f64>() / n;
    let var = stats.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(CalibrationSummary {
        n_sims,
        alpha,
        df,
        rejection_rate: rejections as f64 / n,
        mean_statistic: mean,
        variance_statistic: var,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_zero_never_rejects() {
        let s = calibrate_null(&[1.0; 5], 0.0, 1_000, 0.0, 3).unwrap();
        assert_eq!(s.rejection_rate, 0.0);
    }

    #[test]
    fn reproducible_for_seed() {
        let sigma = [1.0, 2.0, 3.0, 0.5];
        let a = calibrate_null(&sigma, -3.0, 2_500, 0.05, 17).unwrap();
        let b = calibrate_null(&sigma, -3.0, 2_500, 0.05, 17).unwrap();
        assert_eq!(a, b);
        let c = calibrate_null(&sigma, -3.0, 2_500, 0.05, 18).unwrap();
        assert_ne!(a.mean_statistic, c.mean_statistic);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(calibrate_null(&[1.0; 4], 0.0, 999, 0.05, 1).is_err());
        assert!(calibrate_null(&[1.0, 0.0], 0.0, 1_000, 0.05, 1).is_err());
        assert!(calibrate_null(&[1.0; 4], 0.0, 1_000, 1.5, 1).is_err());
    }

    #[test]
    fn moments_near_chi_square() {
        let sigma: Vec<f64> = (1..=10).map(|i| i as f64 * 0.5).collect();
        let s = calibrate_null(&sigma, 2.0, 20_000, 0.05, 5).unwrap();
        assert!((s.mean_statistic - 9.0).abs() / 9.0 < 0.02);
        assert!((s.variance_statistic - 18.0).abs() / 18.0 < 0.05);
        assert!((s.rejection_rate - 0.05).abs() < 0.01);
    }
}
