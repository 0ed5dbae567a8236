//! Test of `H0: benchmark - index = const` over time.
//!
//! With `X = cci - smi` and benchmark covariance `Σ`, the centred vector
//! `PX` has covariance `PΣP`, which is singular along `1`. Dropping one
//! component leaves `X' ~ N(0, Q)`; whitening by the Cholesky factor of `Q`
//! gives `D = |L⁻¹X'|² ~ χ²(T-1)` under the null.

use serde::{Deserialize, Serialize};

use super::IndexSeries;
use crate::error::{Error, Result};
use crate::numkit::{centering_projection, chisq_sf, cholesky_lower, forward_substitution, Matrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    #[serde(rename = "D")]
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
    /// Zero-based index of the dropped component.
    pub deleted_index: usize,
}

impl TestResult {
    /// Rejection at level `alpha` uses `p <= alpha`.
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value <= alpha
    }
}

/// The test with its covariance already factorized, so many `X` vectors can
/// be scored cheaply.
#[derive(Clone, Debug)]
pub struct ValidationTest {
    projection: Matrix,
    factor: Matrix,
    deleted: usize,
}

impl ValidationTest {
    /// `cov` is the full `T x T` benchmark covariance; `deleted` defaults to
    /// the last component.
    pub fn new(cov: &Matrix, deleted: Option<usize>) -> Result<Self> {
        cov.check_symmetric()?;
        let n = cov.rows();
        let projection = centering_projection(n)?;
        let deleted = deleted.unwrap_or(n - 1);
        if deleted >= n {
            return Err(Error::InvalidDimension(format!(
                "deleted index {deleted} out of range for {n} periods"
            )));
        }
        let q = projection.sandwich(cov)?.without_row_col(deleted);
        let factor = cholesky_lower(&q)?;
        Ok(Self {
            projection,
            factor,
            deleted,
        })
    }

    /// Diagonal covariance from per-period standard deviations, all `> 0`.
    pub fn diagonal(sigma: &[f64], deleted: Option<usize>) -> Result<Self> {
        if let Some(i) = sigma.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::SingularCovariance(format!(
                "sigma at period index {i} is {}",
                sigma[i]
            )));
        }
        let var: Vec<f64> = sigma.iter().map(|s| s * s).collect();
        Self::new(&Matrix::from_diagonal(&var), deleted)
    }

    pub fn periods(&self) -> usize {
        self.projection.rows()
    }

    pub fn df(&self) -> u32 {
        (self.periods() - 1) as u32
    }

    pub fn statistic(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.periods() {
            return Err(Error::Misaligned(format!(
                "expected {} periods, got {}",
                self.periods(),
                x.len()
            )));
        }
        let mut px = self.projection.mul_vec(x)?;
        px.remove(self.deleted);
        let r = forward_substitution(&self.factor, &px)?;
        Ok(r.iter().map(|v| v * v).sum())
    }

    pub fn run(&self, x: &[f64]) -> Result<TestResult> {
        let statistic = self.statistic(x)?;
        let df = self.df();
        Ok(TestResult {
            statistic,
            df,
            p_value: chisq_sf(statistic, df)?,
            deleted_index: self.deleted,
        })
    }
}

pub(crate) fn differences(cci: &IndexSeries, smi: &IndexSeries) -> Result<Vec<f64>> {
    if cci.periods != smi.periods {
        return Err(Error::Misaligned("benchmark and index cover different periods".into()));
    }
    if cci.len() < 2 {
        return Err(Error::InvalidDimension(format!(
            "need at least two periods, got {}",
            cci.len()
        )));
    }
    Ok(cci.values.iter().zip(&smi.values).map(|(c, s)| c - s).collect())
}

/// Runs the test with a diagonal covariance built from `sigma`.
pub fn validation_test(
    cci: &IndexSeries,
    smi: &IndexSeries,
    sigma: &[f64],
    deleted_index: Option<usize>,
) -> Result<TestResult> {
    let x = differences(cci, smi)?;
    if sigma.len() != x.len() {
        return Err(Error::Misaligned(format!(
            "{} sigma values for {} periods",
            sigma.len(),
            x.len()
        )));
    }
    ValidationTest::diagonal(sigma, deleted_index)?.run(&x)
}

/// Runs the test with an arbitrary symmetric positive definite covariance.
pub fn validation_test_with_covariance(
    cci: &IndexSeries,
    smi: &IndexSeries,
    cov: &Matrix,
    deleted_index: Option<usize>,
) -> Result<TestResult> {
    let x = differences(cci, smi)?;
    if cov.rows() != x.len() {
        return Err(Error::Misaligned(format!(
            "{}x{} covariance for {} periods",
            cov.rows(),
            cov.cols(),
            x.len()
        )));
    }
    ValidationTest::new(cov, deleted_index)?.run(&x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::seeded_rng;
    use proptest::prelude::*;
    use rand::Rng;

    fn series(values: &[f64]) -> IndexSeries {
        let periods = (1..=values.len()).map(|i| i.to_string()).collect();
        IndexSeries::new(periods, values.to_vec()).unwrap()
    }

    // Weighted least squares route: for diagonal Σ the statistic equals
    // Σ w_t (X_t - X̄_w)², w_t = 1/σ_t², X̄_w the weighted mean.
    fn gls_statistic(x: &[f64], sigma: &[f64]) -> f64 {
        let w: Vec<f64> = sigma.iter().map(|s| 1.0 / (s * s)).collect();
        let mu = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / w.iter().sum::<f64>();
        x.iter().zip(&w).map(|(a, b)| b * (a - mu).powi(2)).sum()
    }

    #[test]
    fn constant_difference_gives_zero() {
        let cci = series(&[-5.0, -7.0, -2.0, -9.0]);
        let smi = series(&[-8.0, -10.0, -5.0, -12.0]);
        let r = validation_test(&cci, &smi, &[1.0, 2.0, 0.5, 3.0], None).unwrap();
        assert!(r.statistic.abs() < 1e-20);
        assert_eq!(r.p_value, 1.0);
        assert!(!r.rejects(0.05));
    }

    #[test]
    fn two_periods_by_hand() {
        // PΣP = σ²P for σ = 1; D = (x1 - x2)² / 2
        let r = validation_test(&series(&[3.0, 1.0]), &series(&[0.0, 0.0]), &[1.0, 1.0], None).unwrap();
        assert!((r.statistic - 2.0).abs() < 1e-12);
        assert_eq!(r.df, 1);
        assert_eq!(r.deleted_index, 1);
        assert!((r.p_value - 0.157_299_207_050_285_1).abs() < 1e-10);
    }

    #[test]
    fn matches_weighted_least_squares() {
        let x = [1.0, 4.0, -2.0, 0.5, 3.0, 7.0];
        let sigma = [1.0, 2.0, 0.7, 1.3, 2.2, 0.9];
        let t = ValidationTest::diagonal(&sigma, None).unwrap();
        let d = t.statistic(&x).unwrap();
        let oracle = gls_statistic(&x, &sigma);
        assert!((d - oracle).abs() < 1e-10 * oracle);
    }

    #[test]
    fn bundled_boundary_cv() {
        let t = super::super::bundled_series();
        let sigma: Vec<f64> = t.cci.iter().map(|c| 0.367 * c.abs()).collect();
        let r = validation_test(&t.cci_series(), &t.smi_series(), &sigma, None).unwrap();
        assert_eq!(r.df, 26);
        assert!((r.p_value - 0.05).abs() < 0.005, "p = {}", r.p_value);
    }

    #[test]
    fn error_paths() {
        let a = series(&[1.0, 2.0, 3.0]);
        let b = series(&[1.0, 2.0]);
        assert!(matches!(validation_test(&a, &b, &[1.0; 3], None), Err(Error::Misaligned(_))));
        assert!(matches!(
            validation_test(&a, &a, &[1.0, 0.0, 1.0], None),
            Err(Error::SingularCovariance(_))
        ));
        let one = series(&[1.0]);
        assert!(matches!(validation_test(&one, &one, &[1.0], None), Err(Error::InvalidDimension(_))));
        assert!(validation_test(&a, &a, &[1.0; 3], Some(3)).is_err());
        let shifted = IndexSeries::new(vec!["2".into(), "3".into(), "4".into()], vec![0.0; 3]).unwrap();
        assert!(matches!(validation_test(&a, &shifted, &[1.0; 3], None), Err(Error::Misaligned(_))));
    }

    #[test]
    fn full_covariance_route() {
        // AR(1)-style covariance, checked against the explicit pseudo-inverse
        // free formula D = r' Q⁻¹ r computed by brute-force Gaussian solve.
        let n = 5;
        let mut cov = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                cov[(i, j)] = 0.6f64.powi((i as i32 - j as i32).abs());
            }
        }
        let x = [0.3, -1.2, 2.5, 0.1, -0.7];
        let cci = series(&x);
        let smi = series(&[0.0; 5]);
        let r = validation_test_with_covariance(&cci, &smi, &cov, Some(2)).unwrap();

        let p = centering_projection(n).unwrap();
        let q = p.sandwich(&cov).unwrap().without_row_col(2);
        let mut px = p.mul_vec(&x).unwrap();
        px.remove(2);
        let sol = gauss_solve(&q, &px);
        let oracle: f64 = px.iter().zip(&sol).map(|(a, b)| a * b).sum();
        assert!((r.statistic - oracle).abs() < 1e-10 * oracle);
    }

    fn gauss_solve(a: &Matrix, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut m: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut row = a.row(i).to_vec();
                row.push(b[i]);
                row
            })
            .collect();
        for c in 0..n {
            let piv = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
            m.swap(c, piv);
            for r in (c + 1)..n {
                let f = m[r][c] / m[c][c];
                for k in c..=n {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
        let mut x = vec![0.0; n];
        for r in (0..n).rev() {
            let s: f64 = ((r + 1)..n).map(|k| m[r][k] * x[k]).sum();
            x[r] = (m[r][n] - s) / m[r][r];
        }
        x
    }

    proptest! {
        #[test]
        fn deleted_index_invariance(seed in 0u64..10_000, n in 2usize..30) {
            let mut rng = seeded_rng(seed);
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-40.0..40.0)).collect();
            let sigma: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..10.0)).collect();
            let base = ValidationTest::diagonal(&sigma, Some(0)).unwrap().statistic(&x).unwrap();
            for k in 1..n {
                let d = ValidationTest::diagonal(&sigma, Some(k)).unwrap().statistic(&x).unwrap();
                prop_assert!((d - base).abs() <= 1e-8 * base.abs().max(1e-300));
            }
        }

        #[test]
        fn location_and_scale(seed in 0u64..10_000, c in -100.0f64..100.0, k in 0.1f64..10.0) {
            let mut rng = seeded_rng(seed);
            let n = 12;
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-40.0..40.0)).collect();
            let sigma: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..10.0)).collect();
            let t = ValidationTest::diagonal(&sigma, None).unwrap();
            let d = t.statistic(&x).unwrap();
            let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
            prop_assert!((t.statistic(&shifted).unwrap() - d).abs() <= 1e-10 * d.max(1.0));
            let scaled: Vec<f64> = sigma.iter().map(|s| s * k.sqrt()).collect();
            let dk = ValidationTest::diagonal(&scaled, None).unwrap().statistic(&x).unwrap();
            prop_assert!((dk * k - d).abs() <= 1e-10 * d);
        }
    }
}
