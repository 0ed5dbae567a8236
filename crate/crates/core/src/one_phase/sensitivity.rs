//! How the test outcome depends on the assumed coefficient of variation of
//! the benchmark, with `σ_t = η·|cci_t|`.

use serde::{Deserialize, Serialize};

use super::validation::{differences, ValidationTest};
use super::IndexSeries;
use crate::error::{Error, Result};
use crate::numkit::{chisq_isf, chisq_sf};

/// `σ_t = η·|cci_t|`; every benchmark value must be non-zero.
pub fn sigma_from_cv(cci: &IndexSeries, eta: f64) -> Result<Vec<f64>> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Parameter(format!("coefficient of variation must be positive, got {eta}")));
    }
    if let Some(i) = cci.values.iter().position(|v| *v == 0.0) {
        return Err(Error::ZeroBenchmark(cci.periods[i].clone()));
    }
    Ok(cci.values.iter().map(|v| eta * v.abs()).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivityCurve {
    pub etas: Vec<f64>,
    pub statistics: Vec<f64>,
    pub p_values: Vec<f64>,
    /// CV above which the test stops rejecting; `None` when the statistic
    /// is exactly zero.
    pub threshold_eta: Option<f64>,
    pub alpha: f64,
    pub df: u32,
    /// Statistic at unit CV; `D(η) = D(1)/η²`.
    pub unit_statistic: f64,
}

impl SensitivityCurve {
    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["eta", "D", "p_value"])?;
        for ((e, d), p) in self.etas.iter().zip(&self.statistics).zip(&self.p_values) {
            w.write_record([e.to_string(), d.to_string(), p.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Evaluates the test along `eta_grid` and locates the threshold CV in
/// closed form, `η* = sqrt(D(1) / q)` with `q` the upper-`alpha` quantile.
pub fn sensitivity_sweep(
    cci: &IndexSeries,
    smi: &IndexSeries,
    eta_grid: &[f64],
    alpha: f64,
) -> Result<SensitivityCurve> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if eta_grid.is_empty() {
        return Err(Error::Parameter("empty CV grid".into()));
    }
    if eta_grid[0] <= 0.0 || eta_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter("CV grid must be positive and strictly increasing".into()));
    }
    let x = differences(cci, smi)?;
    let unit = ValidationTest::diagonal(&sigma_from_cv(cci, 1.0)?, None)?;
    let d1 = unit.statistic(&x)?;
    let df = unit.df();

    let mut statistics = Vec::with_capacity(eta_grid.len());
    let mut p_values = Vec::with_capacity(eta_grid.len());
    for &eta in eta_grid {
        let d = d1 / (eta * eta);
        statistics.push(d);
        p_values.push(chisq_sf(d, df)?);
    }
    let q = chisq_isf(alpha, df)?;
    let threshold_eta = (d1 > 0.0).then(|| (d1 / q).sqrt());
    Ok(SensitivityCurve {
        etas: eta_grid.to_vec(),
        statistics,
        p_values,
        threshold_eta,
        alpha,
        df,
        unit_statistic: d1,
    })
}

/// Threshold CV found from the grid: the first bracket where the p-value
/// crosses `alpha` is refined by bisection, each step a full re-run of the
/// test at that CV. Independent of the `η⁻²` scale law.
pub fn bisect_threshold(
    cci: &IndexSeries,
    smi: &IndexSeries,
    eta_grid: &[f64],
    alpha: f64,
    tol: f64,
) -> Result<Option<f64>> {
    let x = differences(cci, smi)?;
    let p_at = |eta: f64| -> Result<f64> {
        let t = ValidationTest::diagonal(&sigma_from_cv(cci, eta)?, None)?;
        Ok(t.run(&x)?.p_value)
    };
    let mut prev: Option<(f64, f64)> = None;
    for &eta in eta_grid {
        let p = p_at(eta)?;
        if let Some((lo_eta, lo_p)) = prev {
            if lo_p <= alpha && p > alpha {
                let (mut lo, mut hi) = (lo_eta, eta);
                while hi - lo > tol {
                    let mid = 0.5 * (lo + hi);
                    if p_at(mid)? <= alpha {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return Ok(Some(0.5 * (lo + hi)));
            }
        }
        prev = Some((eta, p));
    }
    Ok(None)
}
