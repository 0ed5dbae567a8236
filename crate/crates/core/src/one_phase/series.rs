use std::cmp::Ordering;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Period labels compare numerically when both are integers, otherwise as
/// strings (which orders `YYYY-MM` labels correctly).
pub fn compare_periods(a: &str, b: &str) -> Ordering {
    match (a.parse::<i64>(), b.parse::<i64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        _ => a.cmp(b),
    }
}

fn check_increasing(periods: &[String]) -> Result<()> {
    for w in periods.windows(2) {
        if compare_periods(&w[0], &w[1]) != Ordering::Less {
            return Err(Error::Misaligned(format!(
                "periods not strictly increasing at {:?} -> {:?}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// A monthly index: one value per period, optionally with post counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexSeries {
    pub periods: Vec<String>,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post_counts: Option<Vec<u64>>,
}

impl IndexSeries {
    pub fn new(periods: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if periods.len() != values.len() {
            return Err(Error::InvalidDimension(format!(
                "{} periods but {} values",
                periods.len(),
                values.len()
            )));
        }
        check_increasing(&periods)?;
        Ok(Self {
            periods,
            values,
            post_counts: None,
        })
    }

    pub fn with_counts(periods: Vec<String>, values: Vec<f64>, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != values.len() {
            return Err(Error::InvalidDimension("post counts length mismatch".into()));
        }
        let mut s = Self::new(periods, values)?;
        s.post_counts = Some(counts);
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn write_smi_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["period", "m", "smi"])?;
        let counts = self.post_counts.clone().unwrap_or_default();
        for (i, (p, v)) in self.periods.iter().zip(&self.values).enumerate() {
            let m = counts.get(i).map(u64::to_string).unwrap_or_default();
            w.write_record([p.as_str(), m.as_str(), v.to_string().as_str()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
struct PairedRow {
    period: String,
    cci: f64,
    smi: f64,
    #[serde(default)]
    sigma: Option<f64>,
}

/// Benchmark and social media index over the same periods, as read from
/// `period,cci,smi[,sigma]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairedSeries {
    pub periods: Vec<String>,
    pub cci: Vec<f64>,
    pub smi: Vec<f64>,
    pub sigma: Option<Vec<f64>>,
}

impl PairedSeries {
    pub fn from_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file).map_err(|e| match e {
            Error::Parse { message, .. } => Error::parse(path, message),
            other => other,
        })
    }

    /// Lines starting with `#` are comments.
    pub fn from_reader(rdr: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(rdr);
        let mut rows = Vec::new();
        for (i, row) in rdr.deserialize::<PairedRow>().enumerate() {
            rows.push(row.map_err(|e| Error::parse("<series>", format!("record {}: {e}", i + 1)))?);
        }
        if rows.is_empty() {
            return Err(Error::parse("<series>", "no rows"));
        }
        let with_sigma = rows.iter().filter(|r| r.sigma.is_some()).count();
        if with_sigma != 0 && with_sigma != rows.len() {
            return Err(Error::parse("<series>", "sigma column is only partially filled"));
        }
        let periods: Vec<String> = rows.iter().map(|r| r.period.clone()).collect();
        check_increasing(&periods)?;
        Ok(Self {
            periods,
            cci: rows.iter().map(|r| r.cci).collect(),
            smi: rows.iter().map(|r| r.smi).collect(),
            sigma: (with_sigma > 0).then(|| rows.iter().map(|r| r.sigma.unwrap()).collect()),
        })
    }

    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    pub fn cci_series(&self) -> IndexSeries {
        IndexSeries {
            periods: self.periods.clone(),
            values: self.cci.clone(),
            post_counts: None,
        }
    }

    pub fn smi_series(&self) -> IndexSeries {
        IndexSeries {
            periods: self.periods.clone(),
            values: self.smi.clone(),
            post_counts: None,
        }
    }
}

const BUNDLED_CSV: &str = include_str!("../../data/cci_smi_27.csv");

/// The bundled 27-month benchmark/sentiment pair. Values were read off a
/// chart by eye and are approximate.
pub fn bundled_series() -> PairedSeries {
    PairedSeries::from_reader(BUNDLED_CSV.as_bytes()).expect("bundled fixture parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_shape() {
        let t = bundled_series();
        assert_eq!(t.len(), 27);
        assert_eq!(t.cci[0], -17.0);
        assert_eq!(t.smi[17], -29.35);
        assert_eq!(t.cci[26], -29.0);
        assert!(t.sigma.is_none());
    }

    #[test]
    fn period_ordering() {
        assert_eq!(compare_periods("2", "10"), Ordering::Less);
        assert_eq!(compare_periods("2014-02", "2014-10"), Ordering::Less);
        assert!(IndexSeries::new(vec!["2".into(), "1".into()], vec![0.0, 0.0]).is_err());
        assert!(IndexSeries::new(vec!["1".into(), "1".into()], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn paired_with_sigma() {
        let csv = "period,cci,smi,sigma\n2014-01,-3,-2,1.5\n2014-02,-4,-1,2\n";
        let p = PairedSeries::from_reader(csv.as_bytes()).unwrap();
        assert_eq!(p.sigma, Some(vec![1.5, 2.0]));
        let partial = "period,cci,smi,sigma\n1,-3,-2,1.5\n2,-4,-1,\n";
        assert!(PairedSeries::from_reader(partial.as_bytes()).is_err());
        assert!(PairedSeries::from_reader("period,cci,smi\n1,x,2\n".as_bytes()).is_err());
    }
}
