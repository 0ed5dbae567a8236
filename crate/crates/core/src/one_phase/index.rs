use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, Datelike, Utc};
use serde::{Deserialize, Serialize};

use super::IndexSeries;
use crate::error::{parse_timestamp, Error, RecordError, Result};
use crate::population::{AccountId, PostId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Sentiment {
    Negative,
    Neutral,
    Positive,
}

impl Sentiment {
    pub fn score(self) -> i8 {
        match self {
            Sentiment::Negative => -1,
            Sentiment::Neutral => 0,
            Sentiment::Positive => 1,
        }
    }
}

impl TryFrom<i8> for Sentiment {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            -1 => Ok(Sentiment::Negative),
            0 => Ok(Sentiment::Neutral),
            1 => Ok(Sentiment::Positive),
            other => Err(format!("sentiment must be -1, 0 or 1, got {other}")),
        }
    }
}

impl From<Sentiment> for i8 {
    fn from(s: Sentiment) -> i8 {
        s.score()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SentimentPost {
    pub post_id: PostId,
    pub account_id: AccountId,
    pub timestamp: DateTime<Utc>,
    pub sentiment: Sentiment,
}

/// UTC calendar month, `YYYY-MM`.
pub fn month_label(t: &DateTime<Utc>) -> String {
    format!("{:04}-{:02}", t.year(), t.month())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SmiValue {
    pub smi: f64,
    pub m: u64,
}

fn smi_of<'a>(posts: impl Iterator<Item = &'a SentimentPost>) -> Option<SmiValue> {
    let (mut m, mut net) = (0u64, 0i64);
    for p in posts {
        m += 1;
        net += i64::from(p.sentiment.score());
    }
    (m > 0).then(|| SmiValue {
        smi: 100.0 * net as f64 / m as f64,
        m,
    })
}

/// Net positive share of the posts falling in `period` (a `YYYY-MM` label).
pub fn compute_smi(posts: &[SentimentPost], period: &str) -> Result<SmiValue> {
    smi_of(posts.iter().filter(|p| month_label(&p.timestamp) == period))
        .ok_or_else(|| Error::EmptyPeriod(period.to_owned()))
}

/// Index for every month that has at least one post, in calendar order.
pub fn monthly_smi(posts: &[SentimentPost]) -> Result<IndexSeries> {
    let mut by_month: BTreeMap<String, Vec<&SentimentPost>> = BTreeMap::new();
    for p in posts {
        by_month.entry(month_label(&p.timestamp)).or_default().push(p);
    }
    if by_month.is_empty() {
        return Err(Error::EmptyPeriod("no posts".into()));
    }
    let mut periods = Vec::with_capacity(by_month.len());
    let mut values = Vec::with_capacity(by_month.len());
    let mut counts = Vec::with_capacity(by_month.len());
    for (month, ps) in by_month {
        let v = smi_of(ps.into_iter()).expect("non-empty bucket");
        periods.push(month);
        values.push(v.smi);
        counts.push(v.m);
    }
    IndexSeries::with_counts(periods, values, counts)
}

#[derive(Debug, Deserialize)]
struct RawPost {
    post_id: String,
    account_id: String,
    timestamp: String,
    sentiment: String,
}

/// Reads `post_id,account_id,timestamp,sentiment`. Bad rows are collected
/// with their line numbers rather than aborting the read.
pub fn read_posts_csv(path: &Path) -> Result<(Vec<SentimentPost>, Vec<RecordError>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut posts = Vec::new();
    let mut rejects = Vec::new();
    for (i, row) in rdr.deserialize::<RawPost>().enumerate() {
        let line = i + 2;
        let parsed = row
            .map_err(|e| e.to_string())
            .and_then(|r| {
                if r.post_id.is_empty() || r.account_id.is_empty() {
                    return Err("empty identifier".to_owned());
                }
                let score: i8 = r
                    .sentiment
                    .parse()
                    .map_err(|_| format!("bad sentiment {:?}", r.sentiment))?;
                Ok(SentimentPost {
                    post_id: r.post_id.into(),
                    account_id: r.account_id.into(),
                    timestamp: parse_timestamp(&r.timestamp)?,
                    sentiment: Sentiment::try_from(score)?,
                })
            });
        match parsed {
            Ok(p) => posts.push(p),
            Err(message) => rejects.push(RecordError { line, message }),
        }
    }
    Ok((posts, rejects))
}

pub fn write_posts_csv(posts: &[SentimentPost], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["post_id", "account_id", "timestamp", "sentiment"])?;
    for p in posts {
        w.write_record([
            p.post_id.as_str(),
            p.account_id.as_str(),
            &p.timestamp.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            &p.sentiment.score().to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn post(id: &str, month: u32, s: i8) -> SentimentPost {
        SentimentPost {
            post_id: id.into(),
            account_id: "acc".into(),
            timestamp: Utc.with_ymd_and_hms(2014, month, 15, 12, 0, 0).unwrap(),
            sentiment: Sentiment::try_from(s).unwrap(),
        }
    }

    #[test]
    fn smi_formula() {
        let posts = vec![post("1", 4, 1), post("2", 4, 1), post("3", 4, -1), post("4", 4, 0)];
        let v = compute_smi(&posts, "2014-04").unwrap();
        assert_eq!(v.smi, 25.0);
        assert_eq!(v.m, 4);
    }

    #[test]
    fn smi_extremes() {
        let pos: Vec<_> = (0..5).map(|i| post(&i.to_string(), 4, 1)).collect();
        assert_eq!(compute_smi(&pos, "2014-04").unwrap().smi, 100.0);
        let neu: Vec<_> = (0..5).map(|i| post(&i.to_string(), 4, 0)).collect();
        assert_eq!(compute_smi(&neu, "2014-04").unwrap().smi, 0.0);
    }

    #[test]
    fn empty_period_errors() {
        let posts = vec![post("1", 4, 1)];
        assert!(matches!(compute_smi(&posts, "2014-05"), Err(Error::EmptyPeriod(_))));
        assert!(monthly_smi(&[]).is_err());
    }

    #[test]
    fn months_bucket_in_utc() {
        let late = SentimentPost {
            timestamp: parse_timestamp("2014-04-30T23:30:00-02:00").unwrap(),
            ..post("x", 4, 1)
        };
        assert_eq!(month_label(&late.timestamp), "2014-05");
    }

    #[test]
    fn monthly_series() {
        let posts = vec![post("1", 4, 1), post("2", 5, -1), post("3", 5, 0), post("4", 4, 1)];
        let s = monthly_smi(&posts).unwrap();
        assert_eq!(s.periods, vec!["2014-04", "2014-05"]);
        assert_eq!(s.values, vec![100.0, -50.0]);
        assert_eq!(s.post_counts, Some(vec![2, 2]));
    }

    #[test]
    fn sentiment_range_enforced() {
        assert!(Sentiment::try_from(2).is_err());
        assert!(serde_json::from_str::<Sentiment>("-1").is_ok());
        assert!(serde_json::from_str::<Sentiment>("3").is_err());
    }

    #[test]
    fn csv_rejects_listed_by_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("posts.csv");
        std::fs::write(
            &path,
            "post_id,account_id,timestamp,sentiment\n\
             p1,a1,2014-04-01T10:00:00Z,1\n\
             p2,a1,not-a-time,1\n\
             p3,a2,2014-04-02T10:00:00Z,5\n\
             p4,a2,2014-04-02,-1\n",
        )
        .unwrap();
        let (posts, rejects) = read_posts_csv(&path).unwrap();
        assert_eq!(posts.len(), 2);
        assert_eq!(rejects.iter().map(|r| r.line).collect::<Vec<_>>(), vec![3, 4]);
    }

    proptest::proptest! {
        #[test]
        fn smi_is_scaled_mean(scores in proptest::collection::vec(-1i8..=1, 1..200)) {
            let posts: Vec<_> = scores.iter().enumerate().map(|(i, &s)| post(&i.to_string(), 6, s)).collect();
            let v = compute_smi(&posts, "2014-06").unwrap();
            let mean = scores.iter().map(|&s| f64::from(s)).sum::<f64>() / scores.len() as f64;
            proptest::prop_assert!((v.smi - 100.0 * mean).abs() < 1e-9);
            proptest::prop_assert!((-100.0..=100.0).contains(&v.smi));
        }
    }
}
