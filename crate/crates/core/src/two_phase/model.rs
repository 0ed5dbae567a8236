use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::population::{AccountId, PostId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// Streaming API extract.
    Api,
    /// Purchased reseller extract.
    Broker,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeoPost {
    pub post_id: PostId,
    pub account_id: AccountId,
    pub timestamp: DateTime<Utc>,
    pub lat: f64,
    pub lon: f64,
    pub source: Source,
    pub has_gps: bool,
    pub country: String,
    pub bot_flag: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AddressType {
    Residential,
    Commercial,
    Other,
}

impl std::str::FromStr for AddressType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "residential" => Ok(AddressType::Residential),
            "commercial" => Ok(AddressType::Commercial),
            "other" | "others" => Ok(AddressType::Other),
            other => Err(format!("unknown address type {other:?}")),
        }
    }
}

impl std::fmt::Display for AddressType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AddressType::Residential => "residential",
            AddressType::Commercial => "commercial",
            AddressType::Other => "other",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GazetteerEntry {
    pub address_id: String,
    pub lat: f64,
    pub lon: f64,
    pub address_type: AddressType,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpanLabel {
    ShortTerm,
    LongTerm,
}

/// Posts of one account grouped by DBSCAN.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub account_id: AccountId,
    /// Sorted ascending.
    pub member_post_ids: Vec<PostId>,
    pub centroid: LatLon,
    pub valid: bool,
    pub address_type: Option<AddressType>,
    /// Nearest gazetteer entry, set by classification.
    pub address_id: Option<String>,
    pub first_timestamp: DateTime<Utc>,
    pub last_timestamp: DateTime<Utc>,
    pub span_days: f64,
    pub span_label: Option<SpanLabel>,
    pub dominant: bool,
}

impl Cluster {
    pub fn len(&self) -> usize {
        self.member_post_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.member_post_ids.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residence {
    pub address_id: String,
    pub centroid: LatLon,
}

/// One account-level unit of the pseudo survey dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PseudoSurveyRecord {
    pub account_id: AccountId,
    pub residence: Option<Residence>,
    /// Span of the dominant cluster, when there is one.
    pub span_label: Option<SpanLabel>,
    pub n_posts: usize,
    /// Valid clusters only.
    pub n_clusters: usize,
    pub provenance: Vec<String>,
}

/// Tallies of what the pipeline dropped or could not use.
///
/// `duplicates_merged + rejected_malformed + removed_*` equals
/// `raw_posts - clean_posts`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineErrorReport {
    pub raw_posts: usize,
    pub clean_posts: usize,
    pub rejected_malformed: usize,
    pub duplicates_merged: usize,
    pub removed_bots: usize,
    pub removed_no_gps: usize,
    pub removed_non_country: usize,
    pub removed_privacy: usize,
    /// Clean posts outside every valid cluster (noise included).
    pub invalid_cluster_posts: usize,
    pub accounts_without_residence: usize,
}

impl PipelineErrorReport {
    pub fn removed_total(&self) -> usize {
        self.rejected_malformed
            + self.duplicates_merged
            + self.removed_bots
            + self.removed_no_gps
            + self.removed_non_country
            + self.removed_privacy
    }

    /// Adds the clustering-stage tallies of `other`.
    pub fn absorb_clustering(&mut self, other: &PipelineErrorReport) {
        self.invalid_cluster_posts += other.invalid_cluster_posts;
        self.accounts_without_residence += other.accounts_without_residence;
    }
}
