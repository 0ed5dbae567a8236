//! Two-phase route: geolocated posts become a pseudo survey dataset of
//! residence.
//!
//! The steps are [`merge_clean`] (merge the streaming and broker extracts,
//! drop unusable posts), [`dbscan_account`] (cluster each account's posts),
//! [`classify_cluster`] (nearest gazetteer address decides the address
//! type), [`select_dominant`] (largest residential cluster) and
//! [`label_span`]. [`build_pseudo_survey`] runs the per-account steps and
//! emits one [`PseudoSurveyRecord`] per account.

mod classify;
mod clean;
mod dbscan;
pub mod geo;
mod io;
mod model;
mod pipeline;

pub use classify::{classify_cluster, label_span, select_dominant, Gazetteer, SHORT_TERM_DAYS};
pub use clean::{merge_clean, MergeOutcome};
pub use dbscan::dbscan_account;
pub use io::{read_geo_jsonl, read_jsonl, write_json, write_jsonl};
pub use model::{
    AddressType, Cluster, GazetteerEntry, GeoPost, LatLon, PipelineErrorReport, PseudoSurveyRecord, Residence,
    Source, SpanLabel,
};
pub use pipeline::{build_pseudo_survey, PipelineParams};
