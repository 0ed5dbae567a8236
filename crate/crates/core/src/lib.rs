//! Statistical analysis of social media data.
//!
//! Two workflows live here:
//!
//! - the *one-phase* route ([`one_phase`]): a monthly sentiment index computed
//!   straight from classified posts, plus a chi-square test of whether it
//!   tracks a survey benchmark up to a constant offset;
//! - the *two-phase* route ([`two_phase`]): geolocated posts are merged,
//!   cleaned and clustered per account, and the dominant residential cluster
//!   becomes a residence proxy in a pseudo survey dataset.
//!
//! [`population`] holds the post/account/user relations and coverage
//! accounting, [`simulator`] generates seeded ground truth for both routes,
//! and [`quality`] scores a pseudo survey dataset against that ground truth.

pub mod error;
pub mod numkit;
pub mod one_phase;
pub mod population;
pub mod quality;
pub mod simulator;
pub mod two_phase;

pub use error::{Error, RecordError, Result};
