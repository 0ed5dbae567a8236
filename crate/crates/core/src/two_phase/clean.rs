use std::collections::{BTreeMap, BTreeSet};

use super::{geo, GeoPost, PipelineErrorReport, Source};
use crate::error::RecordError;
use crate::population::{AccountId, PostId};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MergeOutcome {
    /// Sorted by post id.
    pub clean: Vec<GeoPost>,
    pub report: PipelineErrorReport,
    /// Malformed inputs; `line` is the 1-based position in the API list,
    /// then continues through the broker list.
    pub rejects: Vec<RecordError>,
}

fn malformed(p: &GeoPost) -> Option<String> {
    if p.post_id.as_str().is_empty() || p.account_id.as_str().is_empty() {
        return Some("empty identifier".into());
    }
    if !geo::valid_coordinates(p.lat, p.lon) {
        return Some(format!("coordinates out of range: ({}, {})", p.lat, p.lon));
    }
    if p.country.len() != 2 || !p.country.bytes().all(|b| b.is_ascii_alphabetic()) {
        return Some(format!("bad country code {:?}", p.country));
    }
    None
}

/// Merges the two extracts into one clean set.
///
/// Posts are deduplicated by id (the broker copy wins), then removed in
/// order if flagged as bot output, lacking GPS, outside `country`, or, for
/// API posts, belonging to an account with no surviving broker post. Each
/// removed post is tallied once, under the first rule it fails.
pub fn merge_clean(api_posts: &[GeoPost], broker_posts: &[GeoPost], country: &str) -> MergeOutcome {
    let mut report = PipelineErrorReport {
        raw_posts: api_posts.len() + broker_posts.len(),
        ..Default::default()
    };
    let mut rejects = Vec::new();
    let mut merged: BTreeMap<PostId, GeoPost> = BTreeMap::new();

    let tagged = api_posts
        .iter()
        .map(|p| (Source::Api, p))
        .chain(broker_posts.iter().map(|p| (Source::Broker, p)));
    for (i, (origin, post)) in tagged.enumerate() {
        if let Some(message) = malformed(post) {
            rejects.push(RecordError { line: i + 1, message });
            continue;
        }
        let mut post = post.clone();
        post.source = origin;
        match merged.get(&post.post_id) {
            None => {
                merged.insert(post.post_id.clone(), post);
            }
            Some(existing) => {
                report.duplicates_merged += 1;
                if origin == Source::Broker && existing.source == Source::Api {
                    merged.insert(post.post_id.clone(), post);
                }
            }
        }
    }
    report.rejected_malformed = rejects.len();

    let mut kept = Vec::with_capacity(merged.len());
    for post in merged.into_values() {
        if post.bot_flag {
            report.removed_bots += 1;
        } else if !post.has_gps {
            report.removed_no_gps += 1;
        } else if !post.country.eq_ignore_ascii_case(country) {
            report.removed_non_country += 1;
        } else {
            kept.push(post);
        }
    }

    let broker_accounts: BTreeSet<AccountId> = kept
        .iter()
        .filter(|p| p.source == Source::Broker)
        .map(|p| p.account_id.clone())
        .collect();
    let before = kept.len();
    kept.retain(|p| p.source == Source::Broker || broker_accounts.contains(&p.account_id));
    report.removed_privacy = before - kept.len();
    report.clean_posts = kept.len();

    MergeOutcome {
        clean: kept,
        report,
        rejects,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};

    fn post(id: &str, account: &str, source: Source) -> GeoPost {
        GeoPost {
            post_id: id.into(),
            account_id: account.into(),
            timestamp: Utc.with_ymd_and_hms(2014, 5, 1, 0, 0, 0).unwrap(),
            lat: 51.5,
            lon: -0.1,
            source,
            has_gps: true,
            country: "GB".into(),
            bot_flag: false,
        }
    }

    #[test]
    fn duplicate_keeps_broker_copy() {
        let api = vec![GeoPost { lat: 51.0, ..post("p1", "a", Source::Api) }];
        let broker = vec![post("p1", "a", Source::Broker)];
        let out = merge_clean(&api, &broker, "GB");
        assert_eq!(out.clean.len(), 1);
        assert_eq!(out.clean[0].source, Source::Broker);
        assert_eq!(out.clean[0].lat, 51.5);
        assert_eq!(out.report.duplicates_merged, 1);
        assert_eq!(out.report.removed_total(), out.report.raw_posts - out.report.clean_posts);
    }

    #[test]
    fn api_post_without_broker_account_is_dropped() {
        let api = vec![post("p1", "a", Source::Api), post("p2", "b", Source::Api)];
        let broker = vec![post("p3", "b", Source::Broker)];
        let out = merge_clean(&api, &broker, "GB");
        assert_eq!(out.report.removed_privacy, 1);
        let ids: Vec<_> = out.clean.iter().map(|p| p.post_id.as_str()).collect();
        assert_eq!(ids, vec!["p2", "p3"]);
    }

    #[test]
    fn each_rule_tallied() {
        let broker = vec![
            GeoPost { bot_flag: true, ..post("b1", "a", Source::Broker) },
            GeoPost { has_gps: false, ..post("b2", "a", Source::Broker) },
            GeoPost { country: "IE".into(), ..post("b3", "a", Source::Broker) },
            GeoPost { country: "gb".into(), ..post("b4", "a", Source::Broker) },
            GeoPost { lat: 120.0, ..post("b5", "a", Source::Broker) },
        ];
        let out = merge_clean(&[], &broker, "GB");
        let r = &out.report;
        assert_eq!((r.removed_bots, r.removed_no_gps, r.removed_non_country), (1, 1, 1));
        assert_eq!(r.rejected_malformed, 1);
        assert_eq!(out.rejects[0].line, 5);
        assert_eq!(out.clean.len(), 1);
        assert_eq!(r.removed_total(), r.raw_posts - r.clean_posts);
    }

    #[test]
    fn idempotent_on_own_output() {
        let api = vec![
            post("p1", "a", Source::Api),
            post("p2", "b", Source::Api),
            GeoPost { has_gps: false, ..post("p3", "a", Source::Api) },
        ];
        let broker = vec![
            post("p4", "a", Source::Broker),
            GeoPost { bot_flag: true, ..post("p5", "b", Source::Broker) },
        ];
        let once = merge_clean(&api, &broker, "GB");
        let (a2, b2): (Vec<_>, Vec<_>) = once.clean.iter().cloned().partition(|p| p.source == Source::Api);
        let twice = merge_clean(&a2, &b2, "GB");
        assert_eq!(twice.clean, once.clean);
        assert_eq!(twice.report.removed_total(), 0);
    }
}
