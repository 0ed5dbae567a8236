//! DBSCAN over great-circle distance for the posts of one account.

use std::collections::VecDeque;

use super::{geo, Cluster, GeoPost, LatLon};
use crate::error::{Error, Result};
use crate::population::PostId;

fn neighbours(posts: &[GeoPost], eps_meters: f64) -> Vec<Vec<usize>> {
    let n = posts.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| posts[a].lat.total_cmp(&posts[b].lat));
    // slack so a pair exactly eps apart is never pruned by rounding
    let band = geo::lat_span_deg(eps_meters) * (1.0 + 1e-9);
    let mut adj = vec![Vec::new(); n];
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if posts[j].lat - posts[i].lat > band {
                break;
            }
            let d = geo::haversine_m(posts[i].lat, posts[i].lon, posts[j].lat, posts[j].lon);
            if d <= eps_meters {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    adj
}

/// Clusters one account's posts.
///
/// A post is a core point when at least `min_points` posts (itself
/// included) lie within `eps_meters`. Cores within reach of each other form
/// a cluster; a non-core post next to a core joins it as a border point,
/// and when several clusters could claim it, the cluster whose smallest core
/// post id is smallest wins, so the result does not depend on input order.
/// Posts reachable from no core are noise and appear in no cluster.
///
/// Clusters that end up with fewer than `min_points` members are kept but
/// marked invalid. Output is sorted by size (descending), then first post
/// time, then smallest member id.
pub fn dbscan_account(posts: &[GeoPost], eps_meters: f64, min_points: usize) -> Result<Vec<Cluster>> {
    if !(eps_meters > 0.0 && eps_meters.is_finite()) {
        return Err(Error::Parameter(format!("eps must be positive, got {eps_meters}")));
    }
    if min_points < 1 {
        return Err(Error::Parameter("min_points must be at least 1".into()));
    }
    let Some(first) = posts.first() else {
        return Ok(Vec::new());
    };
    if let Some(other) = posts.iter().find(|p| p.account_id != first.account_id) {
        return Err(Error::Parameter(format!(
            "posts from accounts {} and {} passed together",
            first.account_id, other.account_id
        )));
    }

    let n = posts.len();
    let adj = neighbours(posts, eps_meters);
    let core: Vec<bool> = adj.iter().map(|a| a.len() + 1 >= min_points).collect();

    // connected components of the core graph
    let mut label: Vec<Option<usize>> = vec![None; n];
    let mut n_components = 0;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if !core[start] || label[start].is_some() {
            continue;
        }
        label[start] = Some(n_components);
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                if core[j] && label[j].is_none() {
                    label[j] = Some(n_components);
                    queue.push_back(j);
                }
            }
        }
        n_components += 1;
    }

    let mut key: Vec<Option<&PostId>> = vec![None; n_components];
    for i in (0..n).filter(|&i| core[i]) {
        let c = label[i].expect("core points are labelled");
        if key[c].is_none_or(|k| posts[i].post_id < *k) {
            key[c] = Some(&posts[i].post_id);
        }
    }

    for i in (0..n).filter(|&i| !core[i]) {
        label[i] = adj[i]
            .iter()
            .filter(|&&j| core[j])
            .filter_map(|&j| label[j])
            .min_by_key(|&c| key[c]);
    }

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_components];
    for i in 0..n {
        if let Some(c) = label[i] {
            members[c].push(i);
        }
    }

    let mut clusters: Vec<Cluster> = members
        .into_iter()
        .map(|m| build_cluster(posts, &m, min_points))
        .collect();
    clusters.sort_by(|a, b| {
        b.len()
            .cmp(&a.len())
            .then(a.first_timestamp.cmp(&b.first_timestamp))
            .then_with(|| a.member_post_ids[0].cmp(&b.member_post_ids[0]))
    });
    Ok(clusters)
}

fn build_cluster(posts: &[GeoPost], idx: &[usize], min_points: usize) -> Cluster {
    let k = idx.len() as f64;
    let lat = idx.iter().map(|&i| posts[i].lat).sum::<f64>() / k;
    let lon = idx.iter().map(|&i| posts[i].lon).sum::<f64>() / k;
    let first = idx.iter().map(|&i| posts[i].timestamp).min().expect("non-empty");
    let last = idx.iter().map(|&i| posts[i].timestamp).max().expect("non-empty");
    let mut ids: Vec<PostId> = idx.iter().map(|&i| posts[i].post_id.clone()).collect();
    ids.sort();
    Cluster {
        account_id: posts[idx[0]].account_id.clone(),
        member_post_ids: ids,
        centroid: LatLon { lat, lon },
        valid: idx.len() >= min_points,
        address_type: None,
        address_id: None,
        first_timestamp: first,
        last_timestamp: last,
        span_days: (last - first).num_milliseconds() as f64 / 86_400_000.0,
        span_label: None,
        dominant: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::two_phase::Source;
    use chrono::{Duration, TimeZone, Utc};

    fn at(id: &str, lat: f64, lon: f64, day: i64) -> GeoPost {
        GeoPost {
            post_id: id.into(),
            account_id: "acc".into(),
            timestamp: Utc.with_ymd_and_hms(2014, 5, 1, 0, 0, 0).unwrap() + Duration::days(day),
            lat,
            lon,
            source: Source::Broker,
            has_gps: true,
            country: "GB".into(),
            bot_flag: false,
        }
    }

    #[test]
    fn coincident_points_form_one_cluster() {
        let posts: Vec<_> = (0..3).map(|i| at(&format!("p{i}"), 52.0, -1.0, i)).collect();
        let c = dbscan_account(&posts, 100.0, 3).unwrap();
        assert_eq!(c.len(), 1);
        assert!(c[0].valid);
        assert_eq!(c[0].len(), 3);
        assert_eq!(c[0].span_days, 2.0);
    }

    #[test]
    fn isolated_points_are_noise() {
        let posts = vec![at("a", 52.0, -1.0, 0), at("b", 53.0, -1.0, 0)];
        assert!(dbscan_account(&posts, 100.0, 3).unwrap().is_empty());
    }

    #[test]
    fn two_blobs() {
        let mut posts = Vec::new();
        for i in 0..10 {
            let (lat, lon) = geo::offset(52.0, -1.0, i as f64 * 3.0, 0.0);
            posts.push(at(&format!("h{i}"), lat, lon, i));
            let (lat, lon) = geo::offset(52.09, -1.0, 0.0, i as f64 * 3.0);
            posts.push(at(&format!("w{i}"), lat, lon, i + 1));
        }
        let c = dbscan_account(&posts, 100.0, 3).unwrap();
        assert_eq!(c.len(), 2);
        assert!(c.iter().all(|c| c.valid && c.len() == 10));
        // equal sizes, so the earlier first post leads
        assert_eq!(c[0].member_post_ids[0].as_str(), "h0");
    }

    #[test]
    fn contested_border_goes_to_smallest_core_id() {
        // two groups 150 m apart with a non-core point midway; only z0 and
        // a0 are cores
        let mut posts = Vec::new();
        for i in 0..3 {
            let (lat, lon) = geo::offset(52.0, -1.0, -75.0 - 10.0 * i as f64, 0.0);
            posts.push(at(&format!("z{i}"), lat, lon, 0));
            let (lat, lon) = geo::offset(52.0, -1.0, 75.0 + 10.0 * i as f64, 0.0);
            posts.push(at(&format!("a{i}"), lat, lon, 0));
        }
        posts.push(at("mid", 52.0, -1.0, 0));
        let mut orders = vec![posts.clone()];
        let mut rev = posts.clone();
        rev.reverse();
        orders.push(rev);
        for p in orders {
            let c = dbscan_account(&p, 80.0, 4).unwrap();
            assert_eq!(c.len(), 2);
            assert_eq!(c[0].len(), 4);
            assert!(c[0].valid && !c[1].valid);
            let with_mid = c.iter().find(|c| c.member_post_ids.iter().any(|id| id.as_str() == "mid")).unwrap();
            assert_eq!(with_mid.member_post_ids[0].as_str(), "a0");
        }
    }

    #[test]
    fn parameter_errors() {
        let posts = vec![at("a", 52.0, -1.0, 0)];
        assert!(dbscan_account(&posts, 0.0, 3).is_err());
        assert!(dbscan_account(&posts, 10.0, 0).is_err());
        let mut mixed = vec![at("a", 52.0, -1.0, 0), at("b", 52.0, -1.0, 0)];
        mixed[1].account_id = "other".into();
        assert!(dbscan_account(&mixed, 10.0, 1).is_err());
        assert!(dbscan_account(&[], 10.0, 3).unwrap().is_empty());
    }

    #[test]
    fn min_points_one_makes_singletons() {
        let posts = vec![at("a", 52.0, -1.0, 0), at("b", 53.0, -1.0, 0)];
        let c = dbscan_account(&posts, 10.0, 1).unwrap();
        assert_eq!(c.len(), 2);
        assert!(c.iter().all(|c| c.valid));
    }
}
