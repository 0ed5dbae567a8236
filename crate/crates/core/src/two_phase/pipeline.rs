use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    classify_cluster, dbscan_account, label_span, select_dominant, Gazetteer, GeoPost, PipelineErrorReport,
    PseudoSurveyRecord, Residence,
};
use crate::error::{Error, Result};
use crate::population::AccountId;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub eps_meters: f64,
    pub min_points: usize,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self {
            eps_meters: 100.0,
            min_points: 3,
        }
    }
}

struct AccountOutcome {
    record: PseudoSurveyRecord,
    invalid_posts: usize,
}

fn process_account(
    account: &AccountId,
    posts: &[GeoPost],
    gazetteer: &Gazetteer,
    params: PipelineParams,
) -> Result<AccountOutcome> {
    let clusters = dbscan_account(posts, params.eps_meters, params.min_points)?;
    let n_found = clusters.len();
    let mut valid: Vec<_> = clusters
        .into_iter()
        .filter(|c| c.valid)
        .map(|c| classify_cluster(c, gazetteer).map(label_span))
        .collect::<Result<_>>()?;
    let clustered: usize = valid.iter().map(|c| c.len()).sum();

    let mut provenance = vec![format!(
        "dbscan eps={}m min_points={}: {} cluster(s), {} valid",
        params.eps_meters,
        params.min_points,
        n_found,
        valid.len()
    )];
    for c in &valid {
        provenance.push(format!(
            "cluster of {} post(s) near {} ({})",
            c.len(),
            c.address_id.as_deref().unwrap_or("?"),
            c.address_type.map(|t| t.to_string()).unwrap_or_default()
        ));
    }

    let n_clusters = valid.len();
    let (residence, span_label) = match select_dominant(&mut valid) {
        Some(d) => {
            provenance.push(format!("dominant residential cluster: {} post(s)", d.len()));
            (
                Some(Residence {
                    address_id: d.address_id.clone().expect("classified"),
                    centroid: d.centroid,
                }),
                d.span_label,
            )
        }
        None => {
            provenance.push("no residential cluster".into());
            (None, None)
        }
    };

    Ok(AccountOutcome {
        record: PseudoSurveyRecord {
            account_id: account.clone(),
            residence,
            span_label,
            n_posts: posts.len(),
            n_clusters,
            provenance,
        },
        invalid_posts: posts.len() - clustered,
    })
}

/// One record per account in `clean`, ordered by account id. The returned
/// report carries only the clustering-stage tallies.
pub fn build_pseudo_survey(
    clean: &[GeoPost],
    gazetteer: &Gazetteer,
    params: PipelineParams,
) -> Result<(Vec<PseudoSurveyRecord>, PipelineErrorReport)> {
    if !(params.eps_meters > 0.0 && params.eps_meters.is_finite()) || params.min_points < 1 {
        return Err(Error::Parameter(format!(
            "need eps > 0 and min_points >= 1, got {} and {}",
            params.eps_meters, params.min_points
        )));
    }
    let mut by_account: BTreeMap<&AccountId, Vec<GeoPost>> = BTreeMap::new();
    for p in clean {
        by_account.entry(&p.account_id).or_default().push(p.clone());
    }
    let groups: Vec<_> = by_account.into_iter().collect();
    let outcomes = groups
        .par_iter()
        .map(|(account, posts)| process_account(account, posts, gazetteer, params))
        .collect::<Result<Vec<_>>>()?;

    let mut report = PipelineErrorReport::default();
    let mut records = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        report.invalid_cluster_posts += o.invalid_posts;
        if o.record.residence.is_none() {
            report.accounts_without_residence += 1;
        }
        records.push(o.record);
    }
    Ok((records, report))
}
