//! Scores a pseudo survey dataset against simulator ground truth: coverage
//! of the register (representation) and wrong residences (measurement).

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::population::{coverage_report_for_accounts, AccountId};
use crate::simulator::GroundTruth;
use crate::two_phase::PseudoSurveyRecord;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub n_records: usize,
    pub observed_users: usize,
    pub register_size: usize,
    pub in_scope: usize,
    pub over_coverage: usize,
    pub under_coverage: usize,
    /// Users behind two or more record accounts.
    pub duplicate_users: usize,
    /// Record accounts beyond the first for each duplicated user.
    pub duplicate_accounts: usize,
    pub unresolved_accounts: usize,
    pub non_person_records: usize,
    pub person_records_with_residence: usize,
    pub person_records_without_residence: usize,
    /// Person records whose residence differs from the true home.
    pub mapping_errors: usize,
    /// `mapping_errors / person_records_with_residence`, 0 when undefined.
    pub mapping_error_rate: f64,
    pub mapping_error_accounts: Vec<AccountId>,
}

pub fn assess_quality(records: &[PseudoSurveyRecord], gt: &GroundTruth) -> QualityReport {
    let accounts: BTreeSet<AccountId> = records.iter().map(|r| r.account_id.clone()).collect();
    let (cov, unresolved) = coverage_report_for_accounts(&accounts, &gt.register, &gt.rel);

    let mut report = QualityReport {
        n_records: records.len(),
        observed_users: cov.in_scope.len() + cov.over.len(),
        register_size: gt.register.len(),
        in_scope: cov.in_scope.len(),
        over_coverage: cov.over.len(),
        under_coverage: cov.under.len(),
        duplicate_users: cov.duplicate_users.len(),
        duplicate_accounts: cov.duplicate_users.values().map(|n| n - 1).sum(),
        unresolved_accounts: unresolved.len(),
        ..Default::default()
    };

    for r in records {
        let Some(home) = gt.homes.get(&r.account_id) else {
            report.non_person_records += 1;
            continue;
        };
        match &r.residence {
            Some(res) => {
                report.person_records_with_residence += 1;
                if res.address_id != home.address_id {
                    report.mapping_errors += 1;
                    report.mapping_error_accounts.push(r.account_id.clone());
                }
            }
            None => report.person_records_without_residence += 1,
        }
    }
    if report.person_records_with_residence > 0 {
        report.mapping_error_rate = report.mapping_errors as f64 / report.person_records_with_residence as f64;
    }
    report
}
