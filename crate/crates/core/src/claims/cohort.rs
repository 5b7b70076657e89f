use std::collections::{BTreeSet, HashSet};

use chrono::NaiveDate;

use super::{Beneficiary, Claim, ClaimsByBeneficiary, CodeMap, GroupKind, StudyConfig};
use crate::error::{Error, Result};

pub const DEFAULT_COHORTS: [&str; 4] = ["chf", "dementia", "copd", "tumor"];

/// Month bin (1 = most recent) of a claim inside the look-back, or `None`
/// when the claim falls on/after t0 or before the look-back start.
pub fn bin_claim_month(claim_date: NaiveDate, config: &StudyConfig) -> Option<u32> {
    let d = (config.t0 - claim_date).num_days();
    if d < 1 || d > i64::from(config.lookback_days) {
        return None;
    }
    let bin = i64::from(config.month_bin_days);
    Some(((d + bin - 1) / bin) as u32)
}

/// Death within `horizon_days` after t0, boundary inclusive.
pub fn label_outcome(beneficiary: &Beneficiary, config: &StudyConfig) -> bool {
    match beneficiary.death_date {
        Some(d) => {
            let days = (d - config.t0).num_days();
            days > 0 && days <= i64::from(config.horizon_days)
        }
        None => false,
    }
}

/// Indicator activation with the outpatient rule-out convention: one facility
/// claim suffices, otherwise `rule_out_min_outpatient` outpatient-type claims
/// on distinct dates are required.
pub fn activate_indicator<'a>(
    claims_for_group: impl IntoIterator<Item = &'a Claim>,
    config: &StudyConfig,
) -> bool {
    let mut outpatient_dates = HashSet::new();
    for c in claims_for_group {
        if c.claim_type.is_facility() {
            return true;
        }
        outpatient_dates.insert(c.claim_date);
    }
    outpatient_dates.len() >= config.rule_out_min_outpatient as usize
}

/// Cohort memberships for each beneficiary, aligned with `beneficiaries`.
///
/// A beneficiary joins cohort `g` when alive and out of hospice at t0 and at
/// least one look-back claim carries a code of comorbidity group `g`.
pub fn assign_cohorts(
    beneficiaries: &[Beneficiary],
    claims: &ClaimsByBeneficiary,
    code_map: &CodeMap,
    config: &StudyConfig,
    cohort_groups: &[&str],
) -> Result<Vec<BTreeSet<String>>> {
    let groups = cohort_groups
        .iter()
        .map(|name| {
            code_map
                .group(name)
                .filter(|g| g.kind == GroupKind::Comorbidity)
                .ok_or_else(|| Error::Validation(format!("unknown cohort group {name:?}")))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(beneficiaries
        .iter()
        .map(|b| {
            let mut member = BTreeSet::new();
            if !b.alive_at(config.t0) || b.hospice_at_t0 {
                return member;
            }
            let lookback: Vec<&Claim> = claims
                .get(&b.id)
                .iter()
                .filter(|c| bin_claim_month(c.claim_date, config).is_some())
                .collect();
            for g in &groups {
                if lookback.iter().any(|c| g.matches_any(&c.dx_codes)) {
                    member.insert(g.name.clone());
                }
            }
            member
        })
        .collect())
}
