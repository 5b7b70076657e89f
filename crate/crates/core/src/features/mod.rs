//! Traditional (indicator) and augmented (two-window count) feature sets.
//!
//! Augmented counts are binned by [`bin_claim_month`]; a [`WindowSplit`]
//! with boundary `b` yields a recent window (months `1..=b`) and a baseline
//! window (months `b+1..=12`).

mod csv_out;
mod split;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::claims::{
    activate_indicator, bin_claim_month, label_outcome, state_index, Beneficiary, Claim,
    ClaimType, ClaimsByBeneficiary, CodeMap, GroupKind, Race, StudyConfig, MONTHS, STATES,
};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub use csv_out::{read_feature_csv, write_feature_csv, write_feature_meta};
pub use split::{split_samples, SampleSplit};

/// Column count of the traditional set.
pub const TRADITIONAL_WIDTH: usize = 1 + 1 + 51 + 20;

const UTILIZATION: [&str; 6] = [
    "home_health_days",
    "inpatient_days",
    "snf_any",
    "inpatient_admissions",
    "clinic_visits",
    "emergency_visits",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WindowSplit {
    boundary: Option<u32>,
}

impl WindowSplit {
    /// The 1-3 / 4-12 split used for the primary augmented set.
    pub const PRIMARY: WindowSplit = WindowSplit { boundary: Some(3) };
    pub const NONE: WindowSplit = WindowSplit { boundary: None };

    pub fn at(boundary: u32) -> Result<Self> {
        if !(1..MONTHS).contains(&boundary) {
            return Err(Error::Validation(format!(
                "window boundary {boundary} outside 1..=11"
            )));
        }
        Ok(WindowSplit {
            boundary: Some(boundary),
        })
    }

    pub fn boundary(self) -> Option<u32> {
        self.boundary
    }

    /// Inclusive month ranges, recent window first.
    pub fn windows(self) -> Vec<(u32, u32)> {
        match self.boundary {
            Some(b) => vec![(1, b), (b + 1, MONTHS)],
            None => vec![(1, MONTHS)],
        }
    }

    fn window_of(self, month: u32) -> usize {
        match self.boundary {
            Some(b) if month > b => 1,
            _ => 0,
        }
    }
}

impl Default for WindowSplit {
    fn default() -> Self {
        WindowSplit::PRIMARY
    }
}

impl fmt::Display for WindowSplit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.boundary {
            Some(b) => write!(f, "{b}"),
            None => Ok(()),
        }
    }
}

/// The primary split followed by the eleven alternates: every other
/// boundary in 1..=11 and the single 1-12 window.
pub fn enumerate_window_splits() -> Vec<WindowSplit> {
    let mut out = vec![WindowSplit::PRIMARY];
    out.extend(
        (1..MONTHS)
            .filter(|&b| b != 3)
            .map(|b| WindowSplit { boundary: Some(b) }),
    );
    out.push(WindowSplit::NONE);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariableSet {
    Traditional,
    Augmented,
}

impl VariableSet {
    pub fn as_str(self) -> &'static str {
        match self {
            VariableSet::Traditional => "traditional",
            VariableSet::Augmented => "augmented",
        }
    }
}

impl fmt::Display for VariableSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VariableSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "traditional" => Ok(VariableSet::Traditional),
            "augmented" => Ok(VariableSet::Augmented),
            _ => Err(Error::Parse(format!("unknown variable set {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub ids: Vec<String>,
    pub matrix: Matrix,
    pub labels: Vec<bool>,
    pub cohort: String,
    pub variable_set: VariableSet,
    pub window_split: WindowSplit,
}

impl FeatureMatrix {
    pub fn column_names(&self) -> &[String] {
        self.matrix.names()
    }

    /// Rows whose id is in `keep`, preserving matrix order.
    pub fn subset(&self, keep: &HashSet<&str>) -> FeatureMatrix {
        let idx: Vec<usize> = (0..self.ids.len())
            .filter(|&i| keep.contains(self.ids[i].as_str()))
            .collect();
        FeatureMatrix {
            ids: idx.iter().map(|&i| self.ids[i].clone()).collect(),
            matrix: self.matrix.select_rows(&idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            cohort: self.cohort.clone(),
            variable_set: self.variable_set,
            window_split: self.window_split,
        }
    }
}

fn demographic_columns() -> Vec<String> {
    let mut cols = vec!["age".to_string(), "female".to_string()];
    cols.extend(STATES.iter().map(|s| format!("state_{s}")));
    cols
}

pub fn traditional_columns(code_map: &CodeMap) -> Vec<String> {
    let mut cols = demographic_columns();
    cols.extend(
        code_map
            .groups(GroupKind::Comorbidity)
            .map(|g| format!("ind_{}", g.name)),
    );
    cols
}

pub fn augmented_columns(code_map: &CodeMap, split: WindowSplit) -> Vec<String> {
    let windows = split.windows();
    let mut cols = demographic_columns();
    cols.extend(Race::ALL.iter().map(|r| format!("race_{}", r.as_str())));
    cols.push("income_decile".into());
    for (kind, tag) in [
        (GroupKind::Comorbidity, "dx"),
        (GroupKind::Functional, "fs"),
        (GroupKind::Dme, "dme"),
    ] {
        for g in code_map.groups(kind) {
            for (lo, hi) in &windows {
                cols.push(format!("{tag}_{}_{lo}_{hi}", g.name));
            }
        }
    }
    for u in UTILIZATION {
        for (lo, hi) in &windows {
            cols.push(format!("util_{u}_{lo}_{hi}"));
        }
    }
    cols
}

fn demographics(b: &Beneficiary, row: &mut Vec<f64>) -> Result<()> {
    let state = state_index(&b.state).ok_or_else(|| {
        Error::Validation(format!("beneficiary {}: unknown state {:?}", b.id, b.state))
    })?;
    row.push(f64::from(b.age_at_t0));
    row.push(if b.sex == crate::claims::Sex::Female { 1.0 } else { 0.0 });
    row.extend((0..STATES.len()).map(|j| if j == state { 1.0 } else { 0.0 }));
    Ok(())
}

fn in_lookback<'a>(
    claims: &'a [Claim],
    config: &'a StudyConfig,
) -> impl Iterator<Item = (u32, &'a Claim)> + 'a {
    claims
        .iter()
        .filter_map(move |c| bin_claim_month(c.claim_date, config).map(|m| (m, c)))
}

/// Age, sex, state one-hots and the 20 rule-out-adjusted comorbidity
/// indicators.
pub fn build_traditional(
    beneficiary: &Beneficiary,
    claims: &[Claim],
    code_map: &CodeMap,
    config: &StudyConfig,
) -> Result<Vec<f64>> {
    let mut row = Vec::with_capacity(TRADITIONAL_WIDTH);
    demographics(beneficiary, &mut row)?;
    let lookback: Vec<&Claim> = in_lookback(claims, config).map(|(_, c)| c).collect();
    for g in code_map.groups(GroupKind::Comorbidity) {
        let hits = lookback.iter().copied().filter(|c| g.matches_any(&c.dx_codes));
        row.push(if activate_indicator(hits, config) { 1.0 } else { 0.0 });
    }
    Ok(row)
}

/// Demographics plus per-window encounter counts for every code group and
/// utilization measure.
pub fn build_augmented(
    beneficiary: &Beneficiary,
    claims: &[Claim],
    code_map: &CodeMap,
    config: &StudyConfig,
    split: WindowSplit,
) -> Result<Vec<f64>> {
    let windows = split.windows();
    let w = windows.len();
    let mut row = Vec::new();
    demographics(beneficiary, &mut row)?;
    row.extend(
        Race::ALL
            .iter()
            .map(|r| if *r == beneficiary.race { 1.0 } else { 0.0 }),
    );
    row.push(f64::from(beneficiary.income_decile));

    let lookback: Vec<(usize, &Claim)> = in_lookback(claims, config)
        .map(|(m, c)| (split.window_of(m), c))
        .collect();

    let count_encounters = |hits: &mut dyn Iterator<Item = (usize, &Claim)>| {
        let mut counts = vec![0.0; w];
        if config.count_distinct_dates {
            let mut dates = HashSet::new();
            for (win, c) in hits {
                if dates.insert(c.claim_date) {
                    counts[win] += 1.0;
                }
            }
        } else {
            for (win, _) in hits {
                counts[win] += 1.0;
            }
        }
        counts
    };

    for kind in [GroupKind::Comorbidity, GroupKind::Functional] {
        for g in code_map.groups(kind) {
            let mut hits = lookback
                .iter()
                .copied()
                .filter(|(_, c)| g.matches_any(&c.dx_codes));
            row.extend(count_encounters(&mut hits));
        }
    }
    for g in code_map.groups(GroupKind::Dme) {
        let mut hits = lookback.iter().copied().filter(|(_, c)| {
            c.claim_type == ClaimType::Dme && c.dme_code.as_deref().is_some_and(|d| g.matches(d))
        });
        row.extend(count_encounters(&mut hits));
    }

    let window_days: Vec<f64> = windows
        .iter()
        .map(|(lo, hi)| f64::from((hi - lo + 1) * config.month_bin_days))
        .collect();
    let mut util = [[0.0f64; 2]; 6];
    for (win, c) in &lookback {
        let days = f64::from(c.days);
        match c.claim_type {
            ClaimType::HomeHealth => util[0][*win] += days,
            ClaimType::Inpatient => {
                util[1][*win] += days;
                util[3][*win] += 1.0;
            }
            ClaimType::Snf => util[2][*win] = 1.0,
            ClaimType::OutpatientClinic => util[4][*win] += 1.0,
            ClaimType::Emergency => util[5][*win] += 1.0,
            ClaimType::Dme => {}
        }
    }
    for (k, values) in util.iter().enumerate() {
        for win in 0..w {
            let v = values[win];
            // day sums cannot exceed the days in the window
            row.push(if k < 2 { v.min(window_days[win]) } else { v });
        }
    }
    Ok(row)
}

/// Cohort member records with their grouped claims, plus outcome labels.
#[derive(Debug, Clone)]
pub struct Cohort {
    pub name: String,
    pub beneficiaries: Vec<Beneficiary>,
    pub claims: ClaimsByBeneficiary,
}

impl Cohort {
    /// Members of cohort `name` among `beneficiaries`, sorted by id.
    pub fn select(
        name: &str,
        beneficiaries: &[Beneficiary],
        claims: ClaimsByBeneficiary,
        code_map: &CodeMap,
        config: &StudyConfig,
    ) -> Result<Cohort> {
        let memberships =
            crate::claims::assign_cohorts(beneficiaries, &claims, code_map, config, &[name])?;
        let mut members: Vec<Beneficiary> = beneficiaries
            .iter()
            .zip(&memberships)
            .filter(|(_, m)| m.contains(name))
            .map(|(b, _)| b.clone())
            .collect();
        members.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(Cohort {
            name: name.to_string(),
            beneficiaries: members,
            claims,
        })
    }

    pub fn labels(&self, config: &StudyConfig) -> Vec<bool> {
        self.beneficiaries
            .iter()
            .map(|b| label_outcome(b, config))
            .collect()
    }

    pub fn ids(&self) -> Vec<String> {
        self.beneficiaries.iter().map(|b| b.id.clone()).collect()
    }
}

/// Feature matrix for every cohort member, in id order.
pub fn build_matrix(
    cohort: &Cohort,
    code_map: &CodeMap,
    config: &StudyConfig,
    variable_set: VariableSet,
    split: WindowSplit,
) -> Result<FeatureMatrix> {
    let names = match variable_set {
        VariableSet::Traditional => traditional_columns(code_map),
        VariableSet::Augmented => augmented_columns(code_map, split),
    };
    let rows = cohort
        .beneficiaries
        .par_iter()
        .map(|b| {
            let claims = cohort.claims.get(&b.id);
            match variable_set {
                VariableSet::Traditional => build_traditional(b, claims, code_map, config),
                VariableSet::Augmented => build_augmented(b, claims, code_map, config, split),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureMatrix {
        ids: cohort.ids(),
        matrix: Matrix::from_rows(names, &rows)?,
        labels: cohort.labels(config),
        cohort: cohort.name.clone(),
        variable_set,
        window_split: split,
    })
}
