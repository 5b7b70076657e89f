//! Beneficiaries, claims and code maps, plus the date arithmetic that places
//! claims inside the look-back period and labels the outcome.

mod codemap;
mod cohort;
mod io;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use codemap::{CodeGroup, CodeMap, GroupKind, DEFAULT_CODE_MAP};
pub use cohort::{
    activate_indicator, assign_cohorts, bin_claim_month, label_outcome, DEFAULT_COHORTS,
};
pub use io::{
    read_beneficiaries, read_claims, write_beneficiaries, write_claims, Ingested,
    parse_beneficiaries, parse_claims,
};

/// Number of month bins in the look-back period.
pub const MONTHS: u32 = 12;

/// The 50 states plus DC, in the order used for the one-hot state columns.
pub const STATES: [&str; 51] = [
    "AL", "AK", "AZ", "AR", "CA", "CO", "CT", "DE", "DC", "FL", "GA", "HI", "ID", "IL", "IN",
    "IA", "KS", "KY", "LA", "ME", "MD", "MA", "MI", "MN", "MS", "MO", "MT", "NE", "NV", "NH",
    "NJ", "NM", "NY", "NC", "ND", "OH", "OK", "OR", "PA", "RI", "SC", "SD", "TN", "TX", "UT",
    "VT", "VA", "WA", "WV", "WI", "WY",
];

pub fn state_index(code: &str) -> Option<usize> {
    STATES.iter().position(|s| *s == code)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sex {
    Male,
    Female,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Race {
    White,
    Black,
    Hispanic,
    Other,
}

impl Race {
    pub const ALL: [Race; 4] = [Race::White, Race::Black, Race::Hispanic, Race::Other];

    pub fn as_str(self) -> &'static str {
        match self {
            Race::White => "white",
            Race::Black => "black",
            Race::Hispanic => "hispanic",
            Race::Other => "other",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl FromStr for Race {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Race::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown race code {s:?}")))
    }
}

impl FromStr for Sex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "male" | "M" => Ok(Sex::Male),
            "female" | "F" => Ok(Sex::Female),
            _ => Err(Error::Parse(format!("unknown sex code {s:?}"))),
        }
    }
}

impl Sex {
    pub fn as_str(self) -> &'static str {
        match self {
            Sex::Male => "male",
            Sex::Female => "female",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimType {
    Inpatient,
    OutpatientClinic,
    Emergency,
    HomeHealth,
    Snf,
    Dme,
}

impl ClaimType {
    pub const ALL: [ClaimType; 6] = [
        ClaimType::Inpatient,
        ClaimType::OutpatientClinic,
        ClaimType::Emergency,
        ClaimType::HomeHealth,
        ClaimType::Snf,
        ClaimType::Dme,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClaimType::Inpatient => "inpatient",
            ClaimType::OutpatientClinic => "outpatient_clinic",
            ClaimType::Emergency => "emergency",
            ClaimType::HomeHealth => "home_health",
            ClaimType::Snf => "snf",
            ClaimType::Dme => "dme",
        }
    }

    /// Facility claims confirm a diagnosis on their own; the rest are
    /// subject to the rule-out threshold.
    pub fn is_facility(self) -> bool {
        matches!(
            self,
            ClaimType::Inpatient | ClaimType::Snf | ClaimType::HomeHealth
        )
    }

    /// Claim types that may carry a non-zero day count.
    pub fn carries_days(self) -> bool {
        self.is_facility()
    }
}

impl fmt::Display for ClaimType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClaimType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClaimType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown claim type {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Beneficiary {
    pub id: String,
    pub age_at_t0: u32,
    pub sex: Sex,
    pub state: String,
    pub race: Race,
    pub income_decile: u8,
    pub death_date: Option<NaiveDate>,
    pub hospice_at_t0: bool,
}

impl Beneficiary {
    pub fn validate(&self) -> Result<()> {
        if self.age_at_t0 < 66 {
            return Err(Error::Validation(format!(
                "beneficiary {}: age {} is below 66",
                self.id, self.age_at_t0
            )));
        }
        if !(1..=10).contains(&self.income_decile) {
            return Err(Error::Validation(format!(
                "beneficiary {}: income decile {} outside 1..=10",
                self.id, self.income_decile
            )));
        }
        Ok(())
    }

    pub fn alive_at(&self, t0: NaiveDate) -> bool {
        self.death_date.is_none_or(|d| d > t0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Claim {
    pub beneficiary_id: String,
    pub claim_date: NaiveDate,
    pub claim_type: ClaimType,
    pub dx_codes: Vec<String>,
    pub dme_code: Option<String>,
    pub days: u32,
}

impl Claim {
    pub fn validate(&self) -> Result<()> {
        let is_dme = self.claim_type == ClaimType::Dme;
        if is_dme != self.dme_code.is_some() {
            return Err(Error::Validation(format!(
                "claim for {} on {}: dme_code must be present iff claim_type is dme",
                self.beneficiary_id, self.claim_date
            )));
        }
        if self.days > 0 && !self.claim_type.carries_days() {
            return Err(Error::Validation(format!(
                "claim for {} on {}: {} claims cannot carry days",
                self.beneficiary_id, self.claim_date, self.claim_type
            )));
        }
        Ok(())
    }
}

/// Study parameters shared by every stage of the pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub t0: NaiveDate,
    pub lookback_days: u32,
    pub horizon_days: u32,
    pub month_bin_days: u32,
    pub rule_out_min_outpatient: u32,
    /// Count encounters as distinct claim dates instead of claims.
    pub count_distinct_dates: bool,
    pub seed: u64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            t0: NaiveDate::from_ymd_opt(2010, 7, 1).expect("valid date"),
            lookback_days: 360,
            horizon_days: 183,
            month_bin_days: 30,
            rule_out_min_outpatient: 2,
            count_distinct_dates: false,
            seed: 0,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.month_bin_days == 0 || self.lookback_days != MONTHS * self.month_bin_days {
            return Err(Error::Validation(format!(
                "lookback_days ({}) must equal 12 x month_bin_days ({})",
                self.lookback_days, self.month_bin_days
            )));
        }
        if self.horizon_days == 0 {
            return Err(Error::Validation("horizon_days must be positive".into()));
        }
        if self.rule_out_min_outpatient == 0 {
            return Err(Error::Validation(
                "rule_out_min_outpatient must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Claims grouped by beneficiary id, each list sorted by date.
#[derive(Debug, Clone, Default)]
pub struct ClaimsByBeneficiary {
    by_id: HashMap<String, Vec<Claim>>,
}

impl ClaimsByBeneficiary {
    pub fn new(claims: impl IntoIterator<Item = Claim>) -> Self {
        let mut by_id: HashMap<String, Vec<Claim>> = HashMap::new();
        for c in claims {
            by_id.entry(c.beneficiary_id.clone()).or_default().push(c);
        }
        for list in by_id.values_mut() {
            list.sort_by(|a, b| {
                (a.claim_date, a.claim_type, &a.dx_codes, &a.dme_code, a.days).cmp(&(
                    b.claim_date,
                    b.claim_type,
                    &b.dx_codes,
                    &b.dme_code,
                    b.days,
                ))
            });
        }
        ClaimsByBeneficiary { by_id }
    }

    pub fn get(&self, id: &str) -> &[Claim] {
        self.by_id.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.by_id.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.by_id.is_empty()
    }
}
