//! Synthetic beneficiary and claims populations.
//!
//! Each beneficiary draws a frailty `U ~ Uniform[0, 1]` and an outcome
//! `Bernoulli(event_rate)`. Month `k` of the look-back (1 = most recent)
//! receives `Poisson(base_rate * (1 + U) + dead * gap_scale * exp(-(k - 1) / decay_tau))`
//! encounters, drawn as routine encounters plus a separate Poisson count of
//! acute ones carrying the decedent ramp. Frailty raises the comorbidity
//! burden and the rate of functional-status codes and equipment claims.
//! Acute encounters lean toward inpatient and emergency care and carry more
//! codes, including new comorbidities and functional-status codes.

use chrono::{Duration, NaiveDate};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::claims::{
    Beneficiary, Claim, ClaimType, CodeGroup, CodeMap, GroupKind, Race, Sex, StudyConfig, MONTHS,
    STATES,
};
use crate::error::{Error, Result};
use crate::seeds;

/// Generator knobs for one cohort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CohortPreset {
    /// Comorbidity group that defines the cohort.
    pub name: String,
    pub event_rate: f64,
    /// Extra month-1 encounter intensity for decedents.
    pub gap_scale: f64,
    /// Mean monthly encounters of a zero-frailty survivor.
    pub base_rate: f64,
    /// Months; decay of the decedent ramp away from t0.
    pub decay_tau: f64,
}

pub const DEFAULT_BASE_RATE: f64 = 2.0;
pub const DEFAULT_DECAY_TAU: f64 = 2.0;

impl CohortPreset {
    pub fn new(name: &str, event_rate: f64, gap_scale: f64) -> Self {
        CohortPreset {
            name: name.to_string(),
            event_rate,
            gap_scale,
            base_rate: DEFAULT_BASE_RATE,
            decay_tau: DEFAULT_DECAY_TAU,
        }
    }

    pub fn tumor() -> Self {
        CohortPreset::new("tumor", 0.047, 3.0)
    }

    pub fn copd() -> Self {
        CohortPreset::new("copd", 0.049, 2.0)
    }

    pub fn chf() -> Self {
        CohortPreset::new("chf", 0.077, 1.2)
    }

    pub fn dementia() -> Self {
        CohortPreset::new("dementia", 0.101, 0.6)
    }

    /// The four bundled presets, in decreasing severity-gap order.
    pub fn defaults() -> Vec<CohortPreset> {
        vec![Self::tumor(), Self::copd(), Self::chf(), Self::dementia()]
    }

    pub fn by_name(name: &str) -> Result<CohortPreset> {
        Self::defaults()
            .into_iter()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::InvalidInput(format!("unknown preset {name:?}")))
    }

    pub fn with_decay_tau(mut self, tau: f64) -> Self {
        self.decay_tau = tau;
        self
    }

    pub fn with_gap_scale(mut self, gap: f64) -> Self {
        self.gap_scale = gap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(format!("preset {}: {m}", self.name)));
        if !(self.event_rate > 0.0 && self.event_rate < 0.5) {
            return bad(format!("event_rate {} outside (0, 0.5)", self.event_rate));
        }
        if !(self.gap_scale >= 0.0 && self.gap_scale.is_finite()) {
            return bad(format!("gap_scale {} must be non-negative", self.gap_scale));
        }
        if !(self.base_rate > 0.0 && self.base_rate.is_finite()) {
            return bad(format!("base_rate {} must be positive", self.base_rate));
        }
        if !(self.decay_tau > 0.0 && self.decay_tau.is_finite()) {
            return bad(format!("decay_tau {} must be positive", self.decay_tau));
        }
        Ok(())
    }
}

/// A generated population.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub beneficiaries: Vec<Beneficiary>,
    pub claims: Vec<Claim>,
}

struct Groups<'a> {
    cohort: &'a CodeGroup,
    comorbidity: Vec<&'a CodeGroup>,
    functional: Vec<&'a CodeGroup>,
    dme: Vec<&'a CodeGroup>,
}

fn dx_code(group: &CodeGroup, rng: &mut ChaCha8Rng) -> String {
    let prefix = group.prefixes.choose(rng).expect("validated non-empty");
    format!("{prefix}{}", rng.random_range(0..10))
}

fn poisson(mean: f64, rng: &mut ChaCha8Rng) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).map_or(0, |p| p.sample(rng) as u64)
}

fn claim_type(acute: bool, frailty: f64, rng: &mut ChaCha8Rng) -> ClaimType {
    let a = f64::from(u8::from(acute));
    let weights = [
        (ClaimType::OutpatientClinic, 0.78 - 0.08 * a),
        (ClaimType::Emergency, 0.07 + 0.04 * a),
        (ClaimType::Inpatient, 0.05 + 0.03 * frailty + 0.04 * a),
        (ClaimType::HomeHealth, 0.06 + 0.04 * frailty),
        (ClaimType::Snf, 0.02 + 0.02 * frailty),
    ];
    let total: f64 = weights.iter().map(|w| w.1).sum();
    let mut u = rng.random_range(0.0..total);
    for (t, w) in weights {
        if u < w {
            return t;
        }
        u -= w;
    }
    ClaimType::OutpatientClinic
}

fn service_days(t: ClaimType, rng: &mut ChaCha8Rng) -> u32 {
    match t {
        ClaimType::Inpatient => rng.random_range(1..=8),
        ClaimType::HomeHealth => rng.random_range(1..=15),
        ClaimType::Snf => rng.random_range(1..=20),
        _ => 0,
    }
}

fn date_in_month(month: u32, config: &StudyConfig, rng: &mut ChaCha8Rng) -> NaiveDate {
    let w = config.month_bin_days;
    let d = rng.random_range((month - 1) * w + 1..=month * w);
    config.t0 - Duration::days(i64::from(d))
}

fn dme_claim(
    claim: &impl Fn(NaiveDate, ClaimType, Vec<String>, Option<String>, u32) -> Claim,
    groups: &Groups,
    active: &[&CodeGroup],
    month: u32,
    config: &StudyConfig,
    rng: &mut ChaCha8Rng,
) -> Claim {
    let date = date_in_month(month, config, rng);
    let item = groups.dme.choose(rng).expect("4 groups");
    let code = item.prefixes.choose(rng).expect("validated non-empty").clone();
    let dx = match active.choose(rng) {
        Some(g) => dx_code(g, rng),
        None => dx_code(groups.cohort, rng),
    };
    claim(date, ClaimType::Dme, vec![dx], Some(code), 0)
}

fn beneficiary(
    index: usize,
    preset: &CohortPreset,
    groups: &Groups,
    config: &StudyConfig,
    seed: u64,
) -> (Beneficiary, Vec<Claim>) {
    let mut rng = seeds::rng(seed, index as u64);
    let id = format!("{}-{:07}", preset.name, index + 1);
    let frailty: f64 = rng.random();
    let dead = rng.random_bool(preset.event_rate);
    let death_date =
        dead.then(|| config.t0 + Duration::days(rng.random_range(1..=i64::from(config.horizon_days))));
    let mut income_decile = rng.random_range(1..=10u8);
    if dead && rng.random_bool(0.3) {
        income_decile = rng.random_range(1..=5);
    }
    let person = Beneficiary {
        id: id.clone(),
        age_at_t0: rng.random_range(66..=95),
        sex: if rng.random_bool(0.5) { Sex::Female } else { Sex::Male },
        state: STATES[rng.random_range(0..STATES.len())].to_string(),
        race: Race::ALL[rng.random_range(0..Race::ALL.len())],
        income_decile,
        death_date,
        hospice_at_t0: false,
    };

    // chronic comorbidities present all year, more of them with frailty
    let active: Vec<&CodeGroup> = groups
        .comorbidity
        .iter()
        .copied()
        .filter(|g| g.name != groups.cohort.name)
        .filter(|_| rng.random_bool(0.04 + 0.16 * frailty))
        .collect();

    let mut claims = Vec::new();
    let claim = |date, claim_type, dx_codes, dme_code, days| Claim {
        beneficiary_id: id.clone(),
        claim_date: date,
        claim_type,
        dx_codes,
        dme_code,
        days,
    };

    // the diagnosis that places the beneficiary in the cohort
    let month = rng.random_range(1..=MONTHS);
    let date = date_in_month(month, config, &mut rng);
    let code = dx_code(groups.cohort, &mut rng);
    claims.push(claim(date, ClaimType::OutpatientClinic, vec![code], None, 0));

    for month in 1..=MONTHS {
        let ramp = if dead {
            (-(f64::from(month) - 1.0) / preset.decay_tau).exp()
        } else {
            0.0
        };
        // routine encounters, plus the decedent's excess acute encounters;
        // the two Poisson counts sum to the month's total intensity
        let routine = poisson(preset.base_rate * (1.0 + frailty), &mut rng);
        let acute = poisson(preset.gap_scale * ramp, &mut rng);
        for k in 0..routine + acute {
            let is_acute = k >= routine;
            let date = date_in_month(month, config, &mut rng);
            let t = claim_type(is_acute, frailty, &mut rng);
            let n_codes = 1
                + usize::from(rng.random_bool(0.25 + 0.2 * frailty))
                + usize::from(rng.random_bool(if is_acute { 0.25 } else { 0.1 }));
            let mut codes = Vec::new();
            for slot in 0..n_codes {
                let code = if slot == 0 && (active.is_empty() || rng.random_bool(0.5)) {
                    dx_code(groups.cohort, &mut rng)
                } else if rng.random_bool(0.08 + 0.12 * frailty) {
                    let g = groups.functional.choose(&mut rng).expect("7 groups");
                    dx_code(g, &mut rng)
                } else if active.is_empty() || (is_acute && rng.random_bool(0.2)) {
                    let g = groups.comorbidity.choose(&mut rng).expect("20 groups");
                    dx_code(g, &mut rng)
                } else {
                    let g = active.choose(&mut rng).expect("non-empty");
                    dx_code(g, &mut rng)
                };
                if !codes.contains(&code) {
                    codes.push(code);
                }
            }
            let days = service_days(t, &mut rng);
            claims.push(claim(date, t, codes, None, days));
            if is_acute && rng.random_bool(0.1) {
                claims.push(dme_claim(&claim, groups, &active, month, config, &mut rng));
            }
        }
        if rng.random_bool(0.02 + 0.08 * frailty) {
            claims.push(dme_claim(&claim, groups, &active, month, config, &mut rng));
        }
    }
    (person, claims)
}

/// Generates `n` cohort members. Beneficiary `i` draws from its own
/// stream derived from `(seed, i)`, so output is independent of scheduling.
pub fn generate_population(
    preset: &CohortPreset,
    n: usize,
    code_map: &CodeMap,
    config: &StudyConfig,
    seed: u64,
) -> Result<Population> {
    preset.validate()?;
    config.validate()?;
    if n < 2 {
        return Err(Error::InvalidInput(format!("population size {n} is below 2")));
    }
    let cohort = code_map
        .group(&preset.name)
        .filter(|g| g.kind == GroupKind::Comorbidity)
        .ok_or_else(|| {
            Error::Validation(format!(
                "preset {} does not name a comorbidity group",
                preset.name
            ))
        })?;
    let groups = Groups {
        cohort,
        comorbidity: code_map.groups(GroupKind::Comorbidity).collect(),
        functional: code_map.groups(GroupKind::Functional).collect(),
        dme: code_map.groups(GroupKind::Dme).collect(),
    };
    let stream = seeds::derive(seed, seeds::tag(&preset.name));
    let people: Vec<(Beneficiary, Vec<Claim>)> = (0..n)
        .into_par_iter()
        .map(|i| beneficiary(i, preset, &groups, config, stream))
        .collect();
    let mut beneficiaries = Vec::with_capacity(n);
    let mut claims = Vec::new();
    for (b, c) in people {
        beneficiaries.push(b);
        claims.extend(c);
    }
    Ok(Population {
        beneficiaries,
        claims,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, StudentsT};

    use super::*;
    use crate::claims::{assign_cohorts, label_outcome, ClaimsByBeneficiary};

    fn population(preset: &CohortPreset, n: usize, seed: u64) -> Population {
        generate_population(preset, n, &CodeMap::bundled(), &StudyConfig::default(), seed).unwrap()
    }

    /// Mean distinct dx codes in `month` for decedents and survivors.
    fn unique_dx_by_outcome(pop: &Population, month: u32) -> (f64, f64) {
        let cfg = StudyConfig::default();
        let by = ClaimsByBeneficiary::new(pop.claims.iter().cloned());
        let (mut sum, mut cnt) = ([0.0; 2], [0.0; 2]);
        for b in &pop.beneficiaries {
            let codes: BTreeSet<&String> = by
                .get(&b.id)
                .iter()
                .filter(|c| crate::claims::bin_claim_month(c.claim_date, &cfg) == Some(month))
                .flat_map(|c| &c.dx_codes)
                .collect();
            let k = usize::from(label_outcome(b, &cfg));
            sum[k] += codes.len() as f64;
            cnt[k] += 1.0;
        }
        (sum[1] / cnt[1], sum[0] / cnt[0])
    }

    #[test]
    fn event_rate_inside_binomial_interval() {
        let n = 10_000;
        let pop = population(&CohortPreset::tumor(), n, 7);
        let cfg = StudyConfig::default();
        let events = pop.beneficiaries.iter().filter(|b| label_outcome(b, &cfg)).count() as u64;
        let dist = Binomial::new(0.047, n as u64).unwrap();
        let lo = (0..=n as u64).find(|&k| dist.cdf(k) >= 0.005).unwrap();
        let hi = (0..=n as u64).find(|&k| dist.cdf(k) >= 0.995).unwrap();
        assert!((lo..=hi).contains(&events), "{events} outside [{lo}, {hi}]");
    }

    #[test]
    fn zero_gap_gives_equal_intensity() {
        let preset = CohortPreset::tumor().with_gap_scale(0.0);
        let pop = population(&preset, 10_000, 3);
        let cfg = StudyConfig::default();
        let by = ClaimsByBeneficiary::new(pop.claims.iter().cloned());
        let mut groups: [Vec<f64>; 2] = [vec![], vec![]];
        for b in &pop.beneficiaries {
            let encounters = by.get(&b.id).iter().filter(|c| c.claim_type != ClaimType::Dme).count();
            groups[usize::from(label_outcome(b, &cfg))].push(encounters as f64 / 12.0);
        }
        // Welch two-sample t statistic
        let stats = |v: &[f64]| {
            let n = v.len() as f64;
            let m = v.iter().sum::<f64>() / n;
            (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0), n)
        };
        let (m1, v1, n1) = stats(&groups[1]);
        let (m0, v0, n0) = stats(&groups[0]);
        let se2 = v1 / n1 + v0 / n0;
        let t = (m1 - m0) / se2.sqrt();
        let df = se2.powi(2) / ((v1 / n1).powi(2) / (n1 - 1.0) + (v0 / n0).powi(2) / (n0 - 1.0));
        let p = 2.0 * (1.0 - StudentsT::new(0.0, 1.0, df).unwrap().cdf(t.abs()));
        assert!(p > 0.001, "t = {t}, p = {p}");
    }

    #[test]
    fn every_record_is_in_its_cohort_and_dated_in_the_look_back() {
        let cfg = StudyConfig::default();
        for preset in CohortPreset::defaults() {
            let pop = population(&preset, 500, 11);
            assert_eq!(pop.beneficiaries.len(), 500);
            let by = ClaimsByBeneficiary::new(pop.claims.iter().cloned());
            let sets = assign_cohorts(&pop.beneficiaries, &by, &CodeMap::bundled(), &cfg, &[&preset.name]).unwrap();
            assert!(sets.iter().all(|s| s.contains(&preset.name)));
            let earliest = cfg.t0 - Duration::days(360);
            for c in &pop.claims {
                assert!(c.claim_date >= earliest && c.claim_date < cfg.t0);
                c.validate().unwrap();
            }
            for b in &pop.beneficiaries {
                b.validate().unwrap();
                if let Some(d) = b.death_date {
                    assert!(d > cfg.t0 && d <= cfg.t0 + Duration::days(183));
                }
            }
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let a = population(&CohortPreset::chf(), 300, 5);
        let b = population(&CohortPreset::chf(), 300, 5);
        assert_eq!(a, b);
        assert_ne!(a, population(&CohortPreset::chf(), 300, 6));
    }

    #[test]
    fn decedent_diagnoses_rise_toward_t0() {
        let pop = population(&CohortPreset::chf(), 4000, 2);
        let recent: f64 = (1..=3).map(|m| unique_dx_by_outcome(&pop, m).0).sum::<f64>() / 3.0;
        let early: f64 = (10..=12).map(|m| unique_dx_by_outcome(&pop, m).0).sum::<f64>() / 3.0;
        assert!(recent > early, "{recent} vs {early}");
    }

    #[test]
    fn month_one_gap_follows_preset_order() {
        let gaps: Vec<f64> = CohortPreset::defaults()
            .iter()
            .map(|p| {
                let (d, s) = unique_dx_by_outcome(&population(p, 10_000, 1), 1);
                d - s
            })
            .collect();
        assert!(gaps.windows(2).all(|w| w[0] > w[1]), "{gaps:?}");
    }

    #[test]
    fn invalid_presets_are_rejected() {
        let map = CodeMap::bundled();
        let cfg = StudyConfig::default();
        let mut p = CohortPreset::tumor();
        p.event_rate = 0.5;
        assert!(generate_population(&p, 10, &map, &cfg, 0).is_err());
        assert!(generate_population(&CohortPreset::tumor().with_gap_scale(-1.0), 10, &map, &cfg, 0).is_err());
        assert!(generate_population(&CohortPreset::new("hypertension_x", 0.1, 1.0), 10, &map, &cfg, 0).is_err());
        assert!(generate_population(&CohortPreset::tumor(), 1, &map, &cfg, 0).is_err());
    }
}
