use std::collections::BTreeSet;

use crate::claims::{bin_claim_month, StudyConfig, MONTHS};
use crate::features::Cohort;

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub cohort: String,
    pub month: u32,
    /// `event` or `nonevent`.
    pub group: &'static str,
    pub mean_unique_dx: f64,
    pub n: usize,
}

/// Event minus nonevent mean; `None` when either group is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffRow {
    pub cohort: String,
    pub month: u32,
    pub diff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub rows: Vec<TrajectoryRow>,
    pub diffs: Vec<DiffRow>,
}

impl Trajectory {
    pub fn mean(&self, month: u32, group: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.month == month && r.group == group)
            .map(|r| r.mean_unique_dx)
    }

    pub fn diff(&self, month: u32) -> Option<f64> {
        self.diffs.iter().find(|d| d.month == month).and_then(|d| d.diff)
    }
}

/// Distinct diagnosis codes per beneficiary and month, `counts[i][k - 1]`.
pub(crate) fn unique_dx_counts(cohort: &Cohort, config: &StudyConfig) -> Vec<[u64; MONTHS as usize]> {
    cohort
        .beneficiaries
        .iter()
        .map(|b| {
            let mut sets: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); MONTHS as usize];
            for c in cohort.claims.get(&b.id) {
                if let Some(m) = bin_claim_month(c.claim_date, config) {
                    sets[m as usize - 1].extend(c.dx_codes.iter().map(String::as_str));
                }
            }
            std::array::from_fn(|k| sets[k].len() as u64)
        })
        .collect()
}

/// Mean distinct diagnoses per month by outcome group, plus the monthly
/// event-minus-nonevent difference.
pub fn compute_trajectory(cohort: &Cohort, config: &StudyConfig) -> Trajectory {
    let counts = unique_dx_counts(cohort, config);
    let labels = cohort.labels(config);
    let mut out = Trajectory::default();
    for month in 1..=MONTHS {
        let k = month as usize - 1;
        let mut means = [None, None];
        for (g, (name, want)) in [("event", true), ("nonevent", false)].into_iter().enumerate() {
            let (sum, n) = counts
                .iter()
                .zip(&labels)
                .filter(|(_, &l)| l == want)
                .fold((0u64, 0usize), |(s, n), (c, _)| (s + c[k], n + 1));
            if n > 0 {
                let mean = sum as f64 / n as f64;
                means[g] = Some(mean);
                out.rows.push(TrajectoryRow {
                    cohort: cohort.name.clone(),
                    month,
                    group: name,
                    mean_unique_dx: mean,
                    n,
                });
            }
        }
        out.diffs.push(DiffRow {
            cohort: cohort.name.clone(),
            month,
            diff: means[0].zip(means[1]).map(|(e, s)| e - s),
        });
    }
    out
}
