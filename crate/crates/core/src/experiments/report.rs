use std::io::Write;

use super::{ScreeningRow, SweepRow, Trajectory};
use crate::error::{Error, Result};

fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush().map_err(|e| Error::io("<report>", e))
}

/// `cohort,family,variable_set,sampling,params,auc,sd`
pub fn write_screening_csv<W: Write>(writer: W, rows: &[ScreeningRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["cohort", "family", "variable_set", "sampling", "params", "auc", "sd"])?;
    for r in rows {
        w.write_record([
            r.cohort.clone(),
            r.family.to_string(),
            r.variable_set.to_string(),
            r.spec.sampling.to_string(),
            r.spec.params_string(),
            format!("{:.3}", r.eval.auc),
            format!("{:.3}", r.eval.sd),
        ])?;
    }
    finish(w)
}

/// `cohort,boundary,auc,sd`; the no-split row has an empty boundary.
pub fn write_sweep_csv<W: Write>(writer: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["cohort", "boundary", "auc", "sd"])?;
    for r in rows {
        w.write_record([
            r.cohort.clone(),
            r.split.to_string(),
            format!("{:.3}", r.eval.auc),
            format!("{:.3}", r.eval.sd),
        ])?;
    }
    finish(w)
}

/// `cohort,month,group,mean_unique_dx`
pub fn write_trajectory_csv<W: Write>(writer: W, trajectories: &[Trajectory]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["cohort", "month", "group", "mean_unique_dx"])?;
    for r in trajectories.iter().flat_map(|t| &t.rows) {
        w.write_record([
            r.cohort.clone(),
            r.month.to_string(),
            r.group.to_string(),
            format!("{:.3}", r.mean_unique_dx),
        ])?;
    }
    finish(w)
}

/// `cohort,month,diff`; `NA` when a group is empty.
pub fn write_diff_csv<W: Write>(writer: W, trajectories: &[Trajectory]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["cohort", "month", "diff"])?;
    for d in trajectories.iter().flat_map(|t| &t.diffs) {
        w.write_record([
            d.cohort.clone(),
            d.month.to_string(),
            d.diff.map_or_else(|| "NA".to_string(), |v| format!("{v:.3}")),
        ])?;
    }
    finish(w)
}
