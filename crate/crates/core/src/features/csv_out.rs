use std::io::{Read, Write};

use super::FeatureMatrix;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// `id,<columns...>,label` with one row per beneficiary.
pub fn write_feature_csv<W: Write>(writer: W, fm: &FeatureMatrix) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["id".to_string()];
    header.extend(fm.column_names().iter().cloned());
    header.push("label".into());
    w.write_record(&header)?;
    for (i, id) in fm.ids.iter().enumerate() {
        let mut rec = Vec::with_capacity(header.len());
        rec.push(id.clone());
        rec.extend(fm.matrix.row(i).iter().map(|v| v.to_string()));
        rec.push(if fm.labels[i] { "1" } else { "0" }.into());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<features>", e))?;
    Ok(())
}

/// The sidecar metadata line for a feature CSV.
pub fn write_feature_meta<W: Write>(mut writer: W, fm: &FeatureMatrix) -> Result<()> {
    writeln!(
        writer,
        "cohort={},variable_set={},boundary={}",
        fm.cohort, fm.variable_set, fm.window_split
    )
    .map_err(|e| Error::io("<features meta>", e))
}

/// Reads back ids, the feature matrix and labels from a feature CSV.
pub fn read_feature_csv<R: Read>(reader: R) -> Result<(Vec<String>, Matrix, Vec<bool>)> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    let n = header.len();
    if n < 2 || &header[0] != "id" || &header[n - 1] != "label" {
        return Err(Error::Parse("feature CSV must start with id and end with label".into()));
    }
    let names: Vec<String> = header.iter().skip(1).take(n - 2).map(String::from).collect();
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    let mut data = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        ids.push(rec[0].to_string());
        for v in rec.iter().skip(1).take(n - 2) {
            data.push(
                v.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad feature value {v:?}: {e}")))?,
            );
        }
        labels.push(match &rec[n - 1] {
            "1" => true,
            "0" => false,
            other => return Err(Error::Parse(format!("bad label {other:?}"))),
        });
    }
    let rows = ids.len();
    Ok((ids, Matrix::new(names, rows, data)?, labels))
}
