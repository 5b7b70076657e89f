//! CSV readers and writers for the beneficiary and claims files.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;

use super::{Beneficiary, Claim, ClaimType, StudyConfig};
use crate::error::{Error, Result};

const BENEFICIARY_HEADER: [&str; 8] = [
    "id",
    "age_at_t0",
    "sex",
    "state",
    "race",
    "income_decile",
    "death_date",
    "hospice_at_t0",
];

const CLAIM_HEADER: [&str; 6] = [
    "beneficiary_id",
    "claim_date",
    "claim_type",
    "dx_codes",
    "dme_code",
    "days",
];

/// Beneficiaries accepted at ingestion, with counts of rejected records.
#[derive(Debug, Clone, Default)]
pub struct Ingested {
    pub beneficiaries: Vec<Beneficiary>,
    pub rejected_dead: usize,
    pub rejected_hospice: usize,
}

fn parse_date(field: &str, what: &str, line: u64) -> Result<Option<NaiveDate>> {
    if field.is_empty() {
        return Ok(None);
    }
    NaiveDate::parse_from_str(field, "%Y-%m-%d")
        .map(Some)
        .map_err(|e| Error::Parse(format!("line {line}: bad {what} {field:?}: {e}")))
}

fn parse_num<T: std::str::FromStr>(field: &str, what: &str, line: u64) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    field
        .parse()
        .map_err(|e| Error::Parse(format!("line {line}: bad {what} {field:?}: {e}")))
}

fn parse_bool(field: &str, line: u64) -> Result<bool> {
    match field {
        "true" | "1" => Ok(true),
        "false" | "0" | "" => Ok(false),
        _ => Err(Error::Parse(format!(
            "line {line}: bad hospice_at_t0 {field:?}"
        ))),
    }
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    if found.iter().ne(expected.iter().copied()) {
        return Err(Error::Parse(format!(
            "unexpected header {:?}, expected {}",
            found.iter().collect::<Vec<_>>(),
            expected.join(",")
        )));
    }
    Ok(())
}

/// Parses a beneficiary CSV. Records dead on/before t0 or in hospice at t0
/// are rejected and counted.
pub fn parse_beneficiaries<R: Read>(reader: R, config: &StudyConfig) -> Result<Ingested> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    check_header(rdr.headers()?, &BENEFICIARY_HEADER)?;
    let mut out = Ingested::default();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let f = |i: usize| rec.get(i).unwrap_or("").trim();
        let b = Beneficiary {
            id: f(0).to_string(),
            age_at_t0: parse_num(f(1), "age_at_t0", line)?,
            sex: f(2).parse()?,
            state: f(3).to_string(),
            race: f(4).parse()?,
            income_decile: parse_num(f(5), "income_decile", line)?,
            death_date: parse_date(f(6), "death_date", line)?,
            hospice_at_t0: parse_bool(f(7), line)?,
        };
        if b.id.is_empty() {
            return Err(Error::Parse(format!("line {line}: empty id")));
        }
        b.validate()?;
        if !b.alive_at(config.t0) {
            out.rejected_dead += 1;
        } else if b.hospice_at_t0 {
            out.rejected_hospice += 1;
        } else {
            out.beneficiaries.push(b);
        }
    }
    Ok(out)
}

pub fn parse_claims<R: Read>(reader: R) -> Result<Vec<Claim>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    check_header(rdr.headers()?, &CLAIM_HEADER)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let f = |i: usize| rec.get(i).unwrap_or("").trim();
        let claim_type: ClaimType = f(2).parse()?;
        let dx_codes = f(3)
            .split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect();
        let c = Claim {
            beneficiary_id: f(0).to_string(),
            claim_date: parse_date(f(1), "claim_date", line)?
                .ok_or_else(|| Error::Parse(format!("line {line}: missing claim_date")))?,
            claim_type,
            dx_codes,
            dme_code: Some(f(4)).filter(|s| !s.is_empty()).map(String::from),
            days: if f(5).is_empty() {
                0
            } else {
                parse_num(f(5), "days", line)?
            },
        };
        c.validate()?;
        out.push(c);
    }
    Ok(out)
}

pub fn read_beneficiaries(path: impl AsRef<Path>, config: &StudyConfig) -> Result<Ingested> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_beneficiaries(file, config)
}

pub fn read_claims(path: impl AsRef<Path>) -> Result<Vec<Claim>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_claims(file)
}

pub fn write_beneficiaries<W: Write>(writer: W, beneficiaries: &[Beneficiary]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(BENEFICIARY_HEADER)?;
    for b in beneficiaries {
        w.write_record([
            b.id.clone(),
            b.age_at_t0.to_string(),
            b.sex.as_str().to_string(),
            b.state.clone(),
            b.race.as_str().to_string(),
            b.income_decile.to_string(),
            b.death_date.map(|d| d.to_string()).unwrap_or_default(),
            b.hospice_at_t0.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<beneficiaries>", e))?;
    Ok(())
}

pub fn write_claims<W: Write>(writer: W, claims: &[Claim]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CLAIM_HEADER)?;
    for c in claims {
        w.write_record([
            c.beneficiary_id.clone(),
            c.claim_date.to_string(),
            c.claim_type.as_str().to_string(),
            c.dx_codes.join(";"),
            c.dme_code.clone().unwrap_or_default(),
            c.days.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<claims>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ingestion_rejects_dead_and_hospice() {
        let csv = "id,age_at_t0,sex,state,race,income_decile,death_date,hospice_at_t0\n\
                   B1,70,female,MA,white,3,,false\n\
                   B2,80,male,TX,black,9,2010-06-30,false\n\
                   B3,75,male,TX,other,1,2010-07-01,false\n\
                   B4,90,female,CA,hispanic,10,2010-09-01,true\n\
                   B5,67,male,NY,white,2,2010-08-15,false\n";
        let got = parse_beneficiaries(csv.as_bytes(), &StudyConfig::default()).unwrap();
        assert_eq!(got.rejected_dead, 2);
        assert_eq!(got.rejected_hospice, 1);
        let ids: Vec<_> = got.beneficiaries.iter().map(|b| b.id.as_str()).collect();
        assert_eq!(ids, ["B1", "B5"]);
    }

    #[test]
    fn invalid_beneficiaries_are_errors() {
        let young = "id,age_at_t0,sex,state,race,income_decile,death_date,hospice_at_t0\n\
                     B1,64,female,MA,white,3,,false\n";
        assert!(parse_beneficiaries(young.as_bytes(), &StudyConfig::default()).is_err());
        let decile = "id,age_at_t0,sex,state,race,income_decile,death_date,hospice_at_t0\n\
                      B1,70,female,MA,white,11,,false\n";
        assert!(parse_beneficiaries(decile.as_bytes(), &StudyConfig::default()).is_err());
        let header = "id,age,sex,state,race,income_decile,death_date,hospice_at_t0\n";
        assert!(parse_beneficiaries(header.as_bytes(), &StudyConfig::default()).is_err());
    }

    #[test]
    fn claims_parse_and_validate() {
        let csv = "beneficiary_id,claim_date,claim_type,dx_codes,dme_code,days\n\
                   B1,2010-05-01,inpatient,42822;4011,,4\n\
                   B1,2010-05-10,dme,4280,K0001,0\n";
        let claims = parse_claims(csv.as_bytes()).unwrap();
        assert_eq!(claims.len(), 2);
        assert_eq!(claims[0].dx_codes, ["42822", "4011"]);
        assert_eq!(claims[1].dme_code.as_deref(), Some("K0001"));

        let bad_days = "beneficiary_id,claim_date,claim_type,dx_codes,dme_code,days\n\
                        B1,2010-05-01,emergency,42822,,2\n";
        assert!(parse_claims(bad_days.as_bytes()).is_err());
        let dme_missing = "beneficiary_id,claim_date,claim_type,dx_codes,dme_code,days\n\
                           B1,2010-05-01,dme,42822,,0\n";
        assert!(parse_claims(dme_missing.as_bytes()).is_err());
        let code_not_dme = "beneficiary_id,claim_date,claim_type,dx_codes,dme_code,days\n\
                            B1,2010-05-01,emergency,42822,K0001,0\n";
        assert!(parse_claims(code_not_dme.as_bytes()).is_err());
    }

    #[test]
    fn write_then_read_claims() {
        let csv = "beneficiary_id,claim_date,claim_type,dx_codes,dme_code,days\n\
                   B1,2010-05-01,snf,42822;4011,,12\n";
        let claims = parse_claims(csv.as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_claims(&mut buf, &claims).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), csv);
    }
}
