//! Measurement-record files and offline evaluation of recorded outcomes.
//!
//! File layout (CSV, 1-based Majorana indices):
//!
//! ```text
//! scheme,importance
//! run,j,k,beta,setting
//! 0,1,2,-1,-1
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use super::entrywise::estimate_from_tallies;
use super::{importance_distribution, EstimatorResult, MeasurementRecord, PairTally, Scheme};
use crate::error::{Error, Result};
use crate::flo::CovarianceMatrix;
use crate::witness::SupportSet;

const COLUMNS: [&str; 5] = ["run", "j", "k", "beta", "setting"];

pub fn write_records<W: Write>(
    writer: W,
    scheme: Scheme,
    records: &[MeasurementRecord],
) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(writer);
    w.write_record(["scheme", scheme.as_str()])?;
    w.write_record(COLUMNS)?;
    for r in records {
        w.write_record(&[
            r.run.to_string(),
            (r.j + 1).to_string(),
            (r.k + 1).to_string(),
            r.beta.to_string(),
            r.setting.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn field<T: std::str::FromStr>(row: &csv::StringRecord, i: usize, line: usize) -> Result<T> {
    let raw = row
        .get(i)
        .ok_or_else(|| Error::InvalidData(format!("line {line}: missing column {}", COLUMNS[i])))?;
    raw.trim()
        .parse()
        .map_err(|_| Error::InvalidData(format!("line {line}: bad {} value '{raw}'", COLUMNS[i])))
}

pub fn read_records<R: Read>(reader: R) -> Result<(Scheme, Vec<MeasurementRecord>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut rows = rdr.records();
    let first = rows.next().ok_or(Error::EmptyInput)??;
    if first.len() != 2 || first.get(0).map(str::trim) != Some("scheme") {
        return Err(Error::InvalidData(
            "first line must be 'scheme,<importance|entrywise>'".into(),
        ));
    }
    let scheme: Scheme = first[1].parse()?;
    let mut records = Vec::new();
    for (i, row) in rows.enumerate() {
        let row = row?;
        let line = i + 2;
        if row.get(0).map(str::trim) == Some("run") {
            if i == 0 {
                continue;
            }
            return Err(Error::InvalidData(format!("line {line}: repeated header")));
        }
        if row.len() != COLUMNS.len() {
            return Err(Error::InvalidData(format!(
                "line {line}: expected {} columns",
                COLUMNS.len()
            )));
        }
        let j: usize = field(&row, 1, line)?;
        let k: usize = field(&row, 2, line)?;
        if j == 0 || k == 0 {
            return Err(Error::InvalidData(format!(
                "line {line}: Majorana indices start at 1"
            )));
        }
        let beta: i8 = field(&row, 3, line)?;
        if beta != 1 && beta != -1 {
            return Err(Error::InvalidData(format!(
                "line {line}: outcome {beta} is not ±1"
            )));
        }
        let (j, k) = (j - 1, k - 1);
        if j >= k {
            return Err(Error::InvalidIndexOrder { j, k });
        }
        let setting: i64 = field(&row, 4, line)?;
        if setting < -1 {
            return Err(Error::InvalidData(format!(
                "line {line}: setting {setting} is below -1"
            )));
        }
        records.push(MeasurementRecord {
            run: field(&row, 0, line)?,
            j,
            k,
            beta,
            setting,
        });
    }
    Ok((scheme, records))
}

/// Evaluate recorded outcomes against a target.
///
/// Importance records (`setting = -1`) are averaged as samples of
/// `X = 2|M_t| β sgn(M_t[j,k])`; entrywise records are tallied per pair into
/// `M*`, which must then cover all of `Ω`.
pub fn ingest_records(
    records: &[MeasurementRecord],
    scheme: Scheme,
    target: &CovarianceMatrix,
    omega: &SupportSet,
) -> Result<EstimatorResult> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    target.require_pure()?;
    let importance = records.iter().filter(|r| r.setting == -1).count();
    match scheme {
        Scheme::Importance if importance != records.len() => return Err(Error::MixedSchemeError),
        Scheme::Entrywise if importance != 0 => return Err(Error::MixedSchemeError),
        _ => {}
    }
    if let Some(r) = records.iter().find(|r| !omega.contains(r.j, r.k)) {
        return Err(Error::PairNotInSupport { j: r.j, k: r.k });
    }
    match scheme {
        Scheme::Importance => {
            let dist = importance_distribution(target, omega)?;
            let sum: i64 = records
                .iter()
                .map(|r| {
                    let idx = omega
                        .pairs
                        .binary_search(&(r.j, r.k))
                        .expect("checked above");
                    i64::from(r.beta * dist.signs[idx])
                })
                .sum();
            let n = records.len() as u64;
            let x_star = 2.0 * dist.abs_sum * sum as f64 / n as f64;
            Ok(EstimatorResult::from_overlap(
                Scheme::Importance,
                target.modes(),
                x_star,
                n,
            ))
        }
        Scheme::Entrywise => {
            let mut tallies: BTreeMap<(usize, usize), (u64, i64)> = BTreeMap::new();
            let mut runs = BTreeSet::new();
            for r in records {
                let e = tallies.entry((r.j, r.k)).or_default();
                e.0 += 1;
                e.1 += i64::from(r.beta);
                runs.insert(r.run);
            }
            if let Some(&(j, k)) = omega.pairs.iter().find(|p| !tallies.contains_key(p)) {
                return Err(Error::IncompleteSupport { j, k });
            }
            let tallies = tallies
                .into_iter()
                .map(|((j, k), (count, sum))| PairTally { j, k, count, sum })
                .collect();
            estimate_from_tallies(target, tallies, runs.len() as u64)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flo::{fock_covariance, FockString};
    use crate::witness::support_set;

    fn parse(text: &str) -> Result<(Scheme, Vec<MeasurementRecord>)> {
        read_records(text.as_bytes())
    }

    #[test]
    fn hand_built_single_mode_file() {
        let text = "scheme,importance\nrun,j,k,beta,setting\n0,1,2,-1,-1\n1,1,2,-1,-1\n2,1,2,-1,-1\n3,1,2,-1,-1\n";
        let (scheme, recs) = parse(text).unwrap();
        assert_eq!(scheme, Scheme::Importance);
        assert_eq!(
            recs[0],
            MeasurementRecord {
                run: 0,
                j: 0,
                k: 1,
                beta: -1,
                setting: -1
            }
        );
        let t = fock_covariance(&FockString::zeros(1));
        let r = ingest_records(&recs, scheme, &t, &support_set(&t, 0.0)).unwrap();
        assert_eq!(r.x_star, 2.0);
        assert_eq!(r.f_w_star, 1.0);
        assert_eq!(r.n, 4);
    }

    #[test]
    fn column_header_is_optional() {
        let (_, recs) = parse("scheme,importance\n0,1,2,1,-1\n").unwrap();
        assert_eq!(recs.len(), 1);
    }

    #[test]
    fn write_then_read() {
        let recs = vec![
            MeasurementRecord {
                run: 0,
                j: 0,
                k: 3,
                beta: 1,
                setting: 2,
            },
            MeasurementRecord {
                run: 7,
                j: 2,
                k: 5,
                beta: -1,
                setting: 0,
            },
        ];
        let mut buf = Vec::new();
        write_records(&mut buf, Scheme::Entrywise, &recs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("scheme,entrywise\nrun,j,k,beta,setting\n0,1,4,1,2\n"));
        assert!(!text.contains('\r'));
        assert_eq!(
            read_records(buf.as_slice()).unwrap(),
            (Scheme::Entrywise, recs)
        );
    }

    #[test]
    fn malformed_files() {
        assert!(matches!(parse(""), Err(Error::EmptyInput)));
        assert!(parse("run,j,k,beta,setting\n").is_err());
        assert!(parse("scheme,bayesian\n").is_err());
        assert!(parse("scheme,importance\n0,1,2,0,-1\n").is_err());
        assert!(parse("scheme,importance\n0,0,2,1,-1\n").is_err());
        assert!(matches!(
            parse("scheme,importance\n0,3,2,1,-1\n"),
            Err(Error::InvalidIndexOrder { .. })
        ));
        assert!(parse("scheme,importance\n0,1,2,1\n").is_err());
        assert!(parse("scheme,importance\n0,1,x,1,-1\n").is_err());
    }

    #[test]
    fn ingest_errors() {
        let t = fock_covariance(&FockString::zeros(2));
        let omega = support_set(&t, 0.0);
        assert!(matches!(
            ingest_records(&[], Scheme::Importance, &t, &omega),
            Err(Error::EmptyInput)
        ));
        let off = [MeasurementRecord {
            run: 0,
            j: 0,
            k: 2,
            beta: 1,
            setting: -1,
        }];
        assert!(matches!(
            ingest_records(&off, Scheme::Importance, &t, &omega),
            Err(Error::PairNotInSupport { j: 0, k: 2 })
        ));
        let mixed = [
            MeasurementRecord {
                run: 0,
                j: 0,
                k: 1,
                beta: 1,
                setting: -1,
            },
            MeasurementRecord {
                run: 1,
                j: 2,
                k: 3,
                beta: 1,
                setting: 0,
            },
        ];
        assert!(matches!(
            ingest_records(&mixed, Scheme::Importance, &t, &omega),
            Err(Error::MixedSchemeError)
        ));
        assert!(matches!(
            ingest_records(&mixed, Scheme::Entrywise, &t, &omega),
            Err(Error::MixedSchemeError)
        ));
        let partial = [MeasurementRecord {
            run: 0,
            j: 0,
            k: 1,
            beta: 1,
            setting: 0,
        }];
        assert!(matches!(
            ingest_records(&partial, Scheme::Entrywise, &t, &omega),
            Err(Error::IncompleteSupport { j: 2, k: 3 })
        ));
    }
}
