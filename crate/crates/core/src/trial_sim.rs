//! Forward sampling of synthetic trials from a [`ParadoxBnSpec`].
//!
//! Each record is drawn ancestrally: `X1..Xn` from their priors, `Drug` given
//! `Xn`, then `Recovered` given `(Xn, Drug)`.
//!
//! Random numbers come from ChaCha8. Record `i` of a dataset with seed `s`
//! uses the generator `ChaCha8Rng::seed_from_u64(s)` switched to stream `i`,
//! and consumes `n + 2` uniform `f64` draws in the order above. Records are
//! therefore independent of each other and of scheduling, so sampling runs
//! in parallel and still reproduces bit-for-bit on any platform.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::paradox_bn::{case1_recovery, ParadoxBnSpec};
use crate::tables::{ContingencyTable, Variable};

pub const DRUG: &str = "Drug";
pub const RECOVERED: &str = "Recovered";

/// Column name of `X(i+1)`.
pub fn x_name(i: usize) -> String {
    format!("X{}", i + 1)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TrialRecord {
    pub x: Vec<bool>,
    pub d: bool,
    pub r: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialDataset {
    /// Hex SHA-256 of the generating spec's compact JSON.
    pub spec_fingerprint: String,
    pub seed: u64,
    pub records: Vec<TrialRecord>,
}

impl TrialDataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_csv(&self.records, out)
    }
}

pub fn fingerprint(spec: &ParadoxBnSpec) -> String {
    let json = serde_json::to_string(spec).expect("spec serializes");
    hex::encode(Sha256::digest(json.as_bytes()))
}

fn draw_record(spec: &ParadoxBnSpec, seed: u64, index: u64) -> TrialRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let x: Vec<bool> = (0..spec.n)
        .map(|i| {
            let prior = if i + 1 == spec.n {
                spec.prior_xn
            } else {
                spec.priors_x[i]
            };
            rng.random::<f64>() < prior
        })
        .collect();
    let xn = x[spec.n - 1];
    let d = rng.random::<f64>() < if xn { spec.p } else { spec.q };
    let r = rng.random::<f64>() < case1_recovery(spec, xn, d);
    TrialRecord { x, d, r }
}

/// Draws `size` independent subjects.
pub fn sample(spec: &ParadoxBnSpec, size: usize, seed: u64) -> Result<TrialDataset> {
    spec.validate()?;
    if size == 0 {
        return Err(Error::InvalidInput("sample size must be at least 1".into()));
    }
    let records = (0..size as u64)
        .into_par_iter()
        .map(|i| draw_record(spec, seed, i))
        .collect();
    Ok(TrialDataset {
        spec_fingerprint: fingerprint(spec),
        seed,
        records,
    })
}

fn schema(n: usize) -> Vec<Variable> {
    (0..n)
        .map(|i| Variable::boolean(x_name(i)))
        .chain([Variable::boolean(DRUG), Variable::boolean(RECOVERED)])
        .collect()
}

/// Counts the records over `X1..Xn, Drug, Recovered` (states `false`,
/// `true`).
pub fn to_table(dataset: &TrialDataset) -> Result<ContingencyTable> {
    records_to_table(&dataset.records)
}

pub fn records_to_table(records: &[TrialRecord]) -> Result<ContingencyTable> {
    let first = records.first().ok_or(Error::EmptyDataset)?;
    let n = first.x.len();
    let mut table = ContingencyTable::new(schema(n))?;
    for (row, rec) in records.iter().enumerate() {
        if rec.x.len() != n {
            return Err(Error::ArityMismatch {
                row,
                expected: n + 2,
                found: rec.x.len() + 2,
            });
        }
        let key = rec
            .x
            .iter()
            .chain([&rec.d, &rec.r])
            .map(|&b| b as usize)
            .collect();
        table.add_at(key, 1)?;
    }
    Ok(table)
}

/// Writes `X1,...,Xn,Drug,Recovered` followed by one `true`/`false` line
/// per record.
pub fn write_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let n = records.first().map_or(0, |r| r.x.len());
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = (0..n)
        .map(x_name)
        .chain([DRUG.to_string(), RECOVERED.to_string()])
        .collect();
    w.write_record(&header)?;
    let label = |b: bool| if b { "true" } else { "false" };
    for rec in records {
        w.write_record(rec.x.iter().chain([&rec.d, &rec.r]).map(|&b| label(b)))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the format produced by [`write_csv`].
pub fn read_csv<R: Read>(input: R) -> Result<Vec<TrialRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let n = header.len().checked_sub(2).ok_or_else(|| Error::Csv {
        line: Some(1),
        message: "expected at least Drug and Recovered columns".into(),
    })?;
    let expected: Vec<String> = (0..n)
        .map(x_name)
        .chain([DRUG.to_string(), RECOVERED.to_string()])
        .collect();
    if header != expected {
        return Err(Error::Csv {
            line: Some(1),
            message: format!("expected header `{}`", expected.join(",")),
        });
    }
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line());
        let values = rec
            .iter()
            .map(|v| match v {
                "true" => Ok(true),
                "false" => Ok(false),
                other => Err(Error::Csv {
                    line,
                    message: format!("expected true or false, found `{other}`"),
                }),
            })
            .collect::<Result<Vec<bool>>>()?;
        records.push(TrialRecord {
            x: values[..n].to_vec(),
            d: values[n],
            r: values[n + 1],
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_size_rejected() {
        assert!(sample(&ParadoxBnSpec::canonical(1), 0, 1).is_err());
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let spec = ParadoxBnSpec::canonical(3);
        let a = sample(&spec, 500, 42).unwrap();
        let b = sample(&spec, 500, 42).unwrap();
        let c = sample(&spec, 500, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.records, c.records);
        assert_eq!(a.len(), 500);
        assert!(a.records.iter().all(|r| r.x.len() == 3));
    }

    #[test]
    fn prefix_stable_across_sizes() {
        let spec = ParadoxBnSpec::canonical(2);
        let small = sample(&spec, 10, 7).unwrap();
        let big = sample(&spec, 100, 7).unwrap();
        assert_eq!(small.records[..], big.records[..10]);
    }

    #[test]
    fn impossible_recovery() {
        let mut spec = ParadoxBnSpec::canonical(2);
        spec.p1 = 0.0;
        spec.p2 = 0.0;
        spec.p3 = 0.0;
        spec.p4 = 0.0;
        let ds = sample(&spec, 1000, 3).unwrap();
        assert!(ds.records.iter().all(|r| !r.r));
    }

    #[test]
    fn deterministic_assignment() {
        let mut spec = ParadoxBnSpec::canonical(1);
        spec.p = 1.0;
        spec.q = 0.0;
        spec.prior_xn = 1.0;
        let ds = sample(&spec, 1000, 3).unwrap();
        assert!(ds.records.iter().all(|r| r.d && r.x[0]));
    }

    #[test]
    fn single_record_table() {
        let rec = TrialRecord {
            x: vec![true],
            d: true,
            r: true,
        };
        let t = records_to_table(&[rec]).unwrap();
        assert_eq!(t.cells().count(), 1);
        assert_eq!(t.count(&["true", "true", "true"]).unwrap(), 1);
        assert!(matches!(records_to_table(&[]), Err(Error::EmptyDataset)));
    }

    #[test]
    fn csv_round_trip() {
        let ds = sample(&ParadoxBnSpec::canonical(2), 50, 9).unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("X1,X2,Drug,Recovered\n"));
        assert_eq!(read_csv(text.as_bytes()).unwrap(), ds.records);
    }

    #[test]
    fn csv_rejects_bad_values() {
        assert!(read_csv("X1,Drug,Recovered\ntrue,yes,false\n".as_bytes()).is_err());
        assert!(read_csv("A,Drug,Recovered\ntrue,true,false\n".as_bytes()).is_err());
    }
}
