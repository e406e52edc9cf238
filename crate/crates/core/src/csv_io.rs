//! CSV ingestion for contingency tables.
//!
//! Two layouts are accepted. Row data has one column per variable and one
//! subject per line. Count data has the same variable columns plus a
//! `count` column holding the multiplicity of that state combination.
//! Variable states are the distinct labels seen in each column, sorted.
//! A column whose labels are all `true`/`false` always gets both states.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tables::{ContingencyTable, Variable};

/// Name of the multiplicity column in count data.
pub const COUNT_COLUMN: &str = "count";

/// Reads one-subject-per-line data.
pub fn read_rows<R: Read>(reader: R) -> Result<ContingencyTable> {
    read(reader, false)
}

/// Reads pre-aggregated data with a `count` column.
pub fn read_counts<R: Read>(reader: R) -> Result<ContingencyTable> {
    read(reader, true)
}

pub fn read_path(path: impl AsRef<Path>, counts: bool) -> Result<ContingencyTable> {
    read(File::open(path)?, counts)
}

fn read<R: Read>(reader: R, counts: bool) -> Result<ContingencyTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();

    let count_col = header.iter().position(|h| h == COUNT_COLUMN);
    if counts && count_col.is_none() {
        return Err(Error::Csv {
            line: Some(1),
            message: format!("count data needs a `{COUNT_COLUMN}` column"),
        });
    }
    let count_col = if counts { count_col } else { None };
    let var_cols: Vec<usize> = (0..header.len())
        .filter(|&i| Some(i) != count_col)
        .collect();
    if var_cols.is_empty() {
        return Err(Error::Csv {
            line: Some(1),
            message: "no variable columns".into(),
        });
    }

    let mut rows: Vec<(Vec<String>, u64)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line());
        let labels: Vec<String> = var_cols.iter().map(|&i| rec[i].to_string()).collect();
        if let Some(l) = labels.iter().position(String::is_empty) {
            return Err(Error::Csv {
                line,
                message: format!("empty value in column `{}`", header[var_cols[l]]),
            });
        }
        let n = match count_col {
            Some(c) => rec[c].parse::<u64>().map_err(|e| Error::Csv {
                line,
                message: format!("bad count `{}`: {e}", &rec[c]),
            })?,
            None => 1,
        };
        rows.push((labels, n));
    }

    let mut variables = Vec::with_capacity(var_cols.len());
    for (j, &col) in var_cols.iter().enumerate() {
        let seen: BTreeSet<&str> = rows.iter().map(|(l, _)| l[j].as_str()).collect();
        let name = header[col].clone();
        let var = if seen.iter().all(|s| *s == "true" || *s == "false") {
            Variable::boolean(name)
        } else if seen.len() < 2 {
            return Err(Error::Csv {
                line: None,
                message: format!("column `{name}` has fewer than two distinct values"),
            });
        } else {
            Variable::new(name, seen)?
        };
        variables.push(var);
    }

    let mut table = ContingencyTable::new(variables)?;
    for (labels, n) in &rows {
        table.add(labels, *n)?;
    }
    Ok(table)
}
