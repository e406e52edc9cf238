//! N-way categorical contingency tables and stratified risk differences.
//!
//! A [`ContingencyTable`] stores non-negative counts keyed by a full state
//! tuple over its ordered variables. Treatment and outcome are ordinary
//! variables of the table; [`detect_reversal`] picks them out by name and
//! compares the pooled risk difference against the risk difference within
//! each stratum.
//!
//! Rates are reported as `f64`, but every directional verdict is decided by
//! exact integer cross-multiplication of the underlying counts.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weighted mean `Σ value·weight / Σ weight`.
///
/// Averaging per-year averages without their module counts is exactly the
/// mistake this guards against: `[(50, 7), (70, 3)]` is 56, not 60.
pub fn weighted_average(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::InvalidInput(
            "weighted average of an empty list".into(),
        ));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &(value, weight)) in pairs.iter().enumerate() {
        if !value.is_finite() || !weight.is_finite() || weight < 0.0 {
            return Err(Error::InvalidInput(format!(
                "pair {i}: value {value} with weight {weight}"
            )));
        }
        num += value * weight;
        den += weight;
    }
    if den <= 0.0 {
        return Err(Error::InvalidInput("total weight is zero".into()));
    }
    Ok(num / den)
}

/// A named categorical variable with an ordered list of states.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Variable {
    name: String,
    states: Vec<String>,
}

impl Variable {
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        states: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let name = name.into();
        let states: Vec<String> = states.into_iter().map(Into::into).collect();
        if name.is_empty() {
            return Err(Error::InvalidInput("variable name is empty".into()));
        }
        if states.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "variable `{name}` needs at least two states"
            )));
        }
        let mut seen = BTreeSet::new();
        for s in &states {
            if !seen.insert(s.as_str()) {
                return Err(Error::DuplicateState {
                    variable: name,
                    state: s.clone(),
                });
            }
        }
        Ok(Variable { name, states })
    }

    /// A two-state variable with labels `false` and `true`, in that order.
    pub fn boolean(name: impl Into<String>) -> Self {
        Variable {
            name: name.into(),
            states: vec!["false".into(), "true".into()],
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }

    fn require_state(&self, label: &str, row: Option<usize>) -> Result<usize> {
        self.state_index(label).ok_or_else(|| Error::UnknownState {
            variable: self.name.clone(),
            state: label.to_string(),
            row,
        })
    }
}

/// Counts over the full cross product of a list of variables.
///
/// Only non-zero cells are stored, so two tables over the same variables
/// compare equal exactly when every cell count agrees.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContingencyTable {
    variables: Vec<Variable>,
    counts: BTreeMap<Vec<usize>, u64>,
}

impl ContingencyTable {
    /// An all-zero table.
    pub fn new(variables: Vec<Variable>) -> Result<Self> {
        let mut names = BTreeSet::new();
        for v in &variables {
            if !names.insert(v.name.as_str()) {
                return Err(Error::DuplicateVariable(v.name.clone()));
            }
        }
        Ok(ContingencyTable {
            variables,
            counts: BTreeMap::new(),
        })
    }

    /// Builds a table from labelled cells. Repeated keys accumulate.
    pub fn from_cells<S: AsRef<str>>(
        variables: Vec<Variable>,
        cells: &[(&[S], u64)],
    ) -> Result<Self> {
        let mut table = ContingencyTable::new(variables)?;
        for (labels, count) in cells {
            table.add(labels, *count)?;
        }
        Ok(table)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn variable_index(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Adds `count` to the cell with the given state labels.
    pub fn add<S: AsRef<str>>(&mut self, labels: &[S], count: u64) -> Result<()> {
        let key = self.key_of(labels, None)?;
        self.add_at(key, count)
    }

    /// Adds `count` to the cell with the given state indices.
    pub fn add_at(&mut self, key: Vec<usize>, count: u64) -> Result<()> {
        if key.len() != self.variables.len() {
            return Err(Error::InvalidInput(format!(
                "key has {} components, table has {} variables",
                key.len(),
                self.variables.len()
            )));
        }
        for (v, &i) in self.variables.iter().zip(&key) {
            if i >= v.cardinality() {
                return Err(Error::InvalidInput(format!(
                    "state index {i} out of range for `{}`",
                    v.name
                )));
            }
        }
        if count == 0 {
            return Ok(());
        }
        let cell = self.counts.entry(key).or_insert(0);
        *cell = cell.checked_add(count).ok_or(Error::CountOverflow)?;
        Ok(())
    }

    pub fn count<S: AsRef<str>>(&self, labels: &[S]) -> Result<u64> {
        let key = self.key_of(labels, None)?;
        Ok(self.count_at(&key))
    }

    pub fn count_at(&self, key: &[usize]) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    /// Non-zero cells in key order.
    pub fn cells(&self) -> impl Iterator<Item = (&[usize], u64)> {
        self.counts.iter().map(|(k, &c)| (k.as_slice(), c))
    }

    /// Total count over all cells.
    pub fn total(&self) -> Result<u64> {
        self.counts
            .values()
            .try_fold(0u64, |acc, &c| acc.checked_add(c))
            .ok_or(Error::CountOverflow)
    }

    /// State labels for a key.
    pub fn labels(&self, key: &[usize]) -> Vec<String> {
        self.variables
            .iter()
            .zip(key)
            .map(|(v, &i)| v.states[i].clone())
            .collect()
    }

    /// One labelled row per counted subject, in key order.
    pub fn expand(&self) -> Vec<Vec<String>> {
        let mut rows = Vec::new();
        for (key, &count) in &self.counts {
            let labels = self.labels(key);
            for _ in 0..count {
                rows.push(labels.clone());
            }
        }
        rows
    }

    fn key_of<S: AsRef<str>>(&self, labels: &[S], row: Option<usize>) -> Result<Vec<usize>> {
        if labels.len() != self.variables.len() {
            return Err(match row {
                Some(row) => Error::ArityMismatch {
                    row,
                    expected: self.variables.len(),
                    found: labels.len(),
                },
                None => Error::InvalidInput(format!(
                    "expected {} state labels, got {}",
                    self.variables.len(),
                    labels.len()
                )),
            });
        }
        self.variables
            .iter()
            .zip(labels)
            .map(|(v, l)| v.require_state(l.as_ref(), row))
            .collect()
    }
}

/// Builds a table whose cell counts are the multiplicities of `records`.
///
/// Errors name the offending row (0-based).
pub fn from_records<R, S>(records: &[R], schema: Vec<Variable>) -> Result<ContingencyTable>
where
    R: AsRef<[S]>,
    S: AsRef<str>,
{
    let mut table = ContingencyTable::new(schema)?;
    for (row, record) in records.iter().enumerate() {
        let key = table.key_of(record.as_ref(), Some(row))?;
        table.add_at(key, 1)?;
    }
    Ok(table)
}

/// Sums out the named variables.
pub fn marginalize<S: AsRef<str>>(
    table: &ContingencyTable,
    drop: &[S],
) -> Result<ContingencyTable> {
    let mut dropped = BTreeSet::new();
    for name in drop {
        dropped.insert(table.variable_index(name.as_ref())?);
    }
    if !table.variables.is_empty() && dropped.len() == table.variables.len() {
        return Err(Error::InvalidInput(
            "cannot marginalize over every variable".into(),
        ));
    }
    let keep: Vec<usize> = (0..table.variables.len())
        .filter(|i| !dropped.contains(i))
        .collect();
    let variables = keep.iter().map(|&i| table.variables[i].clone()).collect();
    let mut out = ContingencyTable::new(variables)?;
    for (key, &count) in &table.counts {
        let sub: Vec<usize> = keep.iter().map(|&i| key[i]).collect();
        out.add_at(sub, count)?;
    }
    Ok(out)
}

/// The treatment variable together with its treated and control states.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Treatment {
    pub variable: String,
    pub treated: String,
    pub control: String,
}

impl Treatment {
    pub fn new(
        variable: impl Into<String>,
        treated: impl Into<String>,
        control: impl Into<String>,
    ) -> Self {
        Treatment {
            variable: variable.into(),
            treated: treated.into(),
            control: control.into(),
        }
    }
}

/// The outcome variable and the state counted as success. Every other
/// state counts as failure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub variable: String,
    pub success: String,
}

impl Outcome {
    pub fn new(variable: impl Into<String>, success: impl Into<String>) -> Self {
        Outcome {
            variable: variable.into(),
            success: success.into(),
        }
    }
}

/// Raw success and subject counts for both arms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArmCounts {
    pub treated_recovered: u64,
    pub treated_total: u64,
    pub control_recovered: u64,
    pub control_total: u64,
}

impl ArmCounts {
    fn checked_add(self, other: ArmCounts) -> Result<ArmCounts> {
        let add = |a: u64, b: u64| a.checked_add(b).ok_or(Error::CountOverflow);
        Ok(ArmCounts {
            treated_recovered: add(self.treated_recovered, other.treated_recovered)?,
            treated_total: add(self.treated_total, other.treated_total)?,
            control_recovered: add(self.control_recovered, other.control_recovered)?,
            control_total: add(self.control_total, other.control_total)?,
        })
    }

    pub fn is_defined(&self) -> bool {
        self.treated_total > 0 && self.control_total > 0
    }
}

/// Treated and control success rates and their difference.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssociationSummary {
    pub treated_recovered: u64,
    pub treated_total: u64,
    pub control_recovered: u64,
    pub control_total: u64,
    pub treated_rate: f64,
    pub control_rate: f64,
    pub delta: f64,
}

impl AssociationSummary {
    pub fn from_counts(counts: ArmCounts) -> Result<Self> {
        if counts.treated_total == 0 {
            return Err(Error::UndefinedRate { arm: "treated" });
        }
        if counts.control_total == 0 {
            return Err(Error::UndefinedRate { arm: "control" });
        }
        let treated_rate = counts.treated_recovered as f64 / counts.treated_total as f64;
        let control_rate = counts.control_recovered as f64 / counts.control_total as f64;
        Ok(AssociationSummary {
            treated_recovered: counts.treated_recovered,
            treated_total: counts.treated_total,
            control_recovered: counts.control_recovered,
            control_total: counts.control_total,
            treated_rate,
            control_rate,
            delta: treated_rate - control_rate,
        })
    }

    pub fn counts(&self) -> ArmCounts {
        ArmCounts {
            treated_recovered: self.treated_recovered,
            treated_total: self.treated_total,
            control_recovered: self.control_recovered,
            control_total: self.control_total,
        }
    }

    /// Sign of the risk difference, decided on integers:
    /// `a/b` vs `c/d` compares `a·d` with `c·b`.
    pub fn direction(&self) -> Ordering {
        let lhs = self.treated_recovered as u128 * self.control_total as u128;
        let rhs = self.control_recovered as u128 * self.treated_total as u128;
        lhs.cmp(&rhs)
    }
}

/// One cell of the stratification cross product.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub key: Vec<String>,
    pub counts: ArmCounts,
    /// `None` when either arm is empty in this stratum.
    pub summary: Option<AssociationSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StratifiedAssociation {
    pub strata_variables: Vec<String>,
    pub aggregate: AssociationSummary,
    pub strata: Vec<Stratum>,
    pub full_reversal: bool,
    pub undefined_strata: Vec<Vec<String>>,
}

struct Roles {
    treatment: usize,
    treated: usize,
    control: usize,
    outcome: usize,
    success: usize,
}

fn resolve_roles(
    table: &ContingencyTable,
    treatment: &Treatment,
    outcome: &Outcome,
) -> Result<Roles> {
    let t = table.variable_index(&treatment.variable)?;
    let o = table.variable_index(&outcome.variable)?;
    if t == o {
        return Err(Error::RoleOverlap(treatment.variable.clone()));
    }
    let tv = &table.variables[t];
    let treated = tv.require_state(&treatment.treated, None)?;
    let control = tv.require_state(&treatment.control, None)?;
    if treated == control {
        return Err(Error::InvalidInput(format!(
            "treated and control are both `{}`",
            treatment.treated
        )));
    }
    let success = table.variables[o].require_state(&outcome.success, None)?;
    Ok(Roles {
        treatment: t,
        treated,
        control,
        outcome: o,
        success,
    })
}

/// Accumulates arm counts per stratum key (indices into `strata`).
fn accumulate(
    table: &ContingencyTable,
    roles: &Roles,
    strata: &[usize],
) -> Result<BTreeMap<Vec<usize>, ArmCounts>> {
    let mut acc: BTreeMap<Vec<usize>, ArmCounts> = BTreeMap::new();
    for (key, &count) in &table.counts {
        let arm = key[roles.treatment];
        let recovered = key[roles.outcome] == roles.success;
        let mut cell = ArmCounts::default();
        if arm == roles.treated {
            cell.treated_total = count;
            cell.treated_recovered = if recovered { count } else { 0 };
        } else if arm == roles.control {
            cell.control_total = count;
            cell.control_recovered = if recovered { count } else { 0 };
        } else {
            continue;
        }
        let skey: Vec<usize> = strata.iter().map(|&i| key[i]).collect();
        let slot = acc.entry(skey).or_default();
        *slot = slot.checked_add(cell)?;
    }
    Ok(acc)
}

/// Pooled treated-vs-control success rates over all other variables.
pub fn association(
    table: &ContingencyTable,
    treatment: &Treatment,
    outcome: &Outcome,
) -> Result<AssociationSummary> {
    let roles = resolve_roles(table, treatment, outcome)?;
    let acc = accumulate(table, &roles, &[])?;
    AssociationSummary::from_counts(acc.get(&Vec::new()).copied().unwrap_or_default())
}

/// Compares the pooled association with the association inside every
/// combination of the `strata` variables' states.
///
/// Strata are listed in cross-product order, first stratum variable slowest.
/// A stratum where either arm is empty is recorded in `undefined_strata`
/// and rules out a full reversal. With no strata variables the result holds
/// only the aggregate and `full_reversal` is false.
pub fn detect_reversal<S: AsRef<str>>(
    table: &ContingencyTable,
    treatment: &Treatment,
    outcome: &Outcome,
    strata: &[S],
) -> Result<StratifiedAssociation> {
    let roles = resolve_roles(table, treatment, outcome)?;
    let mut strata_idx = Vec::with_capacity(strata.len());
    for name in strata {
        let i = table.variable_index(name.as_ref())?;
        if i == roles.treatment || i == roles.outcome || strata_idx.contains(&i) {
            return Err(Error::RoleOverlap(name.as_ref().to_string()));
        }
        strata_idx.push(i);
    }

    let acc = accumulate(table, &roles, &strata_idx)?;
    let pooled = acc
        .values()
        .try_fold(ArmCounts::default(), |a, &c| a.checked_add(c))?;
    let aggregate = AssociationSummary::from_counts(pooled)?;
    let strata_variables: Vec<String> = strata.iter().map(|s| s.as_ref().to_string()).collect();

    if strata_idx.is_empty() {
        return Ok(StratifiedAssociation {
            strata_variables,
            aggregate,
            strata: Vec::new(),
            full_reversal: false,
            undefined_strata: Vec::new(),
        });
    }

    let cards: Vec<usize> = strata_idx
        .iter()
        .map(|&i| table.variables[i].cardinality())
        .collect();
    let mut out = Vec::new();
    let mut undefined = Vec::new();
    for skey in cross_product(&cards) {
        let counts = acc.get(&skey).copied().unwrap_or_default();
        let key: Vec<String> = strata_idx
            .iter()
            .zip(&skey)
            .map(|(&v, &s)| table.variables[v].states[s].clone())
            .collect();
        let summary = if counts.is_defined() {
            Some(AssociationSummary::from_counts(counts)?)
        } else {
            undefined.push(key.clone());
            None
        };
        out.push(Stratum {
            key,
            counts,
            summary,
        });
    }

    let pooled_dir = aggregate.direction();
    let full_reversal = pooled_dir != Ordering::Equal
        && undefined.is_empty()
        && out.iter().all(|s| {
            s.summary
                .as_ref()
                .is_some_and(|a| a.direction() == pooled_dir.reverse())
        });

    Ok(StratifiedAssociation {
        strata_variables,
        aggregate,
        strata: out,
        full_reversal,
        undefined_strata: undefined,
    })
}

/// A covariate subset (sorted by name) and its reversing stratification.
pub type ScanHit = (Vec<String>, StratifiedAssociation);

/// Tries every non-empty subset of the covariates (all variables other than
/// treatment and outcome) up to `max_subset_size` and returns those that
/// fully reverse the pooled association.
///
/// Subsets are named in lexicographic order and visited by size, then
/// lexicographically. A bound larger than the number of covariates is
/// clamped.
pub fn scan_confounders(
    table: &ContingencyTable,
    treatment: &Treatment,
    outcome: &Outcome,
    max_subset_size: usize,
) -> Result<Vec<ScanHit>> {
    if max_subset_size < 1 {
        return Err(Error::InvalidInput(
            "max subset size must be at least 1".into(),
        ));
    }
    resolve_roles(table, treatment, outcome)?;
    let mut candidates: Vec<&str> = table
        .variables
        .iter()
        .map(|v| v.name.as_str())
        .filter(|&n| n != treatment.variable && n != outcome.variable)
        .collect();
    candidates.sort_unstable();

    let bound = max_subset_size.min(candidates.len());
    let subsets: Vec<Vec<&str>> = (1..=bound)
        .flat_map(|k| combinations(candidates.len(), k))
        .map(|idx| idx.into_iter().map(|i| candidates[i]).collect())
        .collect();

    let results: Vec<Result<Option<ScanHit>>> = subsets
        .par_iter()
        .map(|subset| {
            let sa = detect_reversal(table, treatment, outcome, subset)?;
            Ok(sa
                .full_reversal
                .then(|| (subset.iter().map(|s| s.to_string()).collect(), sa)))
        })
        .collect();

    results.into_iter().filter_map(Result::transpose).collect()
}

/// All index tuples of the cross product, last position fastest.
fn cross_product(cards: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &c in cards {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..c).map(move |s| {
                    let mut k = prefix.clone();
                    k.push(s);
                    k
                })
            })
            .collect();
    }
    out
}

/// k-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
