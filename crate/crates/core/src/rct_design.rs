//! Factorial control-group arithmetic.
//!
//! Guaranteeing balance over a set of categorical factors takes one equally
//! sized control group per full state combination, so the number of groups
//! is the product of the factor cardinalities. The treatment itself is just
//! another factor. Counts are arbitrary-precision.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of groups [`allocate`] will list explicitly.
pub const MATERIALIZATION_CAP: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub name: String,
    pub cardinality: u64,
    /// Optional state labels; `1..=cardinality` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<Vec<String>>,
}

impl Factor {
    pub fn new(name: impl Into<String>, cardinality: u64) -> Self {
        Factor {
            name: name.into(),
            cardinality,
            states: None,
        }
    }

    pub fn with_states<S: Into<String>>(
        name: impl Into<String>,
        states: impl IntoIterator<Item = S>,
    ) -> Self {
        let states: Vec<String> = states.into_iter().map(Into::into).collect();
        Factor {
            name: name.into(),
            cardinality: states.len() as u64,
            states: Some(states),
        }
    }

    fn label(&self, i: u64) -> String {
        match &self.states {
            Some(s) => s[i as usize].clone(),
            None => (i + 1).to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub factors: Vec<Factor>,
    pub min_per_group: u64,
}

impl DesignSpec {
    pub fn new(factors: Vec<Factor>, min_per_group: u64) -> Self {
        DesignSpec {
            factors,
            min_per_group,
        }
    }

    /// `count` binary factors named `F1..F{count}`.
    pub fn binary(count: usize, min_per_group: u64) -> Self {
        let factors = (1..=count)
            .map(|i| Factor::new(format!("F{i}"), 2))
            .collect();
        DesignSpec::new(factors, min_per_group)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: DesignSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.factors.is_empty() {
            return Err(Error::InvalidInput(
                "design needs at least one factor".into(),
            ));
        }
        if self.min_per_group == 0 {
            return Err(Error::InvalidInput("min_per_group must be positive".into()));
        }
        let mut names = BTreeSet::new();
        for f in &self.factors {
            if !names.insert(f.name.as_str()) {
                return Err(Error::DuplicateVariable(f.name.clone()));
            }
            if f.cardinality < 2 {
                return Err(Error::InvalidInput(format!(
                    "factor `{}` needs cardinality of at least 2",
                    f.name
                )));
            }
            if let Some(states) = &f.states {
                if states.len() as u64 != f.cardinality {
                    return Err(Error::InvalidInput(format!(
                        "factor `{}` lists {} states for cardinality {}",
                        f.name,
                        states.len(),
                        f.cardinality
                    )));
                }
                let mut seen = BTreeSet::new();
                if let Some(dup) = states.iter().find(|s| !seen.insert(s.as_str())) {
                    return Err(Error::DuplicateState {
                        variable: f.name.clone(),
                        state: dup.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlGroup {
    pub states: Vec<String>,
    pub size: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignPlan {
    #[serde(with = "decimal")]
    pub group_count: BigUint,
    #[serde(with = "decimal")]
    pub subjects_required: BigUint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<ControlGroup>>,
}

impl DesignPlan {
    /// Factor columns plus `size`, one line per group. `None` unless the
    /// plan was materialized.
    pub fn to_csv(&self, spec: &DesignSpec) -> Option<String> {
        let groups = self.groups.as_ref()?;
        let mut out = String::new();
        let header: Vec<&str> = spec
            .factors
            .iter()
            .map(|f| f.name.as_str())
            .chain(["size"])
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for g in groups {
            out.push_str(&g.states.join(","));
            out.push(',');
            out.push_str(&g.size.to_string());
            out.push('\n');
        }
        Some(out)
    }
}

/// Product of the factor cardinalities.
pub fn group_count(spec: &DesignSpec) -> Result<BigUint> {
    spec.validate()?;
    Ok(spec
        .factors
        .iter()
        .fold(BigUint::from(1u32), |acc, f| acc * f.cardinality))
}

/// `group_count × min_per_group`.
pub fn subjects_required(spec: &DesignSpec) -> Result<BigUint> {
    Ok(group_count(spec)? * spec.min_per_group)
}

/// Arithmetic-only plan, with no cap.
pub fn plan(spec: &DesignSpec) -> Result<DesignPlan> {
    let groups = group_count(spec)?;
    Ok(DesignPlan {
        subjects_required: &groups * spec.min_per_group,
        group_count: groups,
        groups: None,
    })
}

/// Splits `total` subjects evenly over every state combination, first factor
/// varying slowest.
pub fn allocate(spec: &DesignSpec, total: u64) -> Result<DesignPlan> {
    let mut plan = plan(spec)?;
    if total == 0 {
        return Err(Error::InvalidInput("total must be positive".into()));
    }
    let groups = match u64::try_from(&plan.group_count) {
        Ok(g) if g <= MATERIALIZATION_CAP => g,
        _ => {
            return Err(Error::MaterializationCap {
                groups: plan.group_count.to_string(),
                cap: MATERIALIZATION_CAP,
            })
        }
    };
    if !total.is_multiple_of(groups) {
        return Err(Error::Indivisible {
            total,
            groups,
            remainder: total % groups,
        });
    }
    let size = total / groups;
    let mut out = Vec::with_capacity(groups as usize);
    let mut idx = vec![0u64; spec.factors.len()];
    for _ in 0..groups {
        out.push(ControlGroup {
            states: spec
                .factors
                .iter()
                .zip(&idx)
                .map(|(f, &i)| f.label(i))
                .collect(),
            size,
        });
        // odometer increment, last factor fastest
        for (slot, f) in idx.iter_mut().zip(&spec.factors).rev() {
            *slot += 1;
            if *slot < f.cardinality {
                break;
            }
            *slot = 0;
        }
    }
    plan.groups = Some(out);
    Ok(plan)
}

mod decimal {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}
