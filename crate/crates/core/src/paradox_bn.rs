//! The hidden-confounder network family.
//!
//! Boolean nodes `X1..Xn`, `Drug` and `Recovered`. Every `Xi` is a root and a
//! parent of `Recovered`; `Xn` is also the only parent of `Drug`, and `Drug`
//! is a parent of `Recovered`. The recovery table depends on `(Xn, Drug)`
//! alone:
//!
//! | Xn | Drug | P(Recovered) |
//! |----|------|--------------|
//! | F  | F    | p1           |
//! | T  | F    | p2           |
//! | F  | T    | p3           |
//! | T  | T    | p4           |
//!
//! and `P(Drug | Xn=T) = p`, `P(Drug | Xn=F) = q`. With `p3 < p1` and
//! `p4 < p2` the drug hurts inside every stratum that includes `Xn`, yet
//! when `Xn` is summed out and `Drug` is strongly tied to `Xn`, the drug arm
//! inherits the high-recovery `Xn=T` rows and looks better.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `n` for which the full joint (2^(n+2) states) or the full
/// recovery table (2^(n+1) columns) is materialized.
pub const ENUMERATION_CAP: usize = 24;

/// Parameters of the network. Field names double as the JSON schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParadoxBnSpec {
    pub n: usize,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
    pub p: f64,
    pub q: f64,
    pub prior_xn: f64,
    /// Priors `P(Xi = T)` for `X1..X(n-1)`. May be omitted in JSON, in which
    /// case every prior is 0.5.
    #[serde(default)]
    pub priors_x: Vec<f64>,
}

impl ParadoxBnSpec {
    /// The reference parameterisation: p1=0.52, p2=0.9, p3=0.48, p4=0.8,
    /// p=0.999, q=0.001 and uniform priors.
    pub fn canonical(n: usize) -> Self {
        ParadoxBnSpec {
            n,
            p1: 0.52,
            p2: 0.9,
            p3: 0.48,
            p4: 0.8,
            p: 0.999,
            q: 0.001,
            prior_xn: 0.5,
            priors_x: vec![0.5; n.saturating_sub(1)],
        }
    }

    /// Parses and validates a JSON spec, filling omitted `priors_x`.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut spec: ParadoxBnSpec = serde_json::from_str(text)?;
        if spec.priors_x.is_empty() {
            spec.priors_x = vec![0.5; spec.n.saturating_sub(1)];
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// Checks structural validity. Returns human-readable warnings when
    /// the parameters leave the regime in which the reversal is expected;
    /// those are not errors because [`certify_reversal`] checks the actual
    /// condition.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.n < 1 {
            return Err(Error::InvalidInput("n must be at least 1".into()));
        }
        let named = [
            ("p1", self.p1),
            ("p2", self.p2),
            ("p3", self.p3),
            ("p4", self.p4),
            ("p", self.p),
            ("q", self.q),
            ("prior_xn", self.prior_xn),
        ];
        for (field, value) in named {
            check_probability(field.to_string(), value)?;
        }
        if self.priors_x.len() != self.n - 1 {
            return Err(Error::InvalidInput(format!(
                "priors_x has {} entries, expected n - 1 = {}",
                self.priors_x.len(),
                self.n - 1
            )));
        }
        for (i, &v) in self.priors_x.iter().enumerate() {
            check_probability(format!("priors_x[{i}]"), v)?;
        }

        let mut warnings = Vec::new();
        let mut warn = |cond: bool, msg: &str| {
            if cond {
                warnings.push(msg.to_string());
            }
        };
        warn(self.p1 <= 0.5, "p1 is not above 0.5");
        warn(self.p3 >= 0.5, "p3 is not below 0.5");
        warn(self.p2 <= 0.5, "p2 is not close to 1");
        warn(self.p4 >= self.p2, "p4 is not below p2");
        warn(self.p <= 0.5, "p is not close to 1");
        warn(self.q >= 0.5, "q is not close to 0");
        Ok(warnings)
    }

    fn prior(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.prior_xn
        } else {
            self.priors_x.get(i).copied().unwrap_or(0.5)
        }
    }

    fn drug_given_xn(&self, xn: bool) -> f64 {
        if xn {
            self.p
        } else {
            self.q
        }
    }
}

fn check_probability(field: String, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidProbability { field, value })
    }
}

/// `P(Recovered = T | Xn = xn, Drug = d)` with `Xn` observed. The other
/// `Xi` never enter.
pub fn case1_recovery(spec: &ParadoxBnSpec, xn: bool, d: bool) -> f64 {
    match (xn, d) {
        (false, false) => spec.p1,
        (true, false) => spec.p2,
        (false, true) => spec.p3,
        (true, true) => spec.p4,
    }
}

/// `P(Xn = T | Drug = d)` by Bayes' rule from `prior_xn`, `p` and `q`.
pub fn posterior_xn(spec: &ParadoxBnSpec, d: bool) -> Result<f64> {
    let like = |xn: bool| {
        let pd = spec.drug_given_xn(xn);
        if d {
            pd
        } else {
            1.0 - pd
        }
    };
    let with_xn = spec.prior_xn * like(true);
    let without_xn = (1.0 - spec.prior_xn) * like(false);
    let evidence = with_xn + without_xn;
    if evidence <= 0.0 {
        return Err(Error::ZeroProbabilityEvidence(format!("Drug = {d}")));
    }
    Ok(with_xn / evidence)
}

/// `P(Recovered = T | Drug = d)` with `Xn` summed out.
pub fn case2_recovery(spec: &ParadoxBnSpec, d: bool) -> Result<f64> {
    let post = posterior_xn(spec, d)?;
    Ok(post * case1_recovery(spec, true, d) + (1.0 - post) * case1_recovery(spec, false, d))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReversalCertificate {
    /// The drug is worse in every stratum that includes `Xn`.
    pub stratified_drug_worse: bool,
    /// The drug is better once `Xn` is hidden.
    pub hidden_drug_better: bool,
    pub case2_drug_rate: f64,
    pub case2_placebo_rate: f64,
    pub paradox: bool,
}

/// Checks both halves of the reversal with strict comparisons.
///
/// Fails only when one of the arms has probability zero, in which case the
/// hidden-confounder rates do not exist.
pub fn certify_reversal(spec: &ParadoxBnSpec) -> Result<ReversalCertificate> {
    let stratified_drug_worse = spec.p3 < spec.p1 && spec.p4 < spec.p2;
    let case2_drug_rate = case2_recovery(spec, true)?;
    let case2_placebo_rate = case2_recovery(spec, false)?;
    let hidden_drug_better = case2_drug_rate > case2_placebo_rate;
    Ok(ReversalCertificate {
        stratified_drug_worse,
        hidden_drug_better,
        case2_drug_rate,
        case2_placebo_rate,
        paradox: stratified_drug_worse && hidden_drug_better,
    })
}

/// One column of the materialized recovery table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NptColumn {
    pub drug: bool,
    /// States of `X1..Xn`.
    pub x: Vec<bool>,
    pub p_recovered: f64,
}

/// The recovery table expanded over every parent combination.
///
/// Columns run with `Drug` slowest, then `Xn`, `X(n-1)`, ..., `X1` fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterializedNpt {
    pub n: usize,
    pub columns: Vec<NptColumn>,
}

impl MaterializedNpt {
    /// Renders the table with one header row per parent (`Drug`, `Xn`, ...,
    /// `X1`) followed by the `False` and `True` rows of `Recovered`.
    pub fn to_csv(&self) -> String {
        let label = |b: bool| if b { "True" } else { "False" };
        let mut out = String::new();
        let mut row = |head: String, cells: Vec<String>| {
            out.push_str(&head);
            for c in cells {
                out.push(',');
                out.push_str(&c);
            }
            out.push('\n');
        };
        row(
            "Drug".into(),
            self.columns.iter().map(|c| label(c.drug).into()).collect(),
        );
        for i in (0..self.n).rev() {
            row(
                format!("X{}", i + 1),
                self.columns.iter().map(|c| label(c.x[i]).into()).collect(),
            );
        }
        row(
            "False".into(),
            self.columns
                .iter()
                .map(|c| format_probability(1.0 - c.p_recovered))
                .collect(),
        );
        row(
            "True".into(),
            self.columns
                .iter()
                .map(|c| format_probability(c.p_recovered))
                .collect(),
        );
        out
    }
}

/// Shortest decimal that survives `1 - p` rounding noise, e.g. 0.48 not
/// 0.48000000000000004.
fn format_probability(p: f64) -> String {
    let s = format!("{:.12}", p);
    let s = s.trim_end_matches('0');
    let s = s.strip_suffix('.').unwrap_or(s);
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

/// Expands the compact `(p1, p2, p3, p4)` table over all parent states.
pub fn build_npt(spec: &ParadoxBnSpec) -> Result<MaterializedNpt> {
    spec.validate()?;
    if spec.n > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            n: spec.n,
            cap: ENUMERATION_CAP,
        });
    }
    let n = spec.n;
    let mut columns = Vec::with_capacity(1 << (n + 1));
    for drug in [false, true] {
        // Xn is the most significant bit of `bits`, X1 the least.
        for bits in 0u64..(1u64 << n) {
            let x: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
            columns.push(NptColumn {
                drug,
                p_recovered: case1_recovery(spec, x[n - 1], drug),
                x,
            });
        }
    }
    Ok(MaterializedNpt { n, columns })
}

/// Full joint distribution over `(X1..Xn, Drug, Recovered)`.
///
/// State index bit `i` (for `i < n`) holds `X(i+1)`, bit `n` holds `Drug`
/// and bit `n + 1` holds `Recovered`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    n: usize,
    probs: Vec<f64>,
}

impl JointDistribution {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn probability(&self, x: &[bool], d: bool, r: bool) -> f64 {
        assert_eq!(x.len(), self.n, "assignment arity");
        let mut idx = 0usize;
        for (i, &b) in x.iter().enumerate() {
            idx |= (b as usize) << i;
        }
        idx |= (d as usize) << self.n;
        idx |= (r as usize) << (self.n + 1);
        self.probs[idx]
    }

    /// Probability of the event fixed by `x` (per-variable `Some` entries),
    /// `d` and `r`.
    pub fn marginal(&self, x: &[Option<bool>], d: Option<bool>, r: Option<bool>) -> f64 {
        assert_eq!(x.len(), self.n, "evidence arity");
        let (mask, value) = self.pattern(x, d, r);
        self.probs
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == value)
            .map(|(_, p)| p)
            .sum()
    }

    /// `P(Recovered = T | evidence)`.
    pub fn conditional_recovery(&self, x: &[Option<bool>], d: Option<bool>) -> Result<f64> {
        let evidence = self.marginal(x, d, None);
        if evidence <= 0.0 {
            return Err(Error::ZeroProbabilityEvidence(format!(
                "{x:?}, Drug = {d:?}"
            )));
        }
        Ok(self.marginal(x, d, Some(true)) / evidence)
    }

    fn pattern(&self, x: &[Option<bool>], d: Option<bool>, r: Option<bool>) -> (usize, usize) {
        let mut mask = 0usize;
        let mut value = 0usize;
        let slots = x.iter().copied().chain([d, r]);
        for (i, s) in slots.enumerate() {
            if let Some(b) = s {
                mask |= 1 << i;
                value |= (b as usize) << i;
            }
        }
        (mask, value)
    }
}

/// Enumerates the joint by the chain rule. Capped at `n <=` [`ENUMERATION_CAP`].
pub fn exact_joint(spec: &ParadoxBnSpec) -> Result<JointDistribution> {
    spec.validate()?;
    let n = spec.n;
    if n > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            n,
            cap: ENUMERATION_CAP,
        });
    }
    // P(x1..xn); each doubling appends X(i+1) as bit i.
    let mut px = vec![1.0f64];
    for i in 0..n {
        let prior = spec.prior(i);
        let mut next = Vec::with_capacity(px.len() * 2);
        next.extend(px.iter().map(|p| p * (1.0 - prior)));
        next.extend(px.iter().map(|p| p * prior));
        px = next;
    }
    let xs = px.len();
    let mut probs = vec![0.0; xs * 4];
    for (xbits, &p) in px.iter().enumerate() {
        let xn = xbits >> (n - 1) & 1 == 1;
        for d in [false, true] {
            let pd = if d {
                spec.drug_given_xn(xn)
            } else {
                1.0 - spec.drug_given_xn(xn)
            };
            let pr = case1_recovery(spec, xn, d);
            let base = xbits | (d as usize) << n;
            probs[base] = p * pd * (1.0 - pr);
            probs[base | 1 << (n + 1)] = p * pd * pr;
        }
    }
    Ok(JointDistribution { n, probs })
}
