use std::fs;
use std::io::BufWriter;
use std::path::Path;

use serde_json::{json, Value};
use simpson_core::csv_io;
use simpson_core::paradox_bn::{self, ParadoxBnSpec};
use simpson_core::rct_design::{self, DesignSpec, Factor};
use simpson_core::tables::{
    self, ContingencyTable, Outcome, StratifiedAssociation, Treatment, Variable,
};
use simpson_core::trial_sim;

use crate::args::{
    AnalyzeArgs, DataArgs, DesignArgs, GenerateArgs, InferArgs, ScanArgs, SimulateArgs, SpecArgs,
};
use crate::report::{columns, group_digits, percent, probability, Report};
use crate::CliError;

const POSITIVE: [&str; 4] = ["true", "Yes", "yes", "1"];
const NEGATIVE: [&str; 4] = ["false", "No", "no", "0"];

fn pick_state(
    var: &Variable,
    given: &Option<String>,
    pool: &[&str],
    flag: &str,
) -> Result<String, CliError> {
    if let Some(s) = given {
        return Ok(s.clone());
    }
    pool.iter()
        .find(|s| var.state_index(s).is_some())
        .map(|s| s.to_string())
        .ok_or_else(|| {
            CliError::Usage(format!(
                "cannot infer {flag} for column `{}` (states: {}); pass {flag}",
                var.name(),
                var.states().join(", ")
            ))
        })
}

fn load(data: &DataArgs) -> Result<(ContingencyTable, Treatment, Outcome), CliError> {
    let table = csv_io::read_path(&data.csv, data.counts)?;
    let column = |name: &str| {
        table
            .variable(name)
            .ok_or_else(|| simpson_core::Error::UnknownVariable(name.to_string()))
    };
    let tv = column(&data.treatment)?;
    let ov = column(&data.outcome)?;
    let treatment = Treatment::new(
        &data.treatment,
        pick_state(tv, &data.treated, &POSITIVE, "--treated")?,
        pick_state(tv, &data.control, &NEGATIVE, "--control")?,
    );
    let outcome = Outcome::new(
        &data.outcome,
        pick_state(ov, &data.success, &POSITIVE, "--success")?,
    );
    Ok((table, treatment, outcome))
}

fn data_inputs(data: &DataArgs, treatment: &Treatment, outcome: &Outcome) -> Value {
    json!({
        "csv": data.csv.display().to_string(),
        "counts": data.counts,
        "treatment": treatment,
        "outcome": outcome,
    })
}

fn arm(recovered: u64, total: u64, rate: Option<f64>) -> String {
    match rate {
        Some(r) => format!("{recovered}/{total} {}", percent(r)),
        None => format!("{recovered}/{total} n/a"),
    }
}

fn association_text(sa: &StratifiedAssociation) -> String {
    let mut rows = vec![vec![
        "stratum".to_string(),
        "treated".to_string(),
        "control".to_string(),
        "delta".to_string(),
    ]];
    let a = &sa.aggregate;
    rows.push(vec![
        "(all)".into(),
        arm(a.treated_recovered, a.treated_total, Some(a.treated_rate)),
        arm(a.control_recovered, a.control_total, Some(a.control_rate)),
        format!("{:+.1} pts", a.delta * 100.0),
    ]);
    for s in &sa.strata {
        let key = sa
            .strata_variables
            .iter()
            .zip(&s.key)
            .map(|(v, k)| format!("{v}={k}"))
            .collect::<Vec<_>>()
            .join(" ");
        let c = &s.counts;
        rows.push(vec![
            key,
            arm(
                c.treated_recovered,
                c.treated_total,
                s.summary.map(|a| a.treated_rate),
            ),
            arm(
                c.control_recovered,
                c.control_total,
                s.summary.map(|a| a.control_rate),
            ),
            s.summary.map_or("undefined".into(), |a| {
                format!("{:+.1} pts", a.delta * 100.0)
            }),
        ]);
    }
    let mut out = columns(&rows);
    if !sa.strata_variables.is_empty() {
        out.push_str(&format!("full reversal: {}\n", sa.full_reversal));
    }
    if !sa.undefined_strata.is_empty() {
        out.push_str(&format!(
            "undefined strata (an arm is empty): {}\n",
            sa.undefined_strata
                .iter()
                .map(|k| k.join("/"))
                .collect::<Vec<_>>()
                .join(", ")
        ));
    }
    out
}

pub fn analyze(args: &AnalyzeArgs) -> Result<Report, CliError> {
    let (table, treatment, outcome) = load(&args.data)?;
    let strata: Vec<&str> = args
        .strata
        .iter()
        .map(String::as_str)
        .filter(|s| !s.is_empty())
        .collect();
    let sa = tables::detect_reversal(&table, &treatment, &outcome, &strata)?;
    let mut inputs = data_inputs(&args.data, &treatment, &outcome);
    inputs["strata"] = json!(strata);
    Ok(Report {
        command: "analyze",
        inputs,
        results: serde_json::to_value(&sa)?,
        text: association_text(&sa),
    })
}

pub fn scan(args: &ScanArgs) -> Result<Report, CliError> {
    let (table, treatment, outcome) = load(&args.data)?;
    if args.max_subset_size < 1 {
        return Err(CliError::Usage(
            "--max-subset-size must be at least 1".into(),
        ));
    }
    let hits = tables::scan_confounders(&table, &treatment, &outcome, args.max_subset_size)?;
    let mut inputs = data_inputs(&args.data, &treatment, &outcome);
    inputs["max_subset_size"] = json!(args.max_subset_size);

    let mut text = format!("{} reversing subset(s)\n", hits.len());
    let mut list = Vec::new();
    for (subset, sa) in &hits {
        text.push_str(&format!("\n{{{}}}\n", subset.join(", ")));
        text.push_str(&association_text(sa));
        list.push(json!({ "subset": subset, "analysis": sa }));
    }
    Ok(Report {
        command: "scan",
        inputs,
        results: json!({ "hits": list }),
        text,
    })
}

fn resolve_spec(args: &SpecArgs) -> Result<ParadoxBnSpec, CliError> {
    let mut spec = match (&args.spec, args.n) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)?;
            ParadoxBnSpec::from_json(&text).map_err(|e| match e {
                simpson_core::Error::Json(j) => CliError::Usage(format!("{}: {j}", path.display())),
                other => other.into(),
            })?
        }
        (None, Some(n)) => ParadoxBnSpec::canonical(n),
        (None, None) => return Err(CliError::Usage("pass --spec FILE or --n N".into())),
    };
    let overrides = [
        (&mut spec.p1, args.p1),
        (&mut spec.p2, args.p2),
        (&mut spec.p3, args.p3),
        (&mut spec.p4, args.p4),
        (&mut spec.p, args.p),
        (&mut spec.q, args.q),
        (&mut spec.prior_xn, args.prior_xn),
    ];
    for (slot, value) in overrides {
        if let Some(v) = value {
            *slot = v;
        }
    }
    for w in spec.validate()? {
        eprintln!("warning: {w}");
    }
    Ok(spec)
}

fn spec_text(spec: &ParadoxBnSpec) -> String {
    format!(
        "n = {}\np1 = {}  p2 = {}  p3 = {}  p4 = {}\np = {}  q = {}  prior_xn = {}\n",
        spec.n, spec.p1, spec.p2, spec.p3, spec.p4, spec.p, spec.q, spec.prior_xn
    )
}

pub fn generate(args: &GenerateArgs) -> Result<Report, CliError> {
    let spec = resolve_spec(&args.spec)?;
    let warnings = spec.validate()?;
    let cert = paradox_bn::certify_reversal(&spec)?;
    if let Some(path) = &args.npt {
        fs::write(path, paradox_bn::build_npt(&spec)?.to_csv())?;
    }
    if let Some(path) = &args.write_spec {
        fs::write(path, spec.to_json() + "\n")?;
    }

    let mut text = spec_text(&spec);
    text.push_str(&format!(
        "drug worse in every stratum with Xn observed: {}\n\
         drug better with Xn hidden: {} ({} vs {})\n\
         paradox: {}\n",
        cert.stratified_drug_worse,
        cert.hidden_drug_better,
        probability(cert.case2_drug_rate),
        probability(cert.case2_placebo_rate),
        cert.paradox
    ));
    if let Some(path) = &args.npt {
        text.push_str(&format!("recovery table written to {}\n", path.display()));
    }
    Ok(Report {
        command: "generate",
        inputs: json!({
            "spec_file": args.spec.spec.as_ref().map(|p| p.display().to_string()),
            "npt": args.npt.as_ref().map(|p| p.display().to_string()),
        }),
        results: json!({
            "spec": spec,
            "warnings": warnings,
            "certificate": cert,
        }),
        text,
    })
}

pub fn infer(args: &InferArgs) -> Result<Report, CliError> {
    let spec = resolve_spec(&args.spec)?;
    let (p, label) = match args.case {
        1 => {
            let xn = args
                .xn
                .ok_or_else(|| CliError::Usage("--case 1 needs --xn true|false".into()))?;
            (
                paradox_bn::case1_recovery(&spec, xn, args.d),
                format!("P(Recovered | X{} = {xn}, Drug = {})", spec.n, args.d),
            )
        }
        _ => {
            if args.xn.is_some() {
                return Err(CliError::Usage("--xn only applies to --case 1".into()));
            }
            (
                paradox_bn::case2_recovery(&spec, args.d)?,
                format!("P(Recovered | Drug = {})", args.d),
            )
        }
    };
    Ok(Report {
        command: "infer",
        inputs: json!({ "spec": spec, "case": args.case, "xn": args.xn, "d": args.d }),
        results: json!({ "p_recovered": p }),
        text: format!("{label} = {}\n", probability(p)),
    })
}

pub fn simulate(args: &SimulateArgs) -> Result<Report, CliError> {
    if args.size == 0 {
        return Err(CliError::Usage("--size must be at least 1".into()));
    }
    let spec = resolve_spec(&args.spec)?;
    let ds = trial_sim::sample(&spec, args.size, args.seed)?;
    write_dataset(&ds, &args.output)?;
    let drug = ds.records.iter().filter(|r| r.d).count();
    let recovered = ds.records.iter().filter(|r| r.r).count();
    Ok(Report {
        command: "simulate",
        inputs: json!({
            "spec": spec,
            "size": args.size,
            "seed": args.seed,
            "output": args.output.display().to_string(),
        }),
        results: json!({
            "records": ds.len(),
            "spec_fingerprint": ds.spec_fingerprint,
            "drug_taken": drug,
            "recovered": recovered,
        }),
        text: format!(
            "wrote {} records to {} ({drug} took the drug, {recovered} recovered)\n",
            ds.len(),
            args.output.display()
        ),
    })
}

fn write_dataset(ds: &trial_sim::TrialDataset, path: &Path) -> Result<(), CliError> {
    let file = fs::File::create(path)?;
    ds.write_csv(BufWriter::new(file))?;
    Ok(())
}

/// `name:4` or `name:a,b,c`.
pub fn parse_factor(text: &str) -> Result<Factor, CliError> {
    let (name, rest) = text
        .split_once(':')
        .ok_or_else(|| CliError::Usage(format!("factor `{text}` is not name:cardinality")))?;
    if name.is_empty() || rest.is_empty() {
        return Err(CliError::Usage(format!(
            "factor `{text}` is not name:cardinality"
        )));
    }
    Ok(match rest.parse::<u64>() {
        Ok(k) => Factor::new(name, k),
        Err(_) => Factor::with_states(name, rest.split(',')),
    })
}

pub fn design(args: &DesignArgs) -> Result<Report, CliError> {
    let mut spec = match &args.spec {
        Some(path) => DesignSpec::from_json(&fs::read_to_string(path)?).map_err(|e| match e {
            simpson_core::Error::Json(j) => CliError::Usage(format!("{}: {j}", path.display())),
            other => other.into(),
        })?,
        None => {
            let factors = args
                .factors
                .iter()
                .map(|f| parse_factor(f))
                .collect::<Result<Vec<_>, _>>()?;
            DesignSpec::new(factors, 50)
        }
    };
    if let Some(m) = args.min_per_group {
        spec.min_per_group = m;
    }
    let plan = match args.total {
        Some(total) => rct_design::allocate(&spec, total)?,
        None => rct_design::plan(&spec)?,
    };
    if let Some(path) = &args.csv {
        if let Some(csv) = plan.to_csv(&spec) {
            fs::write(path, csv)?;
        }
    }

    let mut text = format!(
        "control groups: {}\nsubjects required at {} per group: {}\n",
        group_digits(&plan.group_count.to_string()),
        spec.min_per_group,
        group_digits(&plan.subjects_required.to_string())
    );
    if let Some(groups) = &plan.groups {
        text.push_str(&format!(
            "allocated {} subjects, {} per group\n",
            group_digits(&args.total.unwrap_or_default().to_string()),
            group_digits(&groups[0].size.to_string())
        ));
        let mut rows = vec![spec
            .factors
            .iter()
            .map(|f| f.name.clone())
            .chain(["size".to_string()])
            .collect::<Vec<_>>()];
        rows.extend(groups.iter().map(|g| {
            g.states
                .iter()
                .cloned()
                .chain([g.size.to_string()])
                .collect()
        }));
        text.push('\n');
        text.push_str(&columns(&rows));
    }
    Ok(Report {
        command: "design",
        inputs: json!({ "design": spec, "total": args.total }),
        results: serde_json::to_value(&plan)?,
        text,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_syntax() {
        let f = parse_factor("age:10").unwrap();
        assert_eq!(
            (f.name.as_str(), f.cardinality, f.states),
            ("age", 10, None)
        );
        let f = parse_factor("drug:drug,placebo").unwrap();
        assert_eq!(f.cardinality, 2);
        assert_eq!(f.states.unwrap(), ["drug", "placebo"]);
        assert!(parse_factor("age").is_err());
        assert!(parse_factor(":3").is_err());
    }
}
