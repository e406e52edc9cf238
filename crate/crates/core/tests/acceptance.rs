//! Acceptance suite. Each criterion prints one `[PASS]`/`[FAIL]` line and
//! asserts its own runtime budget.
//!
//! Run with `cargo test -p simpson-core --test acceptance -- --nocapture`.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use simpson_core::csv_io;
use simpson_core::paradox_bn::{self, ParadoxBnSpec};
use simpson_core::rct_design::{self, DesignSpec, Factor};
use simpson_core::tables::{self, AssociationSummary, ContingencyTable, Outcome, Treatment};
use simpson_core::trial_sim;

const EXACT_TOL: f64 = 1e-12;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn load(name: &str) -> ContingencyTable {
    csv_io::read_path(data(name), true).expect("fixture csv")
}

fn report(id: &str, what: &str, ok: bool, elapsed: Duration, budget: Duration) {
    let within = elapsed < budget;
    let tag = if ok && within { "PASS" } else { "FAIL" };
    println!(
        "[{tag}] {id} {what} ({:.3}s, budget {}s)",
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    assert!(ok, "{id} failed");
    assert!(within, "{id} exceeded its runtime budget");
}

fn drug() -> Treatment {
    Treatment::new("Drug", "Yes", "No")
}

fn recovered() -> Outcome {
    Outcome::new("Recovered", "Yes")
}

/// `recovered / total == pct / 100` on integers.
fn is_percent(recovered: u64, total: u64, pct: u64) -> bool {
    recovered * 100 == pct * total
}

fn rates_are(s: &AssociationSummary, control_pct: u64, treated_pct: u64) -> bool {
    is_percent(s.control_recovered, s.control_total, control_pct)
        && is_percent(s.treated_recovered, s.treated_total, treated_pct)
}

#[test]
fn ac1_paper_table_reproduction() {
    let start = Instant::now();
    let mut ok = true;

    let t3 = load("table3.csv");
    let a = tables::association(&t3, &drug(), &recovered()).unwrap();
    ok &= rates_are(&a, 40, 50);

    let t4 = load("table4.csv");
    let r = tables::detect_reversal(&t4, &drug(), &recovered(), &["Sex"]).unwrap();
    ok &= rates_are(&r.aggregate, 40, 50);
    ok &= rates_are(&r.strata[0].summary.unwrap(), 30, 20);
    ok &= rates_are(&r.strata[1].summary.unwrap(), 70, 60);
    ok &= r.full_reversal;

    let t5 = load("table5.csv");
    let r = tables::detect_reversal(&t5, &drug(), &recovered(), &["Sex"]).unwrap();
    ok &= rates_are(&r.aggregate, 52, 63);
    ok &= rates_are(&r.strata[0].summary.unwrap(), 46, 54);
    ok &= rates_are(&r.strata[1].summary.unwrap(), 58, 72);
    ok &= !r.full_reversal;

    let t6 = load("table6.csv");
    let r = tables::detect_reversal(&t6, &drug(), &recovered(), &["Age", "Sex"]).unwrap();
    ok &= rates_are(&r.aggregate, 52, 63);
    let expected = [(40, 30), (50, 40), (70, 60), (90, 80)];
    ok &= r.strata.len() == 4;
    for (s, &(c, t)) in r.strata.iter().zip(&expected) {
        ok &= rates_are(&s.summary.unwrap(), c, t);
    }
    ok &= r.full_reversal;
    let r = tables::detect_reversal(&t6, &drug(), &recovered(), &["Sex", "Age"]).unwrap();
    ok &= r.full_reversal;

    let r = tables::detect_reversal(&t6, &drug(), &recovered(), &["Sex"]).unwrap();
    ok &= !r.full_reversal;
    ok &= r.aggregate.direction().is_gt();
    ok &= r
        .strata
        .iter()
        .all(|s| s.summary.unwrap().direction().is_gt());

    report(
        "AC1",
        "paper tables 3-6 rates and reversal verdicts",
        ok,
        start.elapsed(),
        Duration::from_secs(1),
    );
}

#[test]
fn ac2_marginalization_consistency() {
    let start = Instant::now();
    let ok = tables::marginalize(&load("table4.csv"), &["Sex"]).unwrap() == load("table3.csv")
        && tables::marginalize(&load("table6.csv"), &["Age"]).unwrap() == load("table5.csv");
    report(
        "AC2",
        "marginalize(T4,{Sex}) = T3 and marginalize(T6,{Age}) = T5",
        ok,
        start.elapsed(),
        Duration::from_secs(1),
    );
}

#[test]
fn ac3_construction_for_three_variables() {
    let start = Instant::now();
    let spec = ParadoxBnSpec::canonical(3);
    let npt = paradox_bn::build_npt(&spec).unwrap();

    // The 16-column recovery table, column by column.
    let f = false;
    let t = true;
    let drug = [f, f, f, f, f, f, f, f, t, t, t, t, t, t, t, t];
    let x3 = [f, f, f, f, t, t, t, t, f, f, f, f, t, t, t, t];
    let x2 = [f, f, t, t, f, f, t, t, f, f, t, t, f, f, t, t];
    let x1 = [f, t, f, t, f, t, f, t, f, t, f, t, f, t, f, t];
    let not_recovered = [
        0.48, 0.48, 0.48, 0.48, 0.1, 0.1, 0.1, 0.1, 0.52, 0.52, 0.52, 0.52, 0.2, 0.2, 0.2, 0.2,
    ];
    let recovered = [
        0.52, 0.52, 0.52, 0.52, 0.9, 0.9, 0.9, 0.9, 0.48, 0.48, 0.48, 0.48, 0.8, 0.8, 0.8, 0.8,
    ];
    let mut ok = npt.columns.len() == 16;
    for (i, col) in npt.columns.iter().enumerate() {
        ok &= col.drug == drug[i] && col.x == [x1[i], x2[i], x3[i]];
        ok &= (col.p_recovered - recovered[i]).abs() < EXACT_TOL;
        ok &= (1.0 - col.p_recovered - not_recovered[i]).abs() < EXACT_TOL;
    }
    let csv = npt.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    ok &= lines[0] == "Drug,False,False,False,False,False,False,False,False,True,True,True,True,True,True,True,True";
    ok &=
        lines[4] == "False,0.48,0.48,0.48,0.48,0.1,0.1,0.1,0.1,0.52,0.52,0.52,0.52,0.2,0.2,0.2,0.2";
    ok &=
        lines[5] == "True,0.52,0.52,0.52,0.52,0.9,0.9,0.9,0.9,0.48,0.48,0.48,0.48,0.8,0.8,0.8,0.8";

    ok &= paradox_bn::case1_recovery(&spec, true, true) == 0.8;
    ok &= paradox_bn::case1_recovery(&spec, true, false) == 0.9;
    ok &= paradox_bn::case1_recovery(&spec, false, true) == 0.48;
    ok &= paradox_bn::case1_recovery(&spec, false, false) == 0.52;

    // closed forms: 0.999·0.8 + 0.001·0.48 and 0.001·0.9 + 0.999·0.52
    let drug_rate = paradox_bn::case2_recovery(&spec, true).unwrap();
    let placebo_rate = paradox_bn::case2_recovery(&spec, false).unwrap();
    ok &= (drug_rate - 0.79968).abs() < EXACT_TOL && drug_rate < 0.8;
    ok &= (placebo_rate - 0.52038).abs() < EXACT_TOL && placebo_rate > 0.52;

    report(
        "AC3",
        "n=3 recovery table, case 1 and case 2 values",
        ok,
        start.elapsed(),
        Duration::from_secs(1),
    );
}

fn spec_strategy() -> impl Strategy<Value = ParadoxBnSpec> {
    let prob = 0.001f64..0.999;
    (1usize..=8).prop_flat_map(move |n| {
        (
            Just(n),
            [prob.clone(), prob.clone(), prob.clone(), prob.clone()],
            [prob.clone(), prob.clone(), prob.clone()],
            proptest::collection::vec(prob.clone(), n - 1),
        )
            .prop_map(
                |(n, [p1, p2, p3, p4], [p, q, prior_xn], priors_x)| ParadoxBnSpec {
                    n,
                    p1,
                    p2,
                    p3,
                    p4,
                    p,
                    q,
                    prior_xn,
                    priors_x,
                },
            )
    })
}

/// Every way of fixing `X1..X(n-1)` with `Xn` left open.
fn upstream_assignments(n: usize) -> impl Iterator<Item = Vec<Option<bool>>> {
    (0u32..1 << (n - 1)).map(move |bits| {
        (0..n)
            .map(|i| (i + 1 < n).then(|| bits >> i & 1 == 1))
            .collect()
    })
}

fn check_against_joint(spec: &ParadoxBnSpec) -> Result<(), TestCaseError> {
    let n = spec.n;
    let joint = paradox_bn::exact_joint(spec).unwrap();
    let total: f64 = joint.probs().iter().sum();
    prop_assert!((total - 1.0).abs() < EXACT_TOL);

    for d in [false, true] {
        let mut ev = vec![None; n];
        let from_joint = joint.conditional_recovery(&ev, Some(d)).unwrap();
        let closed = paradox_bn::case2_recovery(spec, d).unwrap();
        prop_assert!((from_joint - closed).abs() < EXACT_TOL, "case2 d={d}");

        for xn in [false, true] {
            ev[n - 1] = Some(xn);
            let pooled = joint.conditional_recovery(&ev, Some(d)).unwrap();
            let closed = paradox_bn::case1_recovery(spec, xn, d);
            prop_assert!((pooled - closed).abs() < EXACT_TOL, "case1 xn={xn} d={d}");
            for mut upstream in upstream_assignments(n) {
                upstream[n - 1] = Some(xn);
                let cond = joint.conditional_recovery(&upstream, Some(d)).unwrap();
                prop_assert!((cond - pooled).abs() < EXACT_TOL, "upstream {upstream:?}");
            }
            ev[n - 1] = None;
        }
    }
    Ok(())
}

#[test]
fn ac4_oracle_equivalence() {
    let start = Instant::now();
    let mut runner = TestRunner::new(Config {
        cases: 200,
        failure_persistence: None,
        ..Config::default()
    });
    let outcome = runner.run(&spec_strategy(), |spec| check_against_joint(&spec));
    if let Err(e) = &outcome {
        println!("AC4 counterexample: {e}");
    }
    report(
        "AC4",
        "200 random specs (n<=8): closed forms match joint enumeration within 1e-12",
        outcome.is_ok(),
        start.elapsed(),
        Duration::from_secs(30),
    );
}

#[test]
fn ac5_universal_reversal() {
    let start = Instant::now();
    let ok = (1..=8).all(|n| {
        paradox_bn::certify_reversal(&ParadoxBnSpec::canonical(n))
            .unwrap()
            .paradox
    });
    report(
        "AC5",
        "reference parameters give paradox=true for n=1..8",
        ok,
        start.elapsed(),
        Duration::from_secs(1),
    );
}

/// Frozen seed for the convergence criterion.
const SIMULATION_SEED: u64 = 0x5eed_2015;
const SIMULATION_SIZE: usize = 200_000;
const CONVERGENCE_TOL: f64 = 0.02;

#[test]
fn ac6_simulation_convergence() {
    let start = Instant::now();
    let spec = ParadoxBnSpec::canonical(2);
    let ds = trial_sim::sample(&spec, SIMULATION_SIZE, SIMULATION_SEED).unwrap();
    let table = trial_sim::to_table(&ds).unwrap();
    let mut ok = table.total().unwrap() == SIMULATION_SIZE as u64;

    let yes = |b: bool| if b { "true" } else { "false" };
    for xn in [false, true] {
        for d in [false, true] {
            let mut hits = 0;
            let mut total = 0;
            for x1 in [false, true] {
                for r in [false, true] {
                    let c = table.count(&[yes(x1), yes(xn), yes(d), yes(r)]).unwrap();
                    total += c;
                    if r {
                        hits += c;
                    }
                }
            }
            let empirical = hits as f64 / total as f64;
            let target = paradox_bn::case1_recovery(&spec, xn, d);
            let close = (empirical - target).abs() < CONVERGENCE_TOL;
            println!(
                "  AC6 P(R | X2={xn}, D={d}) = {empirical:.4} over {total} records (target {target}, {})",
                if close { "ok" } else { "off" }
            );
            ok &= close;
        }
    }

    let treat = Treatment::new("Drug", "true", "false");
    let outcome = Outcome::new("Recovered", "true");
    let r = tables::detect_reversal(&table, &treat, &outcome, &["X2"]).unwrap();
    println!(
        "  AC6 aggregate delta {:+.4}; stratum deltas {:?}",
        r.aggregate.delta,
        r.strata
            .iter()
            .map(|s| s.summary.map(|a| a.delta))
            .collect::<Vec<_>>()
    );
    ok &= r.aggregate.direction().is_gt() && r.full_reversal;

    report(
        "AC6",
        "2e5 simulated records converge and reproduce the reversal",
        ok,
        start.elapsed(),
        Duration::from_secs(10),
    );
}

#[test]
fn ac7_design_arithmetic() {
    let start = Instant::now();
    let groups = rct_design::group_count(&DesignSpec::binary(20, 50)).unwrap();
    let mut spec = DesignSpec::binary(19, 50);
    spec.factors.push(Factor::new("age", 10));
    let subjects = rct_design::subjects_required(&spec).unwrap();
    let ok = groups == 1_048_576u64.into() && subjects == 262_144_000u64.into();
    report(
        "AC7",
        "2^20 groups = 1,048,576; 19 binary + age:10 at 50 = 262,144,000",
        ok,
        start.elapsed(),
        Duration::from_secs(1),
    );
}
