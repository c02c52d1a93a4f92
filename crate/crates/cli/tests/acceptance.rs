//! Acceptance suite: one pass/fail line per criterion.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hadamard_jsr::catalog::{list_entries, Evaluator, Expr};
use hadamard_jsr::instance::{InstanceSpec, Params};
use hadamard_jsr::radius::{brute_force_oracle, gsr_lower, jsr_bracket, set_norm, JsrConfig};
use hadamard_jsr::setalg::{adjoint_set, alternating_word, set_product};
use hadamard_jsr::verify::{
    check_instance, fuzz_campaign, worked_example, resolve_entry_ids, CheckOptions, GenParams, Provenance, Status,
};
use hadamard_jsr::{Bracket, NonNegMatrix, OperatorSet};

const EPS: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn status_at(id: &str, value: f64) -> Status {
    let ex = worked_example(id).expect("registered example");
    let opts = CheckOptions::default().out_of_regime();
    check_instance(ex.entry, &ex.instance(value), &opts).expect("example checks").status
}

fn scalar(inst: &InstanceSpec, e: &Expr) -> Bracket {
    Evaluator::new(&inst.sets, JsrConfig::default()).eval_scalar(e).expect("scalar")
}

fn t0() -> NonNegMatrix {
    NonNegMatrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap()
}

fn criterion_1() -> Outcome {
    let norm = set_norm(&OperatorSet::singleton("T0", t0()));
    let ex = worked_example("3.4").unwrap();
    let inst = ex.instance(0.4);
    let rho = scalar(&inst, &Expr::word(&alternating_word(3)).r());
    let ok_norm = norm.contains_within(2f64.sqrt(), EPS);
    let ok_rho = rho.contains_within(8.0, EPS);
    let (hi, lo) = (status_at("3.4", 0.40), status_at("3.4", 0.30));
    outcome(
        ok_norm && ok_rho && hi == Status::Confirmed && lo == Status::ViolationCertified,
        format!("norm [{:.12}, {:.12}], rho [{:.12}, {:.12}], alpha 0.40 {hi:?}, alpha 0.30 {lo:?}", norm.lo, norm.hi, rho.lo, rho.hi),
    )
}

fn criterion_2() -> Outcome {
    let ex = worked_example("3.10").unwrap();
    let mut ok = true;
    let mut detail = String::new();
    for alpha in [0.2, 0.3, 0.45] {
        let inst = ex.instance(alpha);
        let claims = hadamard_jsr::catalog::find_entry(ex.entry).unwrap().claims(&inst).unwrap();
        let rhs = claims.chains[0].terms.last().unwrap();
        let b = scalar(&inst, rhs);
        let want = 4f64.powf(alpha);
        ok &= b.contains_within(want, EPS);
        detail += &format!("rhs({alpha}) [{:.12}, {:.12}] vs {want:.12}; ", b.lo, b.hi);
    }
    let (hi, lo) = (status_at("3.10", 0.30), status_at("3.10", 0.20));
    outcome(ok && hi == Status::Confirmed && lo == Status::ViolationCertified, format!("{detail}alpha 0.30 {hi:?}, alpha 0.20 {lo:?}"))
}

fn criterion_3() -> Outcome {
    let ex = worked_example("3.14").unwrap();
    let oracle = ex.expectations.iter().find(|e| e.provenance == Provenance::Oracle).unwrap();
    let printed_base = ex.expectations.iter().find(|e| e.provenance == Provenance::Printed && e.expected == 4.0).unwrap();
    let cross = (oracle.expected.sqrt() - printed_base.expected).abs() <= EPS;
    let (lo, hi) = (status_at("3.14", 0.20), status_at("3.14", 0.30));
    outcome(
        cross && lo == Status::ViolationCertified && hi == Status::Confirmed,
        format!("oracle r(U') = {:.12} (sqrt {:.12} vs printed 4), alpha 0.20 {lo:?}, alpha 0.30 {hi:?}", oracle.expected, oracle.expected.sqrt()),
    )
}

fn criterion_4() -> Outcome {
    let ex = worked_example("3.12").unwrap();
    let bases: Vec<String> =
        ex.expectations[1..].iter().map(|e| format!("{:?} base {:.12}", e.provenance, e.expected)).collect();
    let both = ex.expectations.iter().any(|e| e.provenance == Provenance::Printed && e.expected == 3.0)
        && ex.expectations.iter().any(|e| e.provenance == Provenance::Oracle);
    let lhs = 2f64.sqrt();
    let either = ex.expectations[1..].iter().all(|e| lhs > e.expected.powf(0.2));
    let st = status_at("3.12", 0.20);
    outcome(both && either && st == Status::ViolationCertified, format!("{}; alpha 0.20 {st:?}", bases.join(", ")))
}

fn criterion_5() -> Outcome {
    let ex = worked_example("2.4").unwrap();
    let inst = ex.instance(0.2);
    let claims = hadamard_jsr::catalog::find_entry(ex.entry).unwrap().claims(&inst).unwrap();
    let lhs = scalar(&inst, &claims.chains[0].terms[0]);
    let (lo, hi) = (status_at("2.4", 0.2), status_at("2.4", 0.4));
    outcome(
        lhs.contains_within(8.0, EPS) && lo == Status::ViolationCertified && hi == Status::Confirmed,
        format!("lhs [{:.12}, {:.12}], t 0.2 {lo:?}, t 0.4 {hi:?}", lhs.lo, lhs.hi),
    )
}

fn random_set(rng: &mut ChaCha8Rng, dim: usize, size: usize) -> OperatorSet {
    let mats = (0..size)
        .map(|_| {
            let data = (0..dim * dim).map(|_| if rng.gen::<f64>() < 0.3 { 0.0 } else { rng.gen::<f64>() }).collect();
            NonNegMatrix::new(dim, data).unwrap()
        })
        .collect();
    OperatorSet::new("Psi", mats).unwrap()
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cfg = JsrConfig { max_depth: 10, target_width: 1e-3, ..JsrConfig::default() };
    let mut misses = 0;
    let mut widest = 0.0f64;
    for _ in 0..100 {
        let dim = rng.gen_range(1..=3);
        let size = rng.gen_range(1..=3);
        let psi = random_set(&mut rng, dim, size);
        let norm = set_norm(&psi);
        let gram = set_product(&adjoint_set(&psi), &psi).unwrap();
        let r = jsr_bracket(&gram, &cfg).bracket().sqrt();
        widest = widest.max(r.width() / r.hi.max(f64::MIN_POSITIVE));
        if !norm.overlaps(&r) {
            misses += 1;
        }
    }
    outcome(misses == 0, format!("{misses} non-overlapping of 100, widest relative bracket {widest:.2e}"))
}

fn criterion_7() -> Outcome {
    let ids = resolve_entry_ids("all").unwrap();
    let count = 200;
    let report = fuzz_campaign(&ids, count, 7, &GenParams::default(), &CheckOptions::default(), false).unwrap();
    let total = ids.len() * count;
    let inconclusive = report.inconclusive_count();
    let rate = inconclusive as f64 / total as f64;
    let worst = report
        .entries
        .iter()
        .max_by_key(|e| e.inconclusive)
        .map(|e| format!("{} with {}", e.entry, e.inconclusive))
        .unwrap_or_default();
    outcome(
        report.violation_count() == 0 && report.error_count() == 0 && rate <= 0.05,
        format!(
            "{} entries x {count}: {} violations, {inconclusive} inconclusive ({:.2}%, most: {worst}), {} errors",
            ids.len(),
            report.violation_count(),
            100.0 * rate,
            report.error_count()
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cfg = JsrConfig::default();
    let (mut misses, mut nonmono) = (0, 0);
    for _ in 0..100 {
        let set = random_set(&mut rng, 2, 2);
        let b = jsr_bracket(&set, &cfg).bracket();
        let o = brute_force_oracle(&set, 8).unwrap();
        if !b.overlaps(&o) {
            misses += 1;
        }
        let lows: Vec<f64> = (1..=10).map(|d| gsr_lower(&set, d).value).collect();
        if lows.windows(2).any(|w| w[1] < w[0]) {
            nonmono += 1;
        }
    }
    outcome(misses == 0 && nonmono == 0, format!("{misses} non-overlapping, {nonmono} non-monotone of 100"))
}

fn singleton_sets(rng: &mut ChaCha8Rng, count: usize) -> Vec<OperatorSet> {
    let dim = rng.gen_range(2..=4);
    (0..count).map(|i| random_set(rng, dim, 1).renamed(format!("Psi{}", i + 1))).collect()
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let opts = CheckOptions::default();
    let ts = [1.0, 1.5, 2.0];
    let mut failures = Vec::new();
    let mut checked = 0;
    for i in 0..500 {
        let (k, m) = (rng.gen_range(2..=3), rng.gen_range(2..=3));
        let t = ts[rng.gen_range(0..3)];
        let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..1.0)).collect();
        let sum: f64 = raw.iter().sum();
        let mut inst = InstanceSpec::new(singleton_sets(&mut rng, k * m)).unwrap();
        inst.weights = raw.iter().map(|w| w / sum * t).collect();
        inst.params = Params { k: Some(k), m: Some(m), ..Params::default() };
        let v = check_instance("T1.1", &inst, &opts).unwrap();
        checked += v.elementwise.len();
        if v.elementwise.iter().any(|e| e.holds != Some(true)) {
            failures.push(format!("T1.1#{i}"));
        }

        let m2 = rng.gen_range(2..=3);
        let inst = InstanceSpec::new(singleton_sets(&mut rng, m2)).unwrap().with_t(ts[rng.gen_range(0..3)]);
        let v = check_instance("T1.2iii", &inst, &opts).unwrap();
        checked += v.elementwise.len();
        if v.elementwise.iter().any(|e| e.holds != Some(true)) {
            failures.push(format!("T1.2iii#{i}"));
        }
    }
    outcome(failures.is_empty() && checked == 1000, format!("{checked} pointwise claims checked, failures: {failures:?}"))
}

fn hjsr(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_hjsr")).args(args).output().expect("hjsr runs");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let inst_path = dir.path().join("ex34.json");
    std::fs::write(&inst_path, worked_example("3.4").unwrap().instance(0.3).to_json()).unwrap();
    let inst = inst_path.to_str().unwrap();
    let runs: [&[&str]; 3] = [
        &["fuzz", "--entries", "T3.5,C2.2,T1.3ii", "--count", "15", "--seed", "11", "--json"],
        &["check", "--entry", "T3.3odd", "--instance", inst, "--allow-out-of-regime", "--json"],
        &["examples", "--json"],
    ];
    let mut detail = Vec::new();
    let mut ok = true;
    for args in runs {
        let (c1, a) = hjsr(args);
        let (c2, b) = hjsr(args);
        let same = a == b && c1 == c2 && !a.is_empty();
        ok &= same;
        detail.push(format!("{} {} bytes {}", args[0], a.len(), if same { "identical" } else { "DIFFER" }));
    }
    let ids = resolve_entry_ids("C3.15i,T3.13ii").unwrap();
    let lib = |_: ()| {
        serde_json::to_string(&fuzz_campaign(&ids, 10, 3, &GenParams::default(), &CheckOptions::default(), false).unwrap())
            .unwrap()
    };
    let same_lib = lib(()) == lib(());
    ok &= same_lib;
    detail.push(format!("library campaign {}", if same_lib { "identical" } else { "DIFFER" }));
    outcome(ok, detail.join(", "))
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let criteria: [(u32, &str, Option<Duration>, fn() -> Outcome); 10] = [
        (1, "Example 3.4 reproduction", Some(Duration::from_secs(1)), criterion_1),
        (2, "Example 3.10 reproduction", Some(Duration::from_secs(1)), criterion_2),
        (3, "Example 3.14 reproduction", Some(Duration::from_secs(1)), criterion_3),
        (4, "Example 3.12 relaxed reproduction", Some(Duration::from_secs(1)), criterion_4),
        (5, "Example 2.4 reproduction", Some(Duration::from_secs(1)), criterion_5),
        (6, "norm vs Gram radius overlap", Some(Duration::from_secs(60)), criterion_6),
        (7, "in-regime fuzz", Some(Duration::from_secs(15 * 60)), criterion_7),
        (8, "oracle equivalence", Some(Duration::from_secs(60)), criterion_8),
        (9, "elementwise suite", Some(Duration::from_secs(30)), criterion_9),
        (10, "determinism", None, criterion_10),
    ];
    let _ = list_entries();
    let mut failed = 0;
    for (n, name, limit, run) in criteria {
        let start = Instant::now();
        let o = run();
        let elapsed = start.elapsed();
        let in_time = limit.map_or(true, |l| elapsed <= l);
        let pass = o.pass && in_time;
        if !pass {
            failed += 1;
        }
        let budget = limit.map_or(String::new(), |l| format!(" / {:.0} s", l.as_secs_f64()));
        println!(
            "criterion {n:2} {}: {name} [{:.3} s{budget}{}] {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", over time" },
            o.detail
        );
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
