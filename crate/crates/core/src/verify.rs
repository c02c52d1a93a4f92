//! Three-valued verdicts on catalog chains, the worked-example registry, and
//! seeded fuzz campaigns.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bracket::Bracket;
use crate::catalog::{
    applicability_check, claims_size_bound, find_entry, list_entries, scalar_key, Applicability, Arity,
    CatalogEntry, Claims, Engine, Evaluator, Expr, Hypothesis, Relation,
};
use crate::error::{Error, Result};
use crate::instance::{InstanceSpec, Params, Permutations};
use crate::numat::{pointwise_leq, NonNegMatrix};
use crate::radius::{brute_force_oracle, JsrConfig};
use crate::setalg::{sigma_even_words, tau_nu_word, OperatorSet, Permutation, Word};

/// Absolute tolerance on bracket comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Relative slack for pointwise claims.
pub const ELEMENTWISE_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Confirmed,
    Inconclusive,
    ViolationCertified,
}

impl Status {
    fn worst(self, other: Status) -> Status {
        self.max(other)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TermReport {
    pub expr: String,
    pub lo: f64,
    pub hi: f64,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub partial: bool,
}

/// Comparison of terms `position` and `position + 1` (1-based).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Margin {
    pub chain: String,
    pub position: usize,
    pub relation: Relation,
    /// Certified slack; negative when the bracket order is violated or unresolved.
    pub gap: f64,
    pub status: Status,
    /// Both sides are the same quantity by exact identities.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub identical: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainReport {
    pub label: String,
    pub terms: Vec<TermReport>,
    pub margins: Vec<Margin>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ElementwiseReport {
    pub label: String,
    /// `None` when the sides are not single matrices.
    pub holds: Option<bool>,
    pub max_excess: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub digest: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub weights: Vec<f64>,
    pub params: Params,
    #[serde(skip_serializing_if = "Permutations::is_empty")]
    pub permutations: Permutations,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub entry: String,
    pub status: Status,
    pub applicability: Applicability,
    pub chains: Vec<ChainReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub elementwise: Vec<ElementwiseReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub partial: bool,
    pub retried: bool,
    pub depth: usize,
}

impl Verdict {
    pub fn margins(&self) -> impl Iterator<Item = &Margin> {
        self.chains.iter().flat_map(|c| c.margins.iter())
    }
}

/// Options of [`check_instance`].
#[derive(Clone, Debug, PartialEq)]
pub struct CheckOptions {
    pub cfg: JsrConfig,
    pub tol: f64,
    pub allow_out_of_regime: bool,
    pub engine: Engine,
    pub retry: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            cfg: JsrConfig::default(),
            tol: DEFAULT_TOL,
            allow_out_of_regime: false,
            engine: Engine::Standard,
            retry: true,
        }
    }
}

impl CheckOptions {
    pub fn out_of_regime(mut self) -> Self {
        self.allow_out_of_regime = true;
        self
    }
}

/// Configuration used for the single retry of an inconclusive check.
pub fn retry_config(cfg: &JsrConfig) -> JsrConfig {
    JsrConfig {
        max_depth: cfg.max_depth * 2,
        budget_products: cfg.budget_products.saturating_mul(2),
        target_width: cfg.target_width / 4.0,
        ..cfg.clone()
    }
}

fn compare(a: &Bracket, b: &Bracket, rel: Relation, tol: f64) -> (f64, Status) {
    match rel {
        Relation::Le => {
            let status = if a.hi <= b.lo + tol {
                Status::Confirmed
            } else if a.lo > b.hi + tol {
                Status::ViolationCertified
            } else {
                Status::Inconclusive
            };
            (b.lo - a.hi, status)
        }
        Relation::Eq => {
            let (s1, s2) = (compare(a, b, Relation::Le, tol), compare(b, a, Relation::Le, tol));
            (s1.0.min(s2.0), s1.1.worst(s2.1))
        }
    }
}

/// SHA-256 of the entry id and the instance JSON.
pub fn instance_digest(entry: &str, inst: &InstanceSpec) -> String {
    let mut h = Sha256::new();
    h.update(entry.as_bytes());
    h.update(b"\n");
    h.update(inst.to_json().as_bytes());
    hex::encode(h.finalize())
}

fn evaluate_claims(
    inst: &InstanceSpec,
    claims: &Claims,
    cfg: &JsrConfig,
    opts: &CheckOptions,
) -> Result<(Status, Vec<ChainReport>, Vec<ElementwiseReport>, bool)> {
    let mut ev = Evaluator::new(&inst.sets, cfg.clone()).with_engine(opts.engine);
    let mut status = Status::Confirmed;
    let mut partial = false;
    let mut chains = Vec::new();
    for chain in &claims.chains {
        let brackets = chain.terms.iter().map(|t| ev.eval_scalar(t)).collect::<Result<Vec<_>>>()?;
        let keys: Vec<String> = chain.terms.iter().map(scalar_key).collect();
        let mut margins = Vec::new();
        for (p, rel) in chain.relations.iter().enumerate() {
            let (gap, st, identical) = if keys[p] == keys[p + 1] {
                (0.0, Status::Confirmed, true)
            } else {
                let (g, s) = compare(&brackets[p], &brackets[p + 1], *rel, opts.tol);
                (g, s, false)
            };
            status = status.worst(st);
            margins.push(Margin { chain: chain.label.clone(), position: p + 1, relation: *rel, gap, status: st, identical });
        }
        partial |= brackets.iter().any(|b| b.loose);
        let terms = chain
            .terms
            .iter()
            .zip(&brackets)
            .map(|(t, b)| TermReport { expr: t.to_string(), lo: b.lo, hi: b.hi, partial: b.loose })
            .collect();
        chains.push(ChainReport { label: chain.label.clone(), terms, margins });
    }
    let mut elementwise = Vec::new();
    if inst.sets.iter().all(|s| s.len() == 1) {
        for claim in &claims.elementwise {
            let lhs = ev.eval_matrix(&claim.lhs)?;
            let rhs = ev.eval_matrix(&claim.rhs)?;
            let (holds, excess) = pointwise_check(&lhs, &rhs)?;
            if !holds {
                status = Status::ViolationCertified;
            }
            elementwise.push(ElementwiseReport { label: claim.label.clone(), holds: Some(holds), max_excess: excess });
        }
    } else {
        for claim in &claims.elementwise {
            elementwise.push(ElementwiseReport { label: claim.label.clone(), holds: None, max_excess: 0.0 });
        }
    }
    Ok((status, chains, elementwise, partial))
}

/// `lhs ≤ rhs` entrywise up to the relative slack; also the largest excess.
pub fn pointwise_check(lhs: &NonNegMatrix, rhs: &NonNegMatrix) -> Result<(bool, f64)> {
    let scale = lhs.max_entry().max(rhs.max_entry());
    let holds = pointwise_leq(lhs, rhs, ELEMENTWISE_SLACK * scale)?;
    let excess = lhs.entries().iter().zip(rhs.entries()).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max);
    Ok((holds, excess))
}

/// Evaluate the chains of `entry_id` on `inst` and classify them.
pub fn check_instance(entry_id: &str, inst: &InstanceSpec, opts: &CheckOptions) -> Result<Verdict> {
    let entry = find_entry(entry_id)?;
    inst.validate()?;
    let applicability = applicability_check(&entry, inst)?;
    if !applicability.applicable && !opts.allow_out_of_regime {
        return Err(Error::NotApplicable(format!(
            "{}: {}",
            entry.id,
            applicability.reason.clone().unwrap_or_default()
        )));
    }
    opts.cfg.validate()?;
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(Error::InvalidParam(format!("tol must be positive, got {}", opts.tol)));
    }
    let claims = entry.claims(inst)?;
    let mut cfg = opts.cfg.clone();
    if let Some(d) = inst.params.depth {
        cfg.max_depth = d;
    }
    let (mut status, mut chains, mut elementwise, mut partial) = evaluate_claims(inst, &claims, &cfg, opts)?;
    let mut retried = false;
    if status == Status::Inconclusive && opts.retry {
        cfg = retry_config(&cfg);
        (status, chains, elementwise, partial) = evaluate_claims(inst, &claims, &cfg, opts)?;
        retried = true;
    }
    let witness = (status == Status::ViolationCertified).then(|| Witness {
        digest: instance_digest(entry.id, inst),
        weights: inst.weights.clone(),
        params: inst.params.clone(),
        permutations: inst.permutations.clone(),
    });
    Ok(Verdict {
        entry: entry.id.into(),
        status,
        applicability,
        chains,
        elementwise,
        witness,
        partial,
        retried,
        depth: cfg.max_depth,
    })
}

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Stated in the source text.
    Printed,
    /// Computed by exhaustive enumeration.
    Oracle,
}

/// A value an example is expected to reproduce.
#[derive(Clone, Debug, PartialEq)]
pub struct Expectation {
    pub name: String,
    pub expr: Expr,
    pub expected: f64,
    pub provenance: Provenance,
    /// False for printed values known to disagree with direct computation.
    pub required: bool,
}

/// One worked example: instance family, chain, and expected values.
#[derive(Clone, Debug)]
pub struct WorkedExample {
    pub id: &'static str,
    pub entry: &'static str,
    /// `alpha`, or `t` for examples driven by equal weights `t`.
    pub parameter: &'static str,
    /// Printed threshold below which the chain fails.
    pub threshold: f64,
    pub confirm_at: f64,
    pub violate_at: f64,
    pub expectations: Vec<Expectation>,
    base: InstanceSpec,
}

impl WorkedExample {
    /// The instance at parameter value `value`.
    pub fn instance(&self, value: f64) -> InstanceSpec {
        let mut inst = self.base.clone();
        match self.parameter {
            "t" => inst.weights = vec![value; inst.arity()],
            _ => inst.params.alpha = Some(value),
        }
        inst
    }
}

pub const EXAMPLE_IDS: [&str; 5] = ["2.4", "3.4", "3.10", "3.12", "3.14"];

fn mat(rows: [[f64; 2]; 2]) -> NonNegMatrix {
    NonNegMatrix::from_rows(&[rows[0].to_vec(), rows[1].to_vec()]).expect("literal matrix")
}

fn t0() -> NonNegMatrix {
    mat([[0.0, 0.0], [1.0, 1.0]])
}

fn singletons(ms: Vec<NonNegMatrix>) -> Vec<OperatorSet> {
    ms.into_iter().enumerate().map(|(i, m)| OperatorSet::singleton(format!("Psi{}", i + 1), m)).collect()
}

fn mixed_four() -> Vec<NonNegMatrix> {
    vec![t0(), mat([[1.0, 0.0], [1.0, 1.0]]), mat([[0.0, 1.0], [1.0, 1.0]]), t0()]
}

fn expect(name: &str, expr: Expr, expected: f64, provenance: Provenance) -> Expectation {
    Expectation { name: name.into(), expr, expected, provenance, required: true }
}

/// Oracle value of `r(word)` on singleton sets, by direct enumeration.
fn oracle_word_radius(w: &Word, sets: &[OperatorSet]) -> Result<f64> {
    let set = w.evaluate(sets)?;
    Ok(brute_force_oracle(&set, 1)?.mid())
}

fn mean_norm(m: usize, a: f64) -> Expr {
    Expr::mean_eq((1..=m).map(Expr::set).collect(), a).norm()
}

/// The worked example `id` with its expected values.
pub fn worked_example(id: &str) -> Result<WorkedExample> {
    let perm = |v: Vec<usize>| Permutation::new(v).expect("literal permutation");
    let ex = match id {
        "2.4" => {
            let sets = singletons(vec![NonNegMatrix::ones(2); 3]);
            let base = InstanceSpec::new(sets)?;
            let lhs = Expr::product(
                (0..3).map(|_| Expr::mean_eq((1..=3).map(Expr::set).collect(), 0.2)).collect(),
            );
            WorkedExample {
                id: "2.4",
                entry: "C2.3",
                parameter: "t",
                threshold: 1.0 / 3.0,
                confirm_at: 0.4,
                violate_at: 0.2,
                expectations: vec![
                    expect("r(Σ1Σ2Σ3)", lhs.r(), 8.0, Provenance::Printed),
                    expect("r(Ψ1Ψ2Ψ3)", Expr::product((1..=3).map(Expr::set).collect()).r(), 8.0, Provenance::Printed),
                ],
                base,
            }
        }
        "3.4" => {
            let base = InstanceSpec::new(singletons(vec![t0(); 3]))?;
            WorkedExample {
                id: "3.4",
                entry: "T3.3odd",
                parameter: "alpha",
                threshold: 1.0 / 3.0,
                confirm_at: 0.40,
                violate_at: 0.30,
                expectations: vec![
                    expect("‖T1‖", mean_norm(3, 0.4), 2f64.sqrt(), Provenance::Printed),
                    expect("r(Ψ1Ψ2*Ψ3Ψ1*Ψ2Ψ3*)", Expr::word(&crate::setalg::alternating_word(3)).r(), 8.0, Provenance::Printed),
                ],
                base,
            }
        }
        "3.10" => {
            let tau = Permutation::identity(4);
            let nu = perm(vec![1, 2, 4, 3]);
            let sig = sigma_even_words(&tau)?;
            let sig_nu = Expr::product((1..=4).map(|i| Expr::word(&sig[nu.apply(i) - 1])).collect());
            let base = InstanceSpec::new(singletons(vec![t0(); 4]))?.with_tau(tau).with_nu(nu);
            WorkedExample {
                id: "3.10",
                entry: "T3.8ii",
                parameter: "alpha",
                threshold: 0.25,
                confirm_at: 0.30,
                violate_at: 0.20,
                expectations: vec![
                    expect("‖Ψ1^(α)∘…∘Ψ4^(α)‖", mean_norm(4, 0.3), 2f64.sqrt(), Provenance::Printed),
                    expect("r(Σν(1)⋯Σν(4))^(1/2)", sig_nu.r().pow(0.5), 4.0, Provenance::Printed),
                ],
                base,
            }
        }
        "3.12" => {
            let sets = singletons(mixed_four());
            let tau = Permutation::identity(4);
            let w = Word::new(
                (1..=4).map(|p| crate::setalg::Letter { set: tau.apply(p), adjoint: p % 2 == 1 }).collect(),
            )?;
            let oracle = oracle_word_radius(&w, &sets)?;
            let base = InstanceSpec::new(sets)?.with_tau(tau);
            WorkedExample {
                id: "3.12",
                entry: "T3.11",
                parameter: "alpha",
                threshold: 0.5 * 2f64.ln() / 3f64.ln(),
                confirm_at: 0.6,
                violate_at: 0.20,
                expectations: vec![
                    expect("‖Ψ1^(α)∘…∘Ψ4^(α)‖", mean_norm(4, 0.2), 2f64.sqrt(), Provenance::Printed),
                    Expectation {
                        name: "r(Ψτ(1)*Ψτ(2)Ψτ(3)*Ψτ(4))".into(),
                        expr: Expr::word(&w).r(),
                        expected: 3.0,
                        provenance: Provenance::Printed,
                        required: false,
                    },
                    expect("r(Ψτ(1)*Ψτ(2)Ψτ(3)*Ψτ(4))", Expr::word(&w).r(), oracle, Provenance::Oracle),
                ],
                base,
            }
        }
        "3.14" => {
            let sets = singletons(mixed_four());
            let tau = perm(vec![4, 3, 2, 1]);
            let nu = perm(vec![2, 1, 4, 3]);
            let w = tau_nu_word(&tau, &nu);
            let oracle = oracle_word_radius(&w, &sets)?;
            let base = InstanceSpec::new(sets)?.with_tau(tau).with_nu(nu);
            WorkedExample {
                id: "3.14",
                entry: "T3.13ii",
                parameter: "alpha",
                threshold: 0.25,
                confirm_at: 0.30,
                violate_at: 0.20,
                expectations: vec![
                    expect("‖Ψ1^(α)∘…∘Ψ4^(α)‖", mean_norm(4, 0.2), 2f64.sqrt(), Provenance::Printed),
                    expect("r(Ψτ(1)*Ψν(1)⋯Ψτ(4)*Ψν(4))^(1/2)", Expr::word(&w).r().pow(0.5), 4.0, Provenance::Printed),
                    expect("r(Ψτ(1)*Ψν(1)⋯Ψτ(4)*Ψν(4))", Expr::word(&w).r(), oracle, Provenance::Oracle),
                ],
                base,
            }
        }
        other => return Err(Error::UnknownExample(other.into())),
    };
    Ok(ex)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpectationReport {
    pub name: String,
    pub provenance: Provenance,
    pub expected: f64,
    pub lo: f64,
    pub hi: f64,
    pub matches: bool,
    pub required: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdCheck {
    pub parameter: String,
    pub value: f64,
    pub in_regime: bool,
    pub status: Status,
    pub expected: Status,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExampleReport {
    pub id: String,
    pub entry: String,
    pub threshold: f64,
    pub expectations: Vec<ExpectationReport>,
    pub checks: Vec<ThresholdCheck>,
    pub passed: bool,
}

/// Reproduce example `id`: expected values plus the threshold demonstration.
pub fn run_example(id: &str, opts: &CheckOptions) -> Result<ExampleReport> {
    let ex = worked_example(id)?;
    let probe = ex.instance(ex.violate_at);
    let mut ev = Evaluator::new(&probe.sets, opts.cfg.clone());
    let mut expectations = Vec::new();
    for e in &ex.expectations {
        let b = ev.eval_scalar(&e.expr)?;
        expectations.push(ExpectationReport {
            name: e.name.clone(),
            provenance: e.provenance,
            expected: e.expected,
            lo: b.lo,
            hi: b.hi,
            matches: b.contains_within(e.expected, DEFAULT_TOL),
            required: e.required,
        });
    }
    let mut checks = Vec::new();
    for (value, expected) in [(ex.confirm_at, Status::Confirmed), (ex.violate_at, Status::ViolationCertified)] {
        let inst = ex.instance(value);
        let entry = find_entry(ex.entry)?;
        let in_regime = applicability_check(&entry, &inst)?.applicable;
        let v = check_instance(ex.entry, &inst, &opts.clone().out_of_regime())?;
        checks.push(ThresholdCheck { parameter: ex.parameter.into(), value, in_regime, status: v.status, expected });
    }
    let passed = expectations.iter().all(|e| e.matches || !e.required) && checks.iter().all(|c| c.status == c.expected);
    Ok(ExampleReport { id: ex.id.into(), entry: ex.entry.into(), threshold: ex.threshold, expectations, checks, passed })
}

/// Random-instance generator settings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenParams {
    pub dim: (usize, usize),
    pub set_size: (usize, usize),
    pub sparsity: f64,
    /// Largest intermediate set allowed; bigger draws are shrunk.
    pub size_cap: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams { dim: (2, 4), set_size: (1, 3), sparsity: 0.3, size_cap: 64 }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        let (d0, d1) = self.dim;
        if !(1 <= d0 && d0 <= d1 && d1 <= 5) {
            return Err(Error::InvalidParam(format!("dim range {d0}..{d1} must lie within 1..5")));
        }
        let (s0, s1) = self.set_size;
        if !(1 <= s0 && s0 <= s1 && s1 <= 4) {
            return Err(Error::InvalidParam(format!("set-size range {s0}..{s1} must lie within 1..4")));
        }
        if !(0.0..1.0).contains(&self.sparsity) {
            return Err(Error::InvalidParam(format!("sparsity {} must lie in [0, 1)", self.sparsity)));
        }
        if self.size_cap == 0 {
            return Err(Error::InvalidParam("size cap must be positive".into()));
        }
        Ok(())
    }
}

/// Seed of instance `index` of `entry` in a campaign seeded with `seed`.
pub fn instance_seed(seed: u64, entry: &str, index: usize) -> u64 {
    let digest = Sha256::digest(format!("{seed}:{entry}:{index}").as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

fn random_matrix(rng: &mut ChaCha8Rng, dim: usize, sparsity: f64) -> NonNegMatrix {
    let data = (0..dim * dim)
        .map(|_| {
            let v: f64 = rng.gen();
            if rng.gen::<f64>() < sparsity {
                0.0
            } else {
                v
            }
        })
        .collect();
    NonNegMatrix::new(dim, data).expect("finite nonnegative")
}

fn random_perm(rng: &mut ChaCha8Rng, m: usize) -> Permutation {
    let mut v: Vec<usize> = (1..=m).collect();
    v.shuffle(rng);
    Permutation::new(v).expect("shuffled identity")
}

fn alpha_threshold(entry: &CatalogEntry, m: usize) -> f64 {
    let m = m as f64;
    entry
        .hypotheses
        .iter()
        .map(|h| match h {
            Hypothesis::AlphaAtLeastInvM => 1.0 / m,
            Hypothesis::AlphaAtLeastTwoOverM => 2.0 / m,
            Hypothesis::AlphaAtLeastThird => 1.0 / 3.0,
            Hypothesis::AlphaAtLeastHalf => 0.5,
            _ => 0.0,
        })
        .fold(0.0, f64::max)
}

/// A random in-regime instance of `entry`.
pub fn random_instance(entry: &CatalogEntry, gen: &GenParams, rng: &mut ChaCha8Rng) -> Result<InstanceSpec> {
    let has = |h: Hypothesis| entry.hypotheses.contains(&h);
    let pick = |rng: &mut ChaCha8Rng, opts: &[usize]| *opts.choose(rng).expect("nonempty");
    let (count, m, k) = match entry.arity {
        Arity::Fixed(n) => (n, n, None),
        Arity::M => {
            let m = if has(Hypothesis::MEven) {
                pick(rng, &[2, 4])
            } else if has(Hypothesis::MOdd) {
                3
            } else {
                pick(rng, &[2, 3])
            };
            (m, m, None)
        }
        Arity::K => {
            let k = pick(rng, &[2, 3]);
            (k, k, Some(k))
        }
        Arity::KTimesM => {
            let k = pick(rng, &[2, 3]);
            let m = pick(rng, &[2, 3]);
            (k * m, m, Some(k))
        }
    };
    let dim = rng.gen_range(gen.dim.0..=gen.dim.1);
    let mut sizes: Vec<usize> = (0..count)
        .map(|_| if has(Hypothesis::Singletons) { 1 } else { rng.gen_range(gen.set_size.0..=gen.set_size.1) })
        .collect();
    let mats: Vec<Vec<NonNegMatrix>> =
        sizes.iter().map(|&s| (0..s).map(|_| random_matrix(rng, dim, gen.sparsity)).collect()).collect();

    let mut inst = InstanceSpec::new(
        mats.iter().enumerate().map(|(i, ms)| OperatorSet::new(format!("Psi{}", i + 1), ms.clone())).collect::<Result<_>>()?,
    )?;
    if entry.arity == Arity::KTimesM {
        inst.params.k = k;
        inst.params.m = Some(m);
    } else if entry.arity == Arity::K {
        inst.params.k = k;
    }
    if entry.uses_weights() {
        let raw: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(Exp1) + 1e-3).collect();
        let total: f64 = raw.iter().sum();
        let scale = if has(Hypothesis::WeightsSumAtLeastOne) { rng.gen_range(1.0..=2.0) } else { 1.0 };
        inst.weights = raw.iter().map(|w| w / total * scale).collect();
        if has(Hypothesis::WeightsSumOne) {
            let last = 1.0 - inst.weights[..m - 1].iter().sum::<f64>();
            if last > 0.0 {
                inst.weights[m - 1] = last;
            }
        }
    }
    if entry.uses_alpha() {
        inst.params.alpha = Some(alpha_threshold(entry, m) + rng.gen_range(0.0..=0.5));
    }
    if entry.uses_t() {
        inst.params.t = Some(rng.gen_range(1.0..=2.0));
    }
    if matches!(entry.id, "T1.3i" | "T1.3ii" | "C2.2" | "C2.3") {
        inst.params.n = Some(pick(rng, &[1, 2]));
    }
    if has(Hypothesis::NeedsTau) {
        inst.permutations.tau = Some(random_perm(rng, m));
    }
    if has(Hypothesis::NeedsNu) {
        inst.permutations.nu = Some(random_perm(rng, m));
    }

    let claims = entry.claims(&inst)?;
    while claims_size_bound(&claims, &sizes) > gen.size_cap as f64 {
        let (i, _) = sizes.iter().enumerate().max_by_key(|&(i, &s)| (s, std::cmp::Reverse(i))).expect("sets");
        if sizes[i] == 1 {
            break;
        }
        sizes[i] -= 1;
    }
    for (set, &s) in inst.sets.iter_mut().zip(&sizes) {
        if s < set.len() {
            *set = OperatorSet::new(set.name.clone(), set.members()[..s].to_vec())?;
        }
    }
    Ok(inst)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FuzzViolation {
    pub seed: u64,
    pub index: usize,
    pub digest: String,
    pub params: Params,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub weights: Vec<f64>,
    #[serde(skip_serializing_if = "Permutations::is_empty")]
    pub permutations: Permutations,
    pub margins: Vec<Margin>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FuzzError {
    pub index: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntryReport {
    pub entry: String,
    pub count: usize,
    pub confirmed: usize,
    pub inconclusive: usize,
    pub violations: Vec<FuzzViolation>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<FuzzError>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FuzzReport {
    pub schema: u32,
    pub seed: u64,
    pub count: usize,
    pub generator: GenParams,
    pub config: JsrConfig,
    pub tol: f64,
    pub entries: Vec<EntryReport>,
}

impl FuzzReport {
    pub fn violation_count(&self) -> usize {
        self.entries.iter().map(|e| e.violations.len()).sum()
    }

    pub fn inconclusive_count(&self) -> usize {
        self.entries.iter().map(|e| e.inconclusive).sum()
    }

    pub fn error_count(&self) -> usize {
        self.entries.iter().map(|e| e.errors.len()).sum()
    }
}

/// Resolve `all` or a comma-separated id list.
pub fn resolve_entry_ids(spec: &str) -> Result<Vec<String>> {
    if spec == "all" {
        return Ok(list_entries().iter().map(|e| e.id.to_string()).collect());
    }
    spec.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|id| Ok(find_entry(id)?.id.to_string())).collect()
}

/// Run `count` random in-regime instances per entry.
pub fn fuzz_campaign(
    entry_ids: &[String],
    count: usize,
    seed: u64,
    gen: &GenParams,
    opts: &CheckOptions,
    timing: bool,
) -> Result<FuzzReport> {
    if count == 0 {
        return Err(Error::InvalidParam("count must be positive".into()));
    }
    gen.validate()?;
    opts.cfg.validate()?;
    let mut entries = Vec::new();
    for id in entry_ids {
        let entry = find_entry(id)?;
        let start = std::time::Instant::now();
        let mut rep = EntryReport {
            entry: entry.id.into(),
            count,
            confirmed: 0,
            inconclusive: 0,
            violations: Vec::new(),
            errors: Vec::new(),
            runtime_ms: None,
        };
        let outcomes: Vec<_> = (0..count)
            .into_par_iter()
            .map(|index| {
                let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(seed, entry.id, index));
                random_instance(&entry, gen, &mut rng).and_then(|inst| {
                    let v = check_instance(entry.id, &inst, opts)?;
                    Ok((inst, v))
                })
            })
            .collect();
        for (index, outcome) in outcomes.into_iter().enumerate() {
            match outcome {
                Ok((_, v)) if v.status == Status::Confirmed => rep.confirmed += 1,
                Ok((_, v)) if v.status == Status::Inconclusive => rep.inconclusive += 1,
                Ok((inst, v)) => rep.violations.push(FuzzViolation {
                    seed,
                    index,
                    digest: instance_digest(entry.id, &inst),
                    params: inst.params.clone(),
                    weights: inst.weights.clone(),
                    permutations: inst.permutations.clone(),
                    margins: v.margins().filter(|m| m.status == Status::ViolationCertified).cloned().collect(),
                }),
                Err(e) => rep.errors.push(FuzzError { index, message: e.to_string() }),
            }
        }
        if timing {
            rep.runtime_ms = Some(start.elapsed().as_millis() as u64);
        }
        entries.push(rep);
    }
    Ok(FuzzReport {
        schema: crate::instance::SCHEMA,
        seed,
        count,
        generator: gen.clone(),
        config: opts.cfg.clone(),
        tol: opts.tol,
        entries,
    })
}

/// Regenerate instance `index` of a campaign, for reproducing a report line.
pub fn reproduce_instance(entry_id: &str, seed: u64, index: usize, gen: &GenParams) -> Result<InstanceSpec> {
    let entry = find_entry(entry_id)?;
    let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(seed, entry.id, index));
    random_instance(&entry, gen, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_34_thresholds() {
        let ex = worked_example("3.4").unwrap();
        let opts = CheckOptions::default();
        let v = check_instance("T3.3odd", &ex.instance(0.40), &opts).unwrap();
        assert_eq!(v.status, Status::Confirmed);
        assert!(check_instance("T3.3odd", &ex.instance(0.30), &opts).is_err());
        let v = check_instance("T3.3odd", &ex.instance(0.30), &opts.clone().out_of_regime()).unwrap();
        assert_eq!(v.status, Status::ViolationCertified);
        assert_eq!(v.witness.as_ref().unwrap().digest.len(), 64);
    }

    #[test]
    fn identity_instance_is_confirmed() {
        let sets = singletons(vec![NonNegMatrix::identity(2); 3]);
        let inst = InstanceSpec::new(sets).unwrap().with_weights(vec![1.0 / 3.0; 3]);
        let v = check_instance("C2.1", &inst, &CheckOptions::default()).unwrap();
        assert_eq!(v.status, Status::Confirmed);
        for t in &v.chains[0].terms {
            assert!(t.lo <= 1.0 && 1.0 <= t.hi);
        }
    }

    #[test]
    fn all_examples_pass() {
        for id in EXAMPLE_IDS {
            let rep = run_example(id, &CheckOptions::default()).unwrap();
            assert!(rep.passed, "{id}: {rep:#?}");
        }
        assert!(matches!(worked_example("9.9"), Err(Error::UnknownExample(_))));
    }

    #[test]
    fn example_312_records_both_bases() {
        let ex = worked_example("3.12").unwrap();
        let bases: Vec<(f64, Provenance)> = ex.expectations[1..].iter().map(|e| (e.expected, e.provenance)).collect();
        assert_eq!(bases[0], (3.0, Provenance::Printed));
        assert_eq!(bases[1].1, Provenance::Oracle);
        assert!((bases[1].0 - 4.0).abs() < 1e-9);
    }

    #[test]
    fn compare_rules() {
        let a = Bracket::new(1.0, 1.1);
        let b = Bracket::new(1.2, 1.3);
        assert_eq!(compare(&a, &b, Relation::Le, 0.0).1, Status::Confirmed);
        assert_eq!(compare(&b, &a, Relation::Le, 0.0).1, Status::ViolationCertified);
        assert_eq!(compare(&a, &Bracket::new(1.05, 1.2), Relation::Le, 0.0).1, Status::Inconclusive);
        assert_eq!(compare(&a, &b, Relation::Eq, 0.0).1, Status::ViolationCertified);
        assert_eq!(compare(&Bracket::point(2.0), &Bracket::point(2.0), Relation::Eq, 1e-9).1, Status::Confirmed);
    }

    #[test]
    fn generator_is_in_regime_and_deterministic() {
        let gen = GenParams::default();
        for entry in list_entries() {
            for index in 0..5 {
                let a = reproduce_instance(entry.id, 3, index, &gen).unwrap();
                let b = reproduce_instance(entry.id, 3, index, &gen).unwrap();
                assert_eq!(a, b);
                let app = applicability_check(&entry, &a).unwrap();
                assert!(app.applicable, "{} #{index}: {:?}", entry.id, app.reason);
                let claims = entry.claims(&a).unwrap();
                let sizes: Vec<usize> = a.sets.iter().map(OperatorSet::len).collect();
                assert!(claims_size_bound(&claims, &sizes) <= gen.size_cap as f64 || sizes.iter().all(|&s| s == 1));
            }
        }
    }
}
