//! Registry of inequality chains as expression trees over the instance sets,
//! with applicability predicates and a caching bracket evaluator.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::bracket::Bracket;
use crate::error::{Error, Result};
use crate::instance::InstanceSpec;
use crate::numat::NonNegMatrix;
use crate::radius::{brute_force_oracle, jsr_bracket, set_norm, JsrConfig, ORACLE_CAP};
use crate::setalg::{
    adjoint_set, alternating_word, construction_words, interleaved_permutations, cyclic_sigma_indices,
    set_hadamard_mean, set_power, set_product, sigma_even_words, tau_nu_word,
    ConstructionKind, Letter, OperatorSet, Permutation, Word,
};

/// Refinement power used when an instance does not set `n`.
pub const DEFAULT_N: usize = 2;
/// Slack on the regime boundaries `Σα = 1`, `α ≥ c/m`.
pub const REGIME_SLACK: f64 = 1e-12;

/// Which set functional an `RValue` node takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RKind {
    /// Generalized and joint spectral radius (one bracket for both).
    GsrJsr,
    /// Supremum of member l2 norms.
    Norm,
}

/// Expression over instance sets. `Set` indices are 1-based.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Set(usize),
    Adjoint(Box<Expr>),
    Product(Vec<Expr>),
    HadamardMean(Vec<Expr>, Vec<f64>),
    PowerN(Box<Expr>, usize),
    RValue(RKind, Box<Expr>),
    ScalarPow(Box<Expr>, f64),
    ScalarMul(Vec<Expr>),
}

impl Expr {
    pub fn set(i: usize) -> Expr {
        Expr::Set(i)
    }

    pub fn star(i: usize) -> Expr {
        Expr::Adjoint(Box::new(Expr::Set(i)))
    }

    pub fn adj(self) -> Expr {
        Expr::Adjoint(Box::new(self))
    }

    pub fn product(factors: Vec<Expr>) -> Expr {
        Expr::Product(factors)
    }

    pub fn word(w: &Word) -> Expr {
        let letters: Vec<Expr> =
            w.letters().iter().map(|l| if l.adjoint { Expr::star(l.set) } else { Expr::set(l.set) }).collect();
        if letters.len() == 1 {
            letters.into_iter().next().expect("one letter")
        } else {
            Expr::Product(letters)
        }
    }

    pub fn mean(factors: Vec<Expr>, weights: Vec<f64>) -> Expr {
        Expr::HadamardMean(factors, weights)
    }

    /// Hadamard mean with every factor raised to the same weight.
    pub fn mean_eq(factors: Vec<Expr>, a: f64) -> Expr {
        let w = vec![a; factors.len()];
        Expr::HadamardMean(factors, w)
    }

    pub fn power(self, n: usize) -> Expr {
        Expr::PowerN(Box::new(self), n)
    }

    pub fn r(self) -> Expr {
        Expr::RValue(RKind::GsrJsr, Box::new(self))
    }

    pub fn norm(self) -> Expr {
        Expr::RValue(RKind::Norm, Box::new(self))
    }

    pub fn pow(self, p: f64) -> Expr {
        Expr::ScalarPow(Box::new(self), p)
    }

    pub fn mul(factors: Vec<Expr>) -> Expr {
        Expr::ScalarMul(factors)
    }

    pub fn is_set_valued(&self) -> bool {
        matches!(self, Expr::Set(_) | Expr::Adjoint(_) | Expr::Product(_) | Expr::HadamardMean(..) | Expr::PowerN(..))
    }

    /// Check node typing and set indices against `arity`.
    pub fn typecheck(&self, arity: usize) -> Result<()> {
        let want_set = |e: &Expr| -> Result<()> {
            if e.is_set_valued() {
                e.typecheck(arity)
            } else {
                Err(Error::IllTyped(format!("`{e}` used where a set is expected")))
            }
        };
        let want_scalar = |e: &Expr| -> Result<()> {
            if e.is_set_valued() {
                Err(Error::IllTyped(format!("`{e}` used where a scalar is expected")))
            } else {
                e.typecheck(arity)
            }
        };
        match self {
            Expr::Set(i) => {
                if *i == 0 || *i > arity {
                    return Err(Error::SetIndex { index: *i, arity });
                }
                Ok(())
            }
            Expr::Adjoint(x) | Expr::RValue(_, x) => want_set(x),
            Expr::PowerN(x, n) => {
                if *n == 0 {
                    return Err(Error::IllTyped("zero set power".into()));
                }
                want_set(x)
            }
            Expr::Product(xs) => {
                if xs.is_empty() {
                    return Err(Error::IllTyped("empty product".into()));
                }
                xs.iter().try_for_each(want_set)
            }
            Expr::HadamardMean(xs, w) => {
                if xs.is_empty() || xs.len() != w.len() {
                    return Err(Error::WeightCount { sets: xs.len(), weights: w.len() });
                }
                if let Some((index, &value)) = w.iter().enumerate().find(|(_, &v)| !(v > 0.0 && v.is_finite())) {
                    return Err(Error::NonPositiveWeight { index, value });
                }
                xs.iter().try_for_each(want_set)
            }
            Expr::ScalarPow(x, p) => {
                if !(*p > 0.0 && p.is_finite()) {
                    return Err(Error::NonPositiveExponent(*p));
                }
                want_scalar(x)
            }
            Expr::ScalarMul(xs) => {
                if xs.is_empty() {
                    return Err(Error::IllTyped("empty scalar product".into()));
                }
                xs.iter().try_for_each(want_scalar)
            }
        }
    }

    /// Upper estimate of the largest set formed while evaluating, from the
    /// member counts of the instance sets (no deduplication assumed).
    pub fn size_bound(&self, sizes: &[usize]) -> f64 {
        fn walk(e: &Expr, sizes: &[usize], peak: &mut f64) -> f64 {
            let v = match e {
                Expr::Set(i) => sizes.get(i.wrapping_sub(1)).copied().unwrap_or(1) as f64,
                Expr::Adjoint(x) => walk(x, sizes, peak),
                Expr::Product(xs) | Expr::HadamardMean(xs, _) => xs.iter().map(|x| walk(x, sizes, peak)).product(),
                Expr::PowerN(x, n) => walk(x, sizes, peak).powi(*n as i32),
                Expr::RValue(_, x) | Expr::ScalarPow(x, _) => {
                    walk(x, sizes, peak);
                    0.0
                }
                Expr::ScalarMul(xs) => {
                    xs.iter().for_each(|x| {
                        walk(x, sizes, peak);
                    });
                    0.0
                }
            };
            *peak = peak.max(v);
            v
        }
        let mut peak = 0.0;
        walk(self, sizes, &mut peak);
        peak
    }
}

fn needs_parens(e: &Expr) -> bool {
    !matches!(e, Expr::Set(_)) && !matches!(e, Expr::Adjoint(x) if matches!(**x, Expr::Set(_)))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Set(i) => write!(f, "Ψ{i}"),
            Expr::Adjoint(x) => match **x {
                Expr::Set(i) => write!(f, "Ψ{i}*"),
                _ => write!(f, "({x})*"),
            },
            Expr::Product(xs) => {
                for x in xs {
                    if needs_parens(x) {
                        write!(f, "({x})")?;
                    } else {
                        write!(f, "{x}")?;
                    }
                }
                Ok(())
            }
            Expr::HadamardMean(xs, w) => {
                for (k, (x, a)) in xs.iter().zip(w).enumerate() {
                    if k > 0 {
                        f.write_str("∘")?;
                    }
                    if needs_parens(x) {
                        write!(f, "({x})^({a})")?;
                    } else {
                        write!(f, "{x}^({a})")?;
                    }
                }
                Ok(())
            }
            Expr::PowerN(x, n) => write!(f, "({x})^{n}"),
            Expr::RValue(RKind::GsrJsr, x) => write!(f, "r({x})"),
            Expr::RValue(RKind::Norm, x) => write!(f, "‖{x}‖"),
            Expr::ScalarPow(x, p) => write!(f, "{x}^{p}"),
            Expr::ScalarMul(xs) => {
                for (k, x) in xs.iter().enumerate() {
                    if k > 0 {
                        f.write_str("·")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
        }
    }
}

/// Push adjoints to the leaves, flatten products, drop unit powers.
pub fn normal_form(e: &Expr) -> Expr {
    match e {
        Expr::Set(i) => Expr::Set(*i),
        Expr::Adjoint(x) => adjoint_of(&normal_form(x)),
        Expr::Product(xs) => {
            let mut flat = Vec::new();
            for x in xs {
                match normal_form(x) {
                    Expr::Product(ys) => flat.extend(ys),
                    y => flat.push(y),
                }
            }
            if flat.len() == 1 {
                flat.pop().expect("one factor")
            } else {
                Expr::Product(flat)
            }
        }
        Expr::HadamardMean(xs, w) => Expr::HadamardMean(xs.iter().map(normal_form).collect(), w.clone()),
        Expr::PowerN(x, 1) => normal_form(x),
        Expr::PowerN(x, n) => Expr::PowerN(Box::new(normal_form(x)), *n),
        Expr::RValue(k, x) => Expr::RValue(*k, Box::new(normal_form(x))),
        Expr::ScalarPow(x, p) if *p == 1.0 => normal_form(x),
        Expr::ScalarPow(x, p) => Expr::ScalarPow(Box::new(normal_form(x)), *p),
        Expr::ScalarMul(xs) => Expr::ScalarMul(xs.iter().map(normal_form).collect()),
    }
}

fn adjoint_of(x: &Expr) -> Expr {
    match x {
        Expr::Set(i) => Expr::star(*i),
        Expr::Adjoint(y) => (**y).clone(),
        Expr::Product(xs) => Expr::Product(xs.iter().rev().map(adjoint_of).collect()),
        Expr::HadamardMean(xs, w) => Expr::HadamardMean(xs.iter().map(adjoint_of).collect(), w.clone()),
        Expr::PowerN(y, n) => Expr::PowerN(Box::new(adjoint_of(y)), *n),
        scalar => scalar.clone().adj(),
    }
}

/// Representative of a set expression under the symmetries of its r-value
/// (cyclic rotation of products and passing to the adjoint) or of its norm
/// (adjoint only). Input must be in normal form.
fn canonical_operand(kind: RKind, x: &Expr) -> Expr {
    let adj = adjoint_of(x);
    let mut candidates = vec![x.clone(), adj.clone()];
    if kind == RKind::GsrJsr {
        for base in [x, &adj] {
            if let Expr::Product(fs) = base {
                for k in 1..fs.len() {
                    let mut rot = fs[k..].to_vec();
                    rot.extend_from_slice(&fs[..k]);
                    candidates.push(Expr::Product(rot));
                }
            }
        }
    }
    candidates.into_iter().min_by_key(|c| c.to_string()).expect("candidates")
}

/// Key identifying a scalar expression up to the exact identities used by the
/// evaluator; equal keys mean equal values.
pub fn scalar_key(e: &Expr) -> String {
    fn walk(e: &Expr) -> String {
        match e {
            Expr::RValue(k, x) => {
                let tag = if *k == RKind::GsrJsr { "r" } else { "n" };
                format!("{tag}[{}]", canonical_operand(*k, x))
            }
            Expr::ScalarPow(x, p) => format!("({})^{p}", walk(x)),
            Expr::ScalarMul(xs) => {
                let mut keys: Vec<String> = xs.iter().map(walk).collect();
                keys.sort();
                keys.join("·")
            }
            set => format!("set[{set}]"),
        }
    }
    walk(&normal_form(e))
}

/// How adjacent chain terms relate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Le,
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "≤",
            Relation::Eq => "=",
        })
    }
}

/// Ordered scalar terms `e1 R1 e2 R2 ... ek`.
#[derive(Clone, Debug, PartialEq)]
pub struct Chain {
    pub label: String,
    pub terms: Vec<Expr>,
    pub relations: Vec<Relation>,
}

impl Chain {
    pub fn start(label: impl Into<String>, first: Expr) -> Self {
        Chain { label: label.into(), terms: vec![first], relations: Vec::new() }
    }

    pub fn leq(mut self, next: Expr) -> Self {
        self.terms.push(next);
        self.relations.push(Relation::Le);
        self
    }

    pub fn equals(mut self, next: Expr) -> Self {
        self.terms.push(next);
        self.relations.push(Relation::Eq);
        self
    }
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.terms[0])?;
        for (rel, t) in self.relations.iter().zip(&self.terms[1..]) {
            write!(f, " {rel} {t}")?;
        }
        Ok(())
    }
}

/// Pointwise claim `lhs ≤ rhs` between singleton set expressions.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementwiseClaim {
    pub label: String,
    pub lhs: Expr,
    pub rhs: Expr,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Claims {
    pub chains: Vec<Chain>,
    pub elementwise: Vec<ElementwiseClaim>,
}

/// Number of input sets an entry takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arity {
    Fixed(usize),
    /// `m` sets, `m` taken from the instance.
    M,
    /// `k·m` sets ordered row by row: set `(i-1)·m + j` is `Ψ_ij`.
    KTimesM,
    /// `k` sets.
    K,
}

impl fmt::Display for Arity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arity::Fixed(n) => write!(f, "{n}"),
            Arity::M => f.write_str("m"),
            Arity::KTimesM => f.write_str("k*m"),
            Arity::K => f.write_str("k"),
        }
    }
}

/// A hypothesis of an entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hypothesis {
    Singletons,
    WeightsSumOne,
    WeightsSumAtLeastOne,
    TAtLeastOne,
    MEven,
    MOdd,
    AlphaAtLeastInvM,
    AlphaAtLeastTwoOverM,
    AlphaAtLeastThird,
    AlphaAtLeastHalf,
    NeedsTau,
    NeedsNu,
}

impl Hypothesis {
    /// Description of the regime this hypothesis demands.
    pub fn regime(&self) -> &'static str {
        match self {
            Hypothesis::Singletons => "single matrices",
            Hypothesis::WeightsSumOne => "sum(alpha_j) = 1",
            Hypothesis::WeightsSumAtLeastOne => "sum(alpha_j) >= 1",
            Hypothesis::TAtLeastOne => "t >= 1",
            Hypothesis::MEven => "m even",
            Hypothesis::MOdd => "m odd",
            Hypothesis::AlphaAtLeastInvM => "alpha >= 1/m",
            Hypothesis::AlphaAtLeastTwoOverM => "alpha >= 2/m",
            Hypothesis::AlphaAtLeastThird => "alpha >= 1/3",
            Hypothesis::AlphaAtLeastHalf => "alpha >= 1/2",
            Hypothesis::NeedsTau => "tau given",
            Hypothesis::NeedsNu => "nu given",
        }
    }

    /// Reason reported when the hypothesis fails.
    pub fn violation(&self) -> &'static str {
        match self {
            Hypothesis::Singletons => "sets must be singletons",
            Hypothesis::WeightsSumOne => "weights must sum to 1",
            Hypothesis::WeightsSumAtLeastOne => "weights sum < 1",
            Hypothesis::TAtLeastOne => "t < 1",
            Hypothesis::MEven => "m must be even",
            Hypothesis::MOdd => "m must be odd",
            Hypothesis::AlphaAtLeastInvM => "alpha < 1/m",
            Hypothesis::AlphaAtLeastTwoOverM => "alpha < 2/m",
            Hypothesis::AlphaAtLeastThird => "alpha < 1/3",
            Hypothesis::AlphaAtLeastHalf => "alpha < 1/2",
            Hypothesis::NeedsTau => "permutation tau required",
            Hypothesis::NeedsNu => "permutation nu required",
        }
    }

    fn holds(&self, ctx: &Ctx, inst: &InstanceSpec) -> bool {
        let alpha_at_least = |c: f64| ctx.alpha.is_some_and(|a| a >= c - REGIME_SLACK);
        let m = ctx.m as f64;
        match self {
            Hypothesis::Singletons => inst.sets.iter().all(|s| s.len() == 1),
            Hypothesis::WeightsSumOne => (ctx.weight_sum() - 1.0).abs() <= REGIME_SLACK,
            Hypothesis::WeightsSumAtLeastOne => ctx.weight_sum() >= 1.0 - REGIME_SLACK,
            Hypothesis::TAtLeastOne => ctx.t.is_some_and(|t| t >= 1.0 - REGIME_SLACK),
            Hypothesis::MEven => ctx.m % 2 == 0,
            Hypothesis::MOdd => ctx.m % 2 == 1,
            Hypothesis::AlphaAtLeastInvM => alpha_at_least(1.0 / m),
            Hypothesis::AlphaAtLeastTwoOverM => alpha_at_least(2.0 / m),
            Hypothesis::AlphaAtLeastThird => alpha_at_least(1.0 / 3.0),
            Hypothesis::AlphaAtLeastHalf => alpha_at_least(0.5),
            Hypothesis::NeedsTau => ctx.tau.is_some(),
            Hypothesis::NeedsNu => ctx.nu.is_some(),
        }
    }
}

/// Parameters an entry needs from the instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Needs {
    Weights,
    Alpha,
    T,
    Nothing,
}

/// Resolved instance parameters handed to entry builders.
#[derive(Clone, Debug)]
struct Ctx {
    m: usize,
    k: usize,
    weights: Vec<f64>,
    alpha: Option<f64>,
    t: Option<f64>,
    n: usize,
    tau: Option<Permutation>,
    nu: Option<Permutation>,
}

impl Ctx {
    fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn alpha(&self) -> f64 {
        self.alpha.expect("checked by resolve")
    }

    fn t(&self) -> f64 {
        self.t.expect("checked by resolve")
    }

    fn tau(&self) -> Result<&Permutation> {
        self.tau.as_ref().ok_or(Error::Missing("permutations.tau"))
    }

    fn nu(&self) -> Result<&Permutation> {
        self.nu.as_ref().ok_or(Error::Missing("permutations.nu"))
    }
}

/// One registered result.
#[derive(Clone)]
pub struct CatalogEntry {
    pub id: &'static str,
    /// Short formula summary of the displayed chain.
    pub anchor: &'static str,
    pub arity: Arity,
    pub hypotheses: &'static [Hypothesis],
    needs: Needs,
    build: fn(&Ctx) -> Result<Claims>,
}

impl fmt::Debug for CatalogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CatalogEntry").field("id", &self.id).field("arity", &self.arity).finish()
    }
}

impl CatalogEntry {
    /// Human-readable regime, e.g. `m odd, alpha >= 1/m`.
    pub fn regime(&self) -> String {
        let parts: Vec<&str> = self.hypotheses.iter().map(Hypothesis::regime).collect();
        if parts.is_empty() {
            "any".into()
        } else {
            parts.join(", ")
        }
    }

    /// True when the entry is stated for a fixed `alpha` (the plain geometric mean).
    pub fn uses_alpha(&self) -> bool {
        self.needs == Needs::Alpha
    }

    pub fn uses_weights(&self) -> bool {
        self.needs == Needs::Weights
    }

    pub fn uses_t(&self) -> bool {
        self.needs == Needs::T
    }

    fn resolve(&self, inst: &InstanceSpec) -> Result<Ctx> {
        let count = inst.arity();
        let p = &inst.params;
        let arity_err = |expected: usize| Error::Arity { entry: self.id.into(), expected, got: count };
        let (m, k) = match self.arity {
            Arity::Fixed(n) => {
                if count != n {
                    return Err(arity_err(n));
                }
                (n, 1)
            }
            Arity::M => {
                if let Some(m) = p.m {
                    if m != count {
                        return Err(arity_err(m));
                    }
                }
                (count, 1)
            }
            Arity::K => {
                if let Some(k) = p.k {
                    if k != count {
                        return Err(arity_err(k));
                    }
                }
                (1, count)
            }
            Arity::KTimesM => {
                let (k, m) = match (p.k, p.m) {
                    (Some(k), Some(m)) => (k, m),
                    (Some(k), None) if count % k == 0 => (k, count / k),
                    (None, Some(m)) if count % m == 0 => (count / m, m),
                    (None, None) => return Err(Error::Missing("params.k or params.m")),
                    (k, m) => return Err(arity_err(k.or(m).unwrap_or(1))),
                };
                if k * m != count {
                    return Err(arity_err(k * m));
                }
                (m, k)
            }
        };
        match self.needs {
            Needs::Weights if inst.weights.len() != m => {
                if inst.weights.is_empty() {
                    return Err(Error::Missing("weights"));
                }
                return Err(Error::WeightCount { sets: m, weights: inst.weights.len() });
            }
            Needs::Alpha if p.alpha.is_none() => return Err(Error::Missing("params.alpha")),
            Needs::T if p.t.is_none() => return Err(Error::Missing("params.t")),
            _ => {}
        }
        let perm_m = |perm: &Option<Permutation>| -> Result<Option<Permutation>> {
            match perm {
                Some(q) if q.m() != m => Err(Error::PermutationArity { expected: m, got: q.m() }),
                other => Ok(other.clone()),
            }
        };
        let needs_perms = self.hypotheses.iter().any(|h| matches!(h, Hypothesis::NeedsTau | Hypothesis::NeedsNu));
        let (tau, nu) = if needs_perms {
            (perm_m(&inst.permutations.tau)?, perm_m(&inst.permutations.nu)?)
        } else {
            (None, None)
        };
        Ok(Ctx { m, k, weights: inst.weights.clone(), alpha: p.alpha, t: p.t, n: p.n.unwrap_or(DEFAULT_N), tau, nu })
    }

    /// Build the claims of this entry on `inst` without checking hypotheses.
    pub fn claims(&self, inst: &InstanceSpec) -> Result<Claims> {
        let ctx = self.resolve(inst)?;
        let claims = (self.build)(&ctx)?;
        for c in &claims.chains {
            debug_assert!(c.terms.len() >= 2 && c.relations.len() + 1 == c.terms.len());
            for t in &c.terms {
                if t.is_set_valued() {
                    return Err(Error::IllTyped(format!("chain term `{t}` is a set")));
                }
                t.typecheck(inst.arity())?;
            }
        }
        for e in &claims.elementwise {
            e.lhs.typecheck(inst.arity())?;
            e.rhs.typecheck(inst.arity())?;
        }
        Ok(claims)
    }
}

/// Outcome of checking an entry's hypotheses on an instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Applicability {
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// Check every hypothesis of `entry`; the reason names the first failure.
/// Structural problems (arity, missing parameters) are errors.
pub fn applicability_check(entry: &CatalogEntry, inst: &InstanceSpec) -> Result<Applicability> {
    let ctx = entry.resolve(inst)?;
    for h in entry.hypotheses {
        if !h.holds(&ctx, inst) {
            return Ok(Applicability { applicable: false, reason: Some(h.violation().into()) });
        }
    }
    Ok(Applicability { applicable: true, reason: None })
}

fn s(i: usize) -> Expr {
    Expr::set(i)
}

fn st(i: usize) -> Expr {
    Expr::star(i)
}

fn prod(xs: Vec<Expr>) -> Expr {
    Expr::product(xs)
}

fn all_sets(m: usize) -> Vec<Expr> {
    (1..=m).map(s).collect()
}

/// `Ψ1^(a)∘...∘Ψm^(a)`.
fn plain_mean(m: usize, a: f64) -> Expr {
    Expr::mean_eq(all_sets(m), a)
}

/// Relabel set indices `i -> i + shift` cyclically in `1..=m`.
fn shift_word(w: &Word, shift: usize, m: usize) -> Word {
    let letters = w.letters().iter().map(|l| Letter { set: (l.set - 1 + shift) % m + 1, adjoint: l.adjoint }).collect();
    Word::new(letters).expect("nonempty word")
}

/// `Ψ1*Ψ2Ψ3*...Ψm` (adjoint on odd positions), `m` letters.
fn starred_odd_word(len: usize, m: usize) -> Word {
    let letters = (1..=len).map(|p| Letter { set: (p - 1) % m + 1, adjoint: p % 2 == 1 }).collect();
    Word::new(letters).expect("nonempty word")
}

/// `Ψ1Ψ2*Ψ3...Ψm*` (adjoint on even positions), `m` letters.
fn starred_even_word(m: usize) -> Word {
    let letters = (1..=m).map(|p| Letter { set: p, adjoint: p % 2 == 0 }).collect();
    Word::new(letters).expect("nonempty word")
}

fn words(ws: &[Word]) -> Vec<Expr> {
    ws.iter().map(Expr::word).collect()
}

fn t11_index(ctx: &Ctx, i: usize, j: usize) -> usize {
    (i - 1) * ctx.m + j
}

fn build_t11(ctx: &Ctx) -> Result<Claims> {
    let (k, m, w) = (ctx.k, ctx.m, &ctx.weights);
    let a = prod((1..=k).map(|i| Expr::mean((1..=m).map(|j| s(t11_index(ctx, i, j))).collect(), w.clone())).collect());
    let cols: Vec<Expr> = (1..=m).map(|j| prod((1..=k).map(|i| s(t11_index(ctx, i, j))).collect())).collect();
    let mean_cols = Expr::mean(cols.clone(), w.clone());
    let norm_rhs = Expr::mul(cols.iter().zip(w).map(|(c, &aj)| c.clone().norm().pow(aj)).collect());
    let rho_rhs = Expr::mul(cols.iter().zip(w).map(|(c, &aj)| c.clone().r().pow(aj)).collect());
    Ok(Claims {
        chains: vec![
            Chain::start("norm", a.clone().norm()).leq(mean_cols.clone().norm()).leq(norm_rhs),
            Chain::start("rho", a.clone().r()).leq(mean_cols.clone().r()).leq(rho_rhs),
        ],
        elementwise: vec![ElementwiseClaim { label: "product of means below mean of products".into(), lhs: a, rhs: mean_cols }],
    })
}

fn build_t12i(ctx: &Ctx) -> Result<Claims> {
    let w = &ctx.weights;
    let mean = Expr::mean(all_sets(ctx.m), w.clone());
    let norms = Expr::mul((1..=ctx.m).map(|j| s(j).norm().pow(w[j - 1])).collect());
    let rhos = Expr::mul((1..=ctx.m).map(|j| s(j).r().pow(w[j - 1])).collect());
    Ok(Claims {
        chains: vec![
            Chain::start("norm", mean.clone().norm()).leq(norms),
            Chain::start("rho", mean.r()).leq(rhos),
        ],
        elementwise: Vec::new(),
    })
}

fn build_t12iii(ctx: &Ctx) -> Result<Claims> {
    let t = ctx.t();
    let lhs = prod((1..=ctx.m).map(|j| Expr::mean(vec![s(j)], vec![t])).collect());
    let p = prod(all_sets(ctx.m));
    let rhs = Expr::mean(vec![p.clone()], vec![t]);
    Ok(Claims {
        chains: vec![
            Chain::start("rho", lhs.clone().r()).leq(p.clone().r().pow(t)),
            Chain::start("norm", lhs.clone().norm()).leq(p.norm().pow(t)),
        ],
        elementwise: vec![ElementwiseClaim { label: "product of powers below power of product".into(), lhs, rhs }],
    })
}

fn build_t13i(ctx: &Ctx) -> Result<Claims> {
    let (k, m, w, n) = (ctx.k, ctx.m, &ctx.weights, ctx.n);
    let lhs = prod((1..=k).map(|i| Expr::mean((1..=m).map(|j| s(t11_index(ctx, i, j))).collect(), w.clone())).collect());
    let cols: Vec<Expr> = (1..=m).map(|j| prod((1..=k).map(|i| s(t11_index(ctx, i, j))).collect())).collect();
    let mean_cols = Expr::mean(cols.clone(), w.clone());
    let mean_pow = Expr::mean(cols.iter().map(|c| c.clone().power(n)).collect(), w.clone());
    let rhs = Expr::mul(cols.iter().zip(w).map(|(c, &aj)| c.clone().r().pow(aj)).collect());
    let chain = Chain::start("r", lhs.r()).leq(mean_cols.r()).leq(mean_pow.r().pow(1.0 / n as f64)).leq(rhs);
    Ok(Claims { chains: vec![chain], elementwise: Vec::new() })
}

fn build_t13ii(ctx: &Ctx) -> Result<Claims> {
    let (k, t, n) = (ctx.k, ctx.t(), ctx.n);
    let lhs = prod((1..=k).map(|i| Expr::mean(vec![s(i)], vec![t])).collect());
    let p = prod(all_sets(k));
    let chain = Chain::start("r", lhs.r())
        .leq(Expr::mean(vec![p.clone()], vec![t]).r())
        .leq(Expr::mean(vec![p.clone().power(n)], vec![t]).r().pow(1.0 / n as f64))
        .leq(p.r().pow(t));
    Ok(Claims { chains: vec![chain], elementwise: Vec::new() })
}

/// `Σ_1 ... Σ_m` with `Σ_i` the cyclic weighted means.
fn cyclic_sigma_product(ctx: &Ctx) -> Expr {
    prod(
        cyclic_sigma_indices(ctx.m)
            .into_iter()
            .map(|idx| Expr::mean(idx.into_iter().map(s).collect(), ctx.weights.clone()))
            .collect(),
    )
}

fn build_c21(ctx: &Ctx) -> Result<Claims> {
    let chain = Chain::start("r", cyclic_sigma_product(ctx).r()).leq(prod(all_sets(ctx.m)).r());
    Ok(Claims { chains: vec![chain], elementwise: Vec::new() })
}

fn phi_chain(ctx: &Ctx, last_exponent: f64) -> Result<Claims> {
    let phis = words(&construction_words(ConstructionKind::PhiCyclic, ctx.m, None, None)?);
    let w = &ctx.weights;
    let n = ctx.n;
    let chain = Chain::start("r", cyclic_sigma_product(ctx).r())
        .leq(Expr::mean(phis.clone(), w.clone()).r())
        .leq(Expr::mean(phis.iter().map(|p| p.clone().power(n)).collect(), w.clone()).r().pow(1.0 / n as f64))
        .leq(prod(all_sets(ctx.m)).r().pow(last_exponent));
    Ok(Claims { chains: vec![chain], elementwise: Vec::new() })
}

fn build_c22(ctx: &Ctx) -> Result<Claims> {
    phi_chain(ctx, 1.0)
}

fn build_c23(ctx: &Ctx) -> Result<Claims> {
    phi_chain(ctx, ctx.weight_sum())
}

fn build_l31(_ctx: &Ctx) -> Result<Claims> {
    let chain = Chain::start("norm", s(1).norm()).equals(prod(vec![st(1), s(1)]).r().pow(0.5));
    Ok(Claims { chains: vec![chain], elementwise: Vec::new() })
}

fn build_t32even(ctx: &Ctx) -> Result<Claims> {
    let m = ctx.m;
    let a = 1.0 / m as f64;
    let e = 1.0 / (2 * m) as f64;
    let w1 = Expr::word(&starred_odd_word(m, m));
    let x = starred_even_word(m);
    let chain = Chain::start("norm", plain_mean(m, a).norm())
        .leq(Expr::mul(vec![w1.clone().r(), Expr::word(&x).r()]).pow(e))
        .equals(Expr::mul(vec![w1.r(), Expr::word(&x.adjoint()).r()]).pow(e));
    Ok(Claims { chains: vec![chain], elementwise: Vec::new() })
}

fn build_t32odd(ctx: &Ctx) -> Result<Claims> {
    let m = ctx.m;
    let chain = Chain::start("norm", plain_mean(m, 1.0 / m as f64).norm())
        .leq(Expr::word(&alternating_word(m)).r().pow(1.0 / (2 * m) as f64));
    Ok(Claims { chains: vec![chain], elementwise: Vec::new() })
}

fn build_t33even(ctx: &Ctx) -> Result<Claims> {
    let (m, a) = (ctx.m, ctx.alpha());
    let w1 = starred_odd_word(m, m);
    let sigma_alpha = Expr::mean_eq((0..m).map(|j| Expr::word(&shift_word(&w1, j, m))).collect(), a);
    let chain = Chain::start("norm", plain_mean(m, a).norm())
        .leq(sigma_alpha.r().pow(1.0 / m as f64))
        .leq(Expr::mul(vec![Expr::word(&w1).r(), Expr::word(&starred_even_word(m).adjoint()).r()]).pow(a / 2.0));
    Ok(Claims { chains: vec![chain], elementwise: Vec::new() })
}

fn build_t33odd(ctx: &Ctx) -> Result<Claims> {
    let (m, a) = (ctx.m, ctx.alpha());
    let v1 = starred_odd_word(2 * m, m);
    let omega_alpha = Expr::mean_eq((0..m).map(|j| Expr::word(&shift_word(&v1, j, m))).collect(), a);
    let chain = Chain::start("norm", plain_mean(m, a).norm())
        .leq(omega_alpha.r().pow(1.0 / (2 * m) as f64))
        .leq(Expr::word(&alternating_word(m)).r().pow(a / 2.0));
    Ok(Claims { chains: vec![chain], elementwise: Vec::new() })
}

/// Pairs `Ψ_s(2j-1) Ψ*_s(2j)` over the doubled sequence `1..m, 1..m`.
fn odd_pairs(m: usize) -> Vec<Expr> {
    let seq: Vec<usize> = (1..=m).chain(1..=m).collect();
    (0..m).map(|j| prod(vec![s(seq[2 * j]), st(seq[2 * j + 1])])).collect()
}

fn odd_chain(ctx: &Ctx, a: f64, last: f64) -> Result<Claims> {
    let m = ctx.m;
    let omegas = words(&construction_words(ConstructionKind::OmegaOdd, m, None, None)?);
    let chain = Chain::start("norm", plain_mean(m, a).norm())
        .leq(Expr::mean_eq(odd_pairs(m), a).r().pow(0.5))
        .leq(Expr::mean_eq(omegas, a).r().pow(1.0 / (2 * m) as f64))
        .leq(Expr::word(&alternating_word(m)).r().pow(last));
    Ok(Claims { chains: vec![chain], elementwise: Vec::new() })
}

fn build_t35(ctx: &Ctx) -> Result<Claims> {
    let e = 1.0 / (2 * ctx.m) as f64;
    odd_chain(ctx, 1.0 / ctx.m as f64, e)
}

fn build_t36(ctx: &Ctx) -> Result<Claims> {
    odd_chain(ctx, ctx.alpha(), ctx.alpha() / 2.0)
}

fn c37_chain(a: f64, last: f64) -> Result<Claims> {
    let w = |spec: &[(usize, bool)]| prod(spec.iter().map(|&(i, adj)| if adj { st(i) } else { s(i) }).collect());
    let chain = Chain::start("norm", Expr::mean_eq(vec![s(1), st(2), s(1)], a).norm())
        .leq(Expr::mean_eq(vec![w(&[(1, true), (2, true)]), w(&[(1, true), (1, false)]), w(&[(2, false), (1, false)])], a)
            .r()
            .pow(0.5))
        .leq(Expr::mean_eq(
            vec![
                w(&[(1, true), (2, true), (1, true), (1, false), (2, false), (1, false)]),
                w(&[(1, true), (1, false), (2, false), (1, false), (1, true), (2, true)]),
                w(&[(2, false), (1, false), (1, true), (2, true), (1, true), (1, false)]),
            ],
            a,
        )
        .r()
        .pow(1.0 / 6.0))
        .leq(w(&[(1, false), (2, false), (1, false)]).norm().pow(last));
    Ok(Claims { chains: vec![chain], elementwise: Vec::new() })
}

fn build_c37i(_ctx: &Ctx) -> Result<Claims> {
    c37_chain(1.0 / 3.0, 1.0 / 3.0)
}

fn build_c37ii(ctx: &Ctx) -> Result<Claims> {
    c37_chain(ctx.alpha(), ctx.alpha())
}

fn even_sigma_chain(ctx: &Ctx, a: f64, last: f64) -> Result<Claims> {
    let m = ctx.m;
    let (tau, nu) = (ctx.tau()?, ctx.nu()?);
    let sig = sigma_even_words(tau)?;
    let omegas = words(&construction_words(ConstructionKind::OmegaEven, m, Some(tau), Some(nu))?);
    let sig_nu = prod((1..=m).map(|i| Expr::word(&sig[nu.apply(i) - 1])).collect());
    let chain = Chain::start("norm", plain_mean(m, a).norm())
        .leq(Expr::mean_eq(words(&sig), a).r().pow(0.5))
        .leq(Expr::mean_eq(omegas, a).r().pow(1.0 / (2 * m) as f64))
        .leq(sig_nu.r().pow(last));
    Ok(Claims { chains: vec![chain], elementwise: Vec::new() })
}

fn build_t38i(ctx: &Ctx) -> Result<Claims> {
    even_sigma_chain(ctx, 1.0 / ctx.m as f64, 1.0 / (2 * ctx.m) as f64)
}

fn build_t38ii(ctx: &Ctx) -> Result<Claims> {
    even_sigma_chain(ctx, ctx.alpha(), ctx.alpha() / 2.0)
}

fn build_t311(ctx: &Ctx) -> Result<Claims> {
    let (m, a) = (ctx.m, ctx.alpha());
    let tau = ctx.tau()?;
    let sig = sigma_even_words(tau)?;
    let pairs: Vec<Expr> = (1..=m / 2).map(|j| prod(vec![st(tau.apply(2 * j - 1)), s(tau.apply(2 * j))])).collect();
    let thetas = words(&construction_words(ConstructionKind::ThetaHalf, m, Some(tau), None)?);
    let chain = Chain::start("norm", plain_mean(m, a).norm())
        .leq(Expr::mean_eq(words(&sig), a).r().pow(0.5))
        .leq(Expr::mean_eq(words(&sig[..m / 2]), a).r())
        .equals(Expr::mean_eq(pairs, a).r())
        .leq(Expr::mean_eq(thetas, a).r().pow(2.0 / m as f64))
        .leq(Expr::word(&tau_half_word(tau)).r().pow(a));
    Ok(Claims { chains: vec![chain], elementwise: Vec::new() })
}

/// `Ψ*_τ(1) Ψ_τ(2) ... Ψ*_τ(m-1) Ψ_τ(m)`.
fn tau_half_word(tau: &Permutation) -> Word {
    let letters = (1..=tau.m()).map(|p| Letter { set: tau.apply(p), adjoint: p % 2 == 1 }).collect();
    Word::new(letters).expect("nonempty word")
}

fn tau_nu_chain(ctx: &Ctx, tau: &Permutation, nu: &Permutation, a: f64, last: f64, tail_v: bool) -> Result<Claims> {
    let m = ctx.m;
    let pairs: Vec<Expr> = (1..=m).map(|j| prod(vec![st(tau.apply(j)), s(nu.apply(j))])).collect();
    let omegas = words(&construction_words(ConstructionKind::OmegaTauNu, m, Some(tau), Some(nu))?);
    let mut chain = Chain::start("norm", plain_mean(m, a).norm())
        .leq(Expr::mean_eq(pairs, a).r().pow(0.5))
        .leq(Expr::mean_eq(omegas, a).r().pow(1.0 / (2 * m) as f64))
        .leq(Expr::word(&tau_nu_word(tau, nu)).r().pow(last));
    if tail_v {
        chain = chain.equals(Expr::word(&alternating_word(m)).r().pow(last));
    }
    Ok(Claims { chains: vec![chain], elementwise: Vec::new() })
}

fn build_t313i(ctx: &Ctx) -> Result<Claims> {
    let m = ctx.m as f64;
    tau_nu_chain(ctx, ctx.tau()?, ctx.nu()?, 1.0 / m, 1.0 / (2.0 * m), false)
}

fn build_t313ii(ctx: &Ctx) -> Result<Claims> {
    tau_nu_chain(ctx, ctx.tau()?, ctx.nu()?, ctx.alpha(), ctx.alpha() / 2.0, false)
}

fn build_c315i(ctx: &Ctx) -> Result<Claims> {
    let (tau, nu) = interleaved_permutations(ctx.m)?;
    let m = ctx.m as f64;
    tau_nu_chain(ctx, &tau, &nu, 1.0 / m, 1.0 / (2.0 * m), true)
}

fn build_c315ii(ctx: &Ctx) -> Result<Claims> {
    let (tau, nu) = interleaved_permutations(ctx.m)?;
    tau_nu_chain(ctx, &tau, &nu, ctx.alpha(), ctx.alpha() / 2.0, true)
}

fn build_l316(ctx: &Ctx) -> Result<Claims> {
    let a = ctx.alpha();
    let chain = Chain::start("r", Expr::mean_eq(vec![s(1), st(1)], a).r())
        .leq(Expr::mean_eq(vec![s(1), s(1)], a).r())
        .leq(s(1).r().pow(2.0 * a));
    Ok(Claims { chains: vec![chain], elementwise: Vec::new() })
}

fn build_c317(ctx: &Ctx) -> Result<Claims> {
    let a = ctx.alpha();
    let ps = || prod(vec![st(1), s(2)]);
    let chain = Chain::start("norm", Expr::mean_eq(vec![s(1), s(2)], a).norm())
        .leq(Expr::mean_eq(vec![ps(), prod(vec![st(2), s(1)])], a).r().pow(0.5))
        .leq(Expr::mean_eq(vec![ps(), ps()], a).r().pow(0.5))
        .leq(ps().r().pow(a));
    Ok(Claims { chains: vec![chain], elementwise: Vec::new() })
}

use Hypothesis as H;

/// All registered entries, in presentation order.
pub fn list_entries() -> Vec<CatalogEntry> {
    let e = |id, anchor, arity, hypotheses, needs, build| CatalogEntry { id, anchor, arity, hypotheses, needs, build };
    vec![
        e("T1.1", "A = Π_i (∘_j A_ij^(α_j)) ≤ ∘_j (Π_i A_ij)^(α_j); ‖A‖, ρ(A) ≤ ‖·‖, ρ(·) of the mean ≤ Π_j (column value)^α_j",
            Arity::KTimesM, &[H::Singletons, H::WeightsSumAtLeastOne], Needs::Weights, build_t11),
        e("T1.2i", "‖∘_j A_j^(α_j)‖ ≤ Π_j ‖A_j‖^α_j and ρ(∘_j A_j^(α_j)) ≤ Π_j ρ(A_j)^α_j",
            Arity::M, &[H::Singletons, H::WeightsSumAtLeastOne], Needs::Weights, build_t12i),
        e("T1.2iii", "A_1^(t)⋯A_m^(t) ≤ (A_1⋯A_m)^(t); ρ and ‖·‖ of the left side ≤ ρ, ‖·‖ of the product to the t",
            Arity::M, &[H::Singletons, H::TAtLeastOne], Needs::T, build_t12iii),
        e("T1.3i", "r(Π_i ∘_j Ψ_ij^(α_j)) ≤ r(∘_j C_j^(α_j)) ≤ r(∘_j (C_j^n)^(α_j))^(1/n) ≤ Π_j r(C_j)^α_j, C_j = Ψ_1j⋯Ψ_kj",
            Arity::KTimesM, &[H::WeightsSumAtLeastOne], Needs::Weights, build_t13i),
        e("T1.3ii", "r(Ψ_1^(t)⋯Ψ_k^(t)) ≤ r((Ψ_1⋯Ψ_k)^(t)) ≤ r(((Ψ_1⋯Ψ_k)^n)^(t))^(1/n) ≤ r(Ψ_1⋯Ψ_k)^t",
            Arity::K, &[H::TAtLeastOne], Needs::T, build_t13ii),
        e("C2.1", "r(Σ_1⋯Σ_m) ≤ r(Ψ_1⋯Ψ_m), Σ_i the cyclic weighted means",
            Arity::M, &[H::WeightsSumOne], Needs::Weights, build_c21),
        e("C2.2", "r(Σ_1⋯Σ_m) ≤ r(∘Φ_j^(α_j)) ≤ r(∘(Φ_j^n)^(α_j))^(1/n) ≤ r(Ψ_1⋯Ψ_m), Φ_j cyclic products",
            Arity::M, &[H::WeightsSumOne], Needs::Weights, build_c22),
        e("C2.3", "as C2.2 with Σα_j = α ≥ 1 and last term r(Ψ_1⋯Ψ_m)^α",
            Arity::M, &[H::WeightsSumAtLeastOne], Needs::Weights, build_c23),
        e("L3.1", "‖Ψ‖ = r(Ψ*Ψ)^(1/2)", Arity::Fixed(1), &[], Needs::Nothing, build_l31),
        e("T3.2even", "‖∘Ψ_j^(1/m)‖ ≤ (r(Ψ_1*Ψ_2⋯Ψ_m) r(Ψ_1Ψ_2*⋯Ψ_m*))^(1/2m), second factor also written reversed",
            Arity::M, &[H::MEven], Needs::Nothing, build_t32even),
        e("T3.2odd", "‖∘Ψ_j^(1/m)‖ ≤ r(Ψ_1Ψ_2*⋯Ψ_mΨ_1*⋯Ψ_m*)^(1/2m)",
            Arity::M, &[H::MOdd], Needs::Nothing, build_t32odd),
        e("T3.3even", "‖∘Ψ_j^(α)‖ ≤ r(Σ_α)^(1/m) ≤ (r(Ψ_1*Ψ_2⋯Ψ_m) r(Ψ_mΨ_(m-1)*⋯Ψ_1*))^(α/2)",
            Arity::M, &[H::MEven, H::AlphaAtLeastInvM], Needs::Alpha, build_t33even),
        e("T3.3odd", "‖∘Ψ_j^(α)‖ ≤ r(Ω_α)^(1/2m) ≤ r(Ψ_1Ψ_2*⋯Ψ_m*)^(α/2)",
            Arity::M, &[H::MOdd, H::AlphaAtLeastInvM], Needs::Alpha, build_t33odd),
        e("T3.5", "‖∘Ψ_j^(1/m)‖ ≤ r(∘ pairs^(1/m))^(1/2) ≤ r(∘Ω_j^(1/m))^(1/2m) ≤ r(Ψ_1Ψ_2*⋯Ψ_m*)^(1/2m)",
            Arity::M, &[H::MOdd], Needs::Nothing, build_t35),
        e("T3.6", "‖∘Ψ_j^(α)‖ ≤ r(∘ pairs^(α))^(1/2) ≤ r(∘Ω_j^(α))^(1/2m) ≤ r(Ψ_1Ψ_2*⋯Ψ_m*)^(α/2)",
            Arity::M, &[H::MOdd, H::AlphaAtLeastInvM], Needs::Alpha, build_t36),
        e("C3.7i", "‖Ψ^(1/3)∘(Σ*)^(1/3)∘Ψ^(1/3)‖ ≤ … ≤ ‖ΨΣΨ‖^(1/3)", Arity::Fixed(2), &[], Needs::Nothing, build_c37i),
        e("C3.7ii", "‖Ψ^(α)∘(Σ*)^(α)∘Ψ^(α)‖ ≤ … ≤ ‖ΨΣΨ‖^α",
            Arity::Fixed(2), &[H::AlphaAtLeastThird], Needs::Alpha, build_c37ii),
        e("T3.8i", "‖∘Ψ_j^(1/m)‖ ≤ r(∘Σ_j^(1/m))^(1/2) ≤ r(∘Ω_i^(1/m))^(1/2m) ≤ r(Σ_ν(1)⋯Σ_ν(m))^(1/2m)",
            Arity::M, &[H::MEven, H::NeedsTau, H::NeedsNu], Needs::Nothing, build_t38i),
        e("T3.8ii", "‖∘Ψ_j^(α)‖ ≤ r(∘Σ_j^(α))^(1/2) ≤ r(∘Ω_i^(α))^(1/2m) ≤ r(Σ_ν(1)⋯Σ_ν(m))^(α/2)",
            Arity::M, &[H::MEven, H::AlphaAtLeastInvM, H::NeedsTau, H::NeedsNu], Needs::Alpha, build_t38ii),
        e("T3.11", "‖∘Ψ_j^(α)‖ ≤ … ≤ r(∘Θ_i^(α))^(2/m) ≤ r(Ψ_τ(1)*Ψ_τ(2)⋯Ψ_τ(m-1)*Ψ_τ(m))^α",
            Arity::M, &[H::MEven, H::AlphaAtLeastTwoOverM, H::NeedsTau], Needs::Alpha, build_t311),
        e("T3.13i", "‖∘Ψ_j^(1/m)‖ ≤ r(∘(Ψ_τ(j)*Ψ_ν(j))^(1/m))^(1/2) ≤ r(∘Ω_j^(1/m))^(1/2m) ≤ r(Ψ_τ(1)*Ψ_ν(1)⋯)^(1/2m)",
            Arity::M, &[H::NeedsTau, H::NeedsNu], Needs::Nothing, build_t313i),
        e("T3.13ii", "‖∘Ψ_j^(α)‖ ≤ r(∘(Ψ_τ(j)*Ψ_ν(j))^(α))^(1/2) ≤ r(∘Ω_j^(α))^(1/2m) ≤ r(Ψ_τ(1)*Ψ_ν(1)⋯)^(α/2)",
            Arity::M, &[H::AlphaAtLeastInvM, H::NeedsTau, H::NeedsNu], Needs::Alpha, build_t313ii),
        e("C3.15i", "T3.13i with τ = (1,3,…,m,2,4,…), ν = (2,4,…,1,3,…,m); last term = r(Ψ_1Ψ_2*⋯Ψ_m*)^(1/2m)",
            Arity::M, &[H::MOdd], Needs::Nothing, build_c315i),
        e("C3.15ii", "T3.13ii with the same τ, ν; last term = r(Ψ_1Ψ_2*⋯Ψ_m*)^(α/2)",
            Arity::M, &[H::MOdd, H::AlphaAtLeastInvM], Needs::Alpha, build_c315ii),
        e("L3.16", "r(Ψ^(α)∘(Ψ*)^(α)) ≤ r(Ψ^(α)∘Ψ^(α)) ≤ r(Ψ)^(2α)",
            Arity::Fixed(1), &[H::AlphaAtLeastHalf], Needs::Alpha, build_l316),
        e("C3.17", "‖Ψ^(α)∘Σ^(α)‖ ≤ r((Ψ*Σ)^(α)∘(Σ*Ψ)^(α))^(1/2) ≤ r((Ψ*Σ)^(α)∘(Ψ*Σ)^(α))^(1/2) ≤ r(Ψ*Σ)^α",
            Arity::Fixed(2), &[H::AlphaAtLeastHalf], Needs::Alpha, build_c317),
    ]
}

pub fn find_entry(id: &str) -> Result<CatalogEntry> {
    list_entries().into_iter().find(|e| e.id == id).ok_or_else(|| Error::UnknownEntry(id.into()))
}

/// Which engine brackets r-values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    Standard,
    /// Exhaustive enumeration up to the given depth (test use).
    Oracle { depth: usize },
}

/// Bottom-up bracket evaluator with caches keyed by normal forms.
pub struct Evaluator<'a> {
    sets: &'a [OperatorSet],
    cfg: JsrConfig,
    engine: Engine,
    set_cache: HashMap<String, OperatorSet>,
    value_cache: HashMap<String, Bracket>,
}

impl<'a> Evaluator<'a> {
    pub fn new(sets: &'a [OperatorSet], cfg: JsrConfig) -> Self {
        Evaluator { sets, cfg, engine: Engine::Standard, set_cache: HashMap::new(), value_cache: HashMap::new() }
    }

    pub fn with_engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }

    /// Realize a set-valued expression.
    pub fn eval_set(&mut self, e: &Expr) -> Result<OperatorSet> {
        e.typecheck(self.sets.len())?;
        self.set_of(&normal_form(e))
    }

    fn set_of(&mut self, e: &Expr) -> Result<OperatorSet> {
        let key = e.to_string();
        if let Some(s) = self.set_cache.get(&key) {
            return Ok(s.clone());
        }
        let out = match e {
            Expr::Set(i) => self.sets[i - 1].dedup(),
            Expr::Adjoint(x) => adjoint_set(&self.set_of(x)?).dedup(),
            Expr::Product(xs) => {
                let mut acc = self.set_of(&xs[0])?;
                for x in &xs[1..] {
                    let next = self.set_of(x)?;
                    acc = set_product(&acc, &next)?;
                }
                acc
            }
            Expr::HadamardMean(xs, w) => {
                let parts = xs.iter().map(|x| self.set_of(x)).collect::<Result<Vec<_>>>()?;
                let refs: Vec<&OperatorSet> = parts.iter().collect();
                set_hadamard_mean(&refs, w)?
            }
            Expr::PowerN(x, n) => set_power(&self.set_of(x)?, *n)?,
            scalar => return Err(Error::IllTyped(format!("`{scalar}` is not a set"))),
        }
        .renamed(key.clone());
        self.set_cache.insert(key, out.clone());
        Ok(out)
    }

    /// Bracket a scalar expression; `loose` marks budget-limited parts.
    pub fn eval_scalar(&mut self, e: &Expr) -> Result<Bracket> {
        e.typecheck(self.sets.len())?;
        if e.is_set_valued() {
            return Err(Error::IllTyped(format!("`{e}` is a set, not a scalar")));
        }
        self.scalar_of(&normal_form(e))
    }

    fn scalar_of(&mut self, e: &Expr) -> Result<Bracket> {
        match e {
            Expr::RValue(kind, x) => {
                let rep = canonical_operand(*kind, x);
                let key = format!("{kind:?}[{rep}]");
                if let Some(b) = self.value_cache.get(&key) {
                    return Ok(*b);
                }
                let set = self.set_of(&rep)?;
                let b = match kind {
                    RKind::Norm => set_norm(&set),
                    RKind::GsrJsr => match self.engine {
                        Engine::Standard => jsr_bracket(&set, &self.cfg).bracket(),
                        Engine::Oracle { depth } => brute_force_oracle(&set, oracle_depth(set.len(), depth))?,
                    },
                };
                self.value_cache.insert(key, b);
                Ok(b)
            }
            Expr::ScalarPow(x, p) => Ok(self.scalar_of(x)?.powf(*p)),
            Expr::ScalarMul(xs) => {
                let mut acc = Bracket::point(1.0);
                for x in xs {
                    acc = acc.mul(&self.scalar_of(x)?);
                }
                Ok(acc)
            }
            set => Err(Error::IllTyped(format!("`{set}` is a set, not a scalar"))),
        }
    }

    /// Singleton member of a set expression (for pointwise claims).
    pub fn eval_matrix(&mut self, e: &Expr) -> Result<NonNegMatrix> {
        let s = self.eval_set(e)?;
        if s.len() != 1 {
            return Err(Error::IllTyped(format!("`{e}` has {} members, expected one", s.len())));
        }
        Ok(s.members()[0].clone())
    }
}

/// Largest depth `d ≤ max` whose exhaustive enumeration stays within the oracle cap.
pub fn oracle_depth(members: usize, max: usize) -> usize {
    let mut total = 0f64;
    let mut d = 0;
    while d < max {
        total += (members as f64).powi(d as i32 + 1);
        if total > ORACLE_CAP as f64 {
            break;
        }
        d += 1;
    }
    d.max(1)
}

/// Bracket of a scalar expression over `env`.
pub fn evaluate_expression(expr: &Expr, env: &[OperatorSet], cfg: &JsrConfig) -> Result<Bracket> {
    Evaluator::new(env, cfg.clone()).eval_scalar(expr)
}

/// Set sizes of the instance sets, for [`Expr::size_bound`].
pub fn claims_size_bound(claims: &Claims, sizes: &[usize]) -> f64 {
    let chain_terms = claims.chains.iter().flat_map(|c| c.terms.iter());
    let pointwise = claims.elementwise.iter().flat_map(|e| [&e.lhs, &e.rhs]);
    chain_terms.chain(pointwise).map(|t| t.size_bound(sizes)).fold(0.0, f64::max)
}
