//! Generalized and joint spectral radius brackets for finite operator sets.
//!
//! The lower side enumerates deduplicated product sets level by level and
//! bounds spectral radii from below. The upper side runs a branch-and-bound
//! tree over product prefixes for one or more induced norms: a prefix whose
//! normalized norm is already within the target width of the lower bound
//! becomes a leaf, and the maximum over the leaves of a complete tree is a
//! valid upper bound by submultiplicativity. When the trees stay wide, a
//! downward-closed polytope in the nonnegative cone that every member maps
//! into a scaled copy of itself gives a further upper bound.

use serde::{Deserialize, Serialize};

use crate::bracket::{down, up, Bracket, STAGE_ULPS};
use crate::error::{Error, Result};
use crate::numat::{
    mul_unchecked, perron_vector, rho_lower_quick, spectral_norm_bracket, spectral_radius_bracket, NonNegMatrix,
};
use crate::setalg::OperatorSet;
use microlp::{ComparisonOp, OptimizationDirection, Problem};

/// Width requested from single-matrix brackets inside the engines.
pub const SPECTRAL_TOL: f64 = 1e-12;
/// Hard cap on the number of products enumerated by the brute-force oracle.
pub const ORACLE_CAP: u64 = 10_000_000;
const LEVEL_CAP: usize = 20_000;
const QUICK_ITERS: usize = 12;
const CANDIDATES: usize = 16;
const DOMINANCE_CAP: usize = 4096;
const POLYTOPE_VERTICES: usize = 256;
const POLYTOPE_SLACK: f64 = 1e-9;
const POLYTOPE_STEPS: [f64; 4] = [1e-6, 0.25, 1.0, 4.0];
const POLYTOPE_BUDGET_DIV: u64 = 64;
const POLYTOPE_TIGHT: f64 = 1e-9;

/// Induced norm used by the plain upper bound and the first refinement tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    L2,
    L1,
    Linf,
}

impl std::str::FromStr for NormKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l2" => Ok(NormKind::L2),
            "l1" => Ok(NormKind::L1),
            "linf" => Ok(NormKind::Linf),
            other => Err(Error::InvalidParam(format!("norm `{other}` (expected l2, l1 or linf)"))),
        }
    }
}

/// Engine configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsrConfig {
    pub max_depth: usize,
    /// Relative width at which branches stop being refined.
    pub target_width: f64,
    pub norm_kind: NormKind,
    pub budget_products: u64,
    pub refine: bool,
    /// Width requested from single-matrix spectral brackets.
    pub spectral_tol: f64,
}

impl Default for JsrConfig {
    fn default() -> Self {
        JsrConfig {
            max_depth: 10,
            target_width: 1e-3,
            norm_kind: NormKind::L2,
            budget_products: 2_000_000,
            refine: true,
            spectral_tol: SPECTRAL_TOL,
        }
    }
}

impl JsrConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth == 0 {
            return Err(Error::InvalidParam("max_depth must be at least 1".into()));
        }
        if !(self.target_width > 0.0 && self.target_width.is_finite()) {
            return Err(Error::InvalidParam("target_width must be positive".into()));
        }
        if self.budget_products == 0 {
            return Err(Error::InvalidParam("budget_products must be positive".into()));
        }
        if !(self.spectral_tol > 0.0) {
            return Err(Error::InvalidParam("spectral_tol must be positive".into()));
        }
        Ok(())
    }
}

/// A one-sided bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bound {
    pub value: f64,
    pub partial: bool,
    pub depth_used: usize,
}

/// Bracket for the joint (equivalently generalized) spectral radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JsrResult {
    pub lo: f64,
    pub hi: f64,
    pub partial: bool,
    pub depth_used: usize,
    #[serde(skip)]
    pub products: u64,
}

impl JsrResult {
    pub fn bracket(&self) -> Bracket {
        Bracket::new(self.lo, self.hi).with_loose(self.partial)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

struct Budget {
    remaining: u64,
    spent: u64,
}

impl Budget {
    fn new(total: u64) -> Self {
        Budget { remaining: total, spent: 0 }
    }

    fn take(&mut self, k: u64) -> bool {
        if self.remaining < k {
            return false;
        }
        self.remaining -= k;
        self.spent += k;
        true
    }

    fn can_take(&self, k: u64) -> bool {
        self.remaining >= k
    }
}

/// `d`-th root of a bound computed from a length-`d` product of `n x n` matrices,
/// widened by the rounding of the product itself.
fn root_down(x: f64, d: usize, n: usize) -> f64 {
    if d == 1 {
        x
    } else {
        down(down(x, ((d - 1) * n) as u32).powf(1.0 / d as f64), STAGE_ULPS)
    }
}

fn root_up(x: f64, d: usize, n: usize) -> f64 {
    if d == 1 {
        x
    } else {
        up(up(x, ((d - 1) * n) as u32).powf(1.0 / d as f64), STAGE_ULPS)
    }
}

/// Nonzero distinct members rescaled by an exact power of two.
struct Prepared {
    mats: Vec<NonNegMatrix>,
    /// Results on `mats` are multiplied by this to return to the input scale.
    unscale: f64,
}

/// Drops members that are entrywise below another member; they never raise
/// the spectral radius of any product.
fn drop_dominated(mats: Vec<NonNegMatrix>) -> Vec<NonNegMatrix> {
    if mats.len() > DOMINANCE_CAP {
        return mats;
    }
    let below = |a: &NonNegMatrix, b: &NonNegMatrix| a.entries().iter().zip(b.entries()).all(|(x, y)| x <= y);
    let keep: Vec<bool> = (0..mats.len())
        .map(|i| !(0..mats.len()).any(|j| j != i && below(&mats[i], &mats[j]) && (!below(&mats[j], &mats[i]) || j < i)))
        .collect();
    mats.into_iter().zip(keep).filter_map(|(m, k)| k.then_some(m)).collect()
}

fn prepare(sigma: &OperatorSet) -> Option<Prepared> {
    let mats: Vec<NonNegMatrix> =
        drop_dominated(sigma.dedup().members().iter().filter(|m| !m.is_zero()).cloned().collect());
    if mats.is_empty() {
        return None;
    }
    let max_norm = mats.iter().map(|m| m.norm_linf()).fold(0.0, f64::max);
    let min_entry =
        mats.iter().flat_map(|m| m.entries().iter().copied()).filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
    let e = max_norm.log2().ceil() as i32;
    let s = 2f64.powi(-e);
    if s.is_finite() && s > 0.0 && min_entry * s >= f64::MIN_POSITIVE && (max_norm * s).is_finite() {
        Some(Prepared { mats: mats.iter().map(|m| m.scale(s)).collect(), unscale: 2f64.powi(e) })
    } else {
        Some(Prepared { mats, unscale: 1.0 })
    }
}

struct Candidate {
    value: f64,
    product: NonNegMatrix,
    depth: usize,
}

struct LowerOut {
    value: f64,
    best: Vec<Candidate>,
    partial: bool,
    depth: usize,
}

fn insert_candidate(best: &mut Vec<Candidate>, c: Candidate) {
    if best.len() == CANDIDATES && best.last().is_some_and(|b| b.value >= c.value) {
        return;
    }
    let pos = best.iter().position(|b| b.value < c.value).unwrap_or(best.len());
    best.insert(pos, c);
    best.truncate(CANDIDATES);
}

fn lower_search(mats: &[NonNegMatrix], depth: usize, budget: &mut Budget, spectral_tol: f64) -> LowerOut {
    let mut level = OperatorSet::new("L", mats.to_vec()).expect("nonempty").dedup();
    let mut value = 0.0f64;
    let mut best: Vec<Candidate> = Vec::new();
    let mut partial = false;
    let mut reached = 0;
    for d in 1..=depth {
        reached = d;
        let mut here: Vec<Candidate> = Vec::new();
        for p in level.members() {
            let v = if d == 1 {
                root_down(spectral_radius_bracket(p, spectral_tol).lo, 1, p.dim())
            } else {
                root_down(rho_lower_quick(p, QUICK_ITERS), d, p.dim())
            };
            value = value.max(v);
            insert_candidate(&mut here, Candidate { value: v, product: p.clone(), depth: d });
        }
        for c in here.into_iter().take(2) {
            insert_candidate(&mut best, c);
        }
        if d == depth {
            break;
        }
        let next = level.len() * mats.len();
        if next > LEVEL_CAP || !budget.take(next as u64) {
            partial = true;
            break;
        }
        let prods: Vec<NonNegMatrix> =
            level.members().iter().flat_map(|p| mats.iter().map(move |a| mul_unchecked(p, a))).collect();
        let level_set = OperatorSet::new("L", prods).expect("nonempty").dedup();
        level = OperatorSet::new("L", drop_dominated(level_set.members().to_vec())).expect("nonempty");
    }
    for c in best.iter_mut() {
        let r = spectral_radius_bracket(&c.product, spectral_tol);
        c.value = c.value.max(root_down(r.lo, c.depth, c.product.dim()));
        value = value.max(c.value);
    }
    best.sort_by(|a, b| b.value.total_cmp(&a.value));
    LowerOut { value, best, partial, depth: reached }
}

/// Induced norms available to the refinement trees.
#[derive(Clone, Debug)]
enum NodeNorm {
    L2,
    L1,
    Linf,
    /// `||x|| = max_i |x_i| / v_i`.
    WeightedInf(Vec<f64>),
    /// `||x|| = sum_i w_i |x_i|`.
    WeightedOne(Vec<f64>),
}

impl NodeNorm {
    fn from_kind(k: NormKind) -> Self {
        match k {
            NormKind::L2 => NodeNorm::L2,
            NormKind::L1 => NodeNorm::L1,
            NormKind::Linf => NodeNorm::Linf,
        }
    }

    /// Upper bound on the induced norm of `p`; `precise` requests the tight l2 bracket.
    fn bound(&self, p: &NonNegMatrix, precise: bool, target: f64) -> f64 {
        let n = p.dim();
        match self {
            NodeNorm::L1 => p.norm_l1(),
            NodeNorm::Linf => p.norm_linf(),
            NodeNorm::L2 => {
                let cheap = up((p.norm_l1() * p.norm_linf()).sqrt(), 2);
                if cheap <= target && !precise {
                    cheap
                } else {
                    cheap.min(spectral_norm_bracket(p, SPECTRAL_TOL).hi)
                }
            }
            NodeNorm::WeightedInf(v) => {
                let y = p.mul_vec(v);
                let r = y.iter().zip(v).map(|(a, b)| a / b).fold(0.0, f64::max);
                up(r, n as u32 + STAGE_ULPS)
            }
            NodeNorm::WeightedOne(w) => {
                let y = p.tmul_vec(w);
                let r = y.iter().zip(w).map(|(a, b)| a / b).fold(0.0, f64::max);
                up(r, n as u32 + STAGE_ULPS)
            }
        }
    }
}

struct TreeOut {
    upper: f64,
    partial: bool,
    depth: usize,
}

/// Branch-and-bound over product prefixes; `None` when the tree cannot beat `abort_above`.
fn tree_upper(
    mats: &[NonNegMatrix],
    norm: &NodeNorm,
    lo: &mut f64,
    cfg: &JsrConfig,
    budget: &mut Budget,
    abort_above: f64,
) -> Option<TreeOut> {
    let mut stack: Vec<(NonNegMatrix, usize)> = mats.iter().rev().map(|m| (m.clone(), 1)).collect();
    let mut upper = 0.0f64;
    let mut partial = false;
    let mut depth = 1;
    while let Some((p, d)) = stack.pop() {
        depth = depth.max(d);
        let thr = *lo * (1.0 + cfg.target_width);
        let out_of_budget = !budget.can_take(mats.len() as u64);
        let leaf_forced = d >= cfg.max_depth || out_of_budget;
        let target = thr.powi(d as i32);
        let val = root_up(norm.bound(&p, leaf_forced, target), d, p.dim());
        if d > 1 {
            let q = root_down(rho_lower_quick(&p, 4), d, p.dim());
            if q > *lo {
                *lo = q;
            }
        }
        if val <= thr || leaf_forced {
            if out_of_budget && val > thr {
                partial = true;
            }
            upper = upper.max(val);
            if upper >= abort_above {
                return None;
            }
            continue;
        }
        budget.take(mats.len() as u64);
        for a in mats.iter().rev() {
            stack.push((mul_unchecked(&p, a), d + 1));
        }
    }
    Some(TreeOut { upper, partial, depth })
}

/// Smallest total weight `mu >= 0` with `sum_k mu_k v_k >= w`, with the weights.
fn cover_weights(verts: &[Vec<f64>], w: &[f64]) -> Option<(f64, Vec<f64>)> {
    let mut best: Option<(f64, usize)> = None;
    for (k, v) in verts.iter().enumerate() {
        let t = w.iter().zip(v).map(|(a, b)| if *a == 0.0 { 0.0 } else { a / b }).fold(0.0, f64::max);
        if t.is_finite() && best.is_none_or(|(b, _)| t < b) {
            best = Some((t, k));
        }
    }
    if let Some((t, k)) = best {
        if t <= 1.0 {
            let mut mu = vec![0.0; verts.len()];
            mu[k] = t;
            return Some((t, mu));
        }
    }
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = verts.iter().map(|_| lp.add_var(1.0, (0.0, f64::INFINITY))).collect();
    for (r, &wr) in w.iter().enumerate() {
        let row: Vec<_> = vars.iter().zip(verts).map(|(&x, v)| (x, v[r])).collect();
        lp.add_constraint(row.as_slice(), ComparisonOp::Ge, wr);
    }
    let outcome = lp.solve().ok()?;
    let sol = outcome.solution()?;
    let mu: Vec<f64> = vars.iter().map(|&x| sol.var_value(x).max(0.0)).collect();
    Some((mu.iter().sum(), mu))
}

/// Upper bound from a downward-closed polytope kept invariant by every `A / lambda`.
fn polytope_upper(mats: &[NonNegMatrix], seeds: Vec<Vec<f64>>, lambda: f64, budget: &mut Budget) -> Option<f64> {
    let n = mats[0].dim();
    let mut verts: Vec<Vec<f64>> = Vec::new();
    for v in seeds {
        if cover_weights(&verts, &v).is_none_or(|(t, _)| t > 1.0) {
            verts.push(v);
        }
    }
    let mut next = 0;
    while next < verts.len() {
        let v = verts[next].clone();
        next += 1;
        for a in mats {
            if !budget.take(1) || verts.len() > POLYTOPE_VERTICES {
                return None;
            }
            let w: Vec<f64> = a.mul_vec(&v).iter().map(|x| x / lambda).collect();
            if cover_weights(&verts, &w).is_none_or(|(t, _)| t > 1.0 + POLYTOPE_SLACK) {
                verts.push(w);
            }
        }
    }
    if (0..n).any(|r| verts.iter().all(|v| v[r] <= 0.0)) {
        return None;
    }
    let mut factor = 0.0f64;
    for v in &verts {
        for a in mats {
            let av: Vec<f64> = a.mul_vec(v).iter().map(|x| up(*x, n as u32 + STAGE_ULPS)).collect();
            let (_, mu) = cover_weights(&verts, &av)?;
            let total = up(mu.iter().sum::<f64>(), verts.len() as u32 + STAGE_ULPS);
            let mut t = 0.0f64;
            for (r, &num) in av.iter().enumerate() {
                let den = down(mu.iter().zip(&verts).map(|(m, u)| m * u[r]).sum::<f64>(), verts.len() as u32 + STAGE_ULPS);
                if num > 0.0 {
                    if den <= 0.0 {
                        return None;
                    }
                    t = t.max(up(num / den, 1));
                }
            }
            factor = factor.max(up(t * total, 1));
        }
    }
    Some(factor)
}

fn polytope_seeds(mats: &[NonNegMatrix], best: &[Candidate]) -> Vec<Vec<f64>> {
    let unit = |v: Vec<f64>| {
        let mx = v.iter().cloned().fold(0.0, f64::max);
        v.into_iter().map(|x| x / mx).collect::<Vec<f64>>()
    };
    let mut seeds: Vec<Vec<f64>> = best.iter().take(2).map(|c| unit(perron_vector(&c.product, 500))).collect();
    seeds.push(max_eigvec(mats, false).iter().map(|x| x * 1e-2).collect());
    seeds
}

/// Vector `v > 0` approximately solving `max_A (A v) = lambda v`.
fn max_eigvec(mats: &[NonNegMatrix], transpose: bool) -> Vec<f64> {
    let n = mats[0].dim();
    let mut x = vec![1.0; n];
    for _ in 0..200 {
        let mut y = vec![0.0f64; n];
        for a in mats {
            let z = if transpose { a.tmul_vec(&x) } else { a.mul_vec(&x) };
            for (yi, zi) in y.iter_mut().zip(z) {
                *yi = yi.max(zi);
            }
        }
        let mx = y.iter().cloned().fold(0.0, f64::max);
        if mx == 0.0 {
            break;
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = 0.5 * (*xi + yi / mx);
        }
    }
    let mx = x.iter().cloned().fold(0.0, f64::max);
    x.iter().map(|v| (v / mx).max(1e-9)).collect()
}

fn candidate_norms(mats: &[NonNegMatrix], cfg: &JsrConfig, best: &[Candidate]) -> Vec<NodeNorm> {
    let mut norms = vec![NodeNorm::from_kind(cfg.norm_kind)];
    if !cfg.refine {
        return norms;
    }
    if let Some(c) = best.first() {
        norms.push(NodeNorm::WeightedInf(perron_vector(&c.product, 500)));
        norms.push(NodeNorm::WeightedOne(perron_vector(&c.product.transpose(), 500)));
    }
    norms.push(NodeNorm::WeightedInf(max_eigvec(mats, false)));
    norms.push(NodeNorm::WeightedOne(max_eigvec(mats, true)));
    norms
}

fn plain_upper(mats: &[NonNegMatrix], norm: &NodeNorm, depth: usize, budget: &mut Budget) -> Bound {
    let mut best = f64::INFINITY;
    let mut level: Vec<NonNegMatrix> = mats.to_vec();
    let mut partial = false;
    let mut reached = 0;
    for d in 1..=depth {
        reached = d;
        let m = level.iter().map(|p| norm.bound(p, true, 0.0)).fold(0.0, f64::max);
        best = best.min(root_up(m, d, mats[0].dim()));
        if d == depth {
            break;
        }
        let next = level.len() * mats.len();
        if next > LEVEL_CAP || !budget.take(next as u64) {
            partial = true;
            break;
        }
        level = level.iter().flat_map(|p| mats.iter().map(move |a| mul_unchecked(p, a))).collect();
    }
    Bound { value: best, partial, depth_used: reached }
}

/// Lower bound for the generalized spectral radius from products up to `depth`.
pub fn gsr_lower(sigma: &OperatorSet, depth: usize) -> Bound {
    assert!(depth >= 1, "depth must be at least 1");
    let Some(p) = prepare(sigma) else {
        return Bound { value: 0.0, partial: false, depth_used: depth };
    };
    let mut budget = Budget::new(JsrConfig::default().budget_products);
    let out = lower_search(&p.mats, depth, &mut budget, SPECTRAL_TOL);
    Bound { value: down(out.value * p.unscale, 1), partial: out.partial, depth_used: out.depth }
}

/// Upper bound for the joint spectral radius.
pub fn jsr_upper(sigma: &OperatorSet, cfg: &JsrConfig) -> Bound {
    let r = jsr_bracket(sigma, cfg);
    Bound { value: r.hi, partial: r.partial, depth_used: r.depth_used }
}

/// Certified bracket for the joint spectral radius (equal to the generalized
/// spectral radius for finite sets).
pub fn jsr_bracket(sigma: &OperatorSet, cfg: &JsrConfig) -> JsrResult {
    let Some(p) = prepare(sigma) else {
        return JsrResult { lo: 0.0, hi: 0.0, partial: false, depth_used: 1, products: 0 };
    };
    if p.mats.len() == 1 {
        let b = spectral_radius_bracket(&p.mats[0], cfg.spectral_tol).scale(p.unscale);
        return JsrResult { lo: b.lo, hi: b.hi, partial: b.loose, depth_used: 1, products: 0 };
    }
    let mut budget = Budget::new(cfg.budget_products);
    let mut lower_budget = Budget::new(cfg.budget_products / 4);
    let low = lower_search(&p.mats, cfg.max_depth, &mut lower_budget, cfg.spectral_tol);
    budget.take(lower_budget.spent.min(budget.remaining));
    let mut lo = low.value;
    let mut depth_used = low.depth;

    let norms = candidate_norms(&p.mats, cfg, &low.best);
    let mut hi = f64::INFINITY;
    let mut partial = true;
    if cfg.refine {
        let mut order: Vec<(f64, usize)> = norms
            .iter()
            .enumerate()
            .map(|(i, n)| (p.mats.iter().map(|m| n.bound(m, false, 0.0)).fold(0.0, f64::max), i))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let count = order.len() as u64;
        for (k, &(_, i)) in order.iter().enumerate() {
            if hi <= lo * (1.0 + cfg.target_width) {
                break;
            }
            let share = budget.remaining / (count - k as u64);
            let mut tree_budget = Budget::new(share);
            let out = tree_upper(&p.mats, &norms[i], &mut lo, cfg, &mut tree_budget, hi);
            budget.take(tree_budget.spent.min(budget.remaining));
            if let Some(t) = out {
                depth_used = depth_used.max(t.depth);
                if t.upper < hi || (t.upper == hi && !t.partial) {
                    hi = t.upper;
                    partial = t.partial;
                }
            }
        }
        if hi > lo * (1.0 + POLYTOPE_TIGHT) {
            let seeds = polytope_seeds(&p.mats, &low.best);
            let mut poly_budget = Budget::new(cfg.budget_products / POLYTOPE_BUDGET_DIV);
            for f in POLYTOPE_STEPS {
                let lambda = lo * (1.0 + cfg.target_width * f);
                if lambda >= hi {
                    break;
                }
                if let Some(b) = polytope_upper(&p.mats, seeds.clone(), lambda, &mut poly_budget) {
                    hi = hi.min(b);
                    break;
                }
            }
        }
    } else {
        let b = plain_upper(&p.mats, &norms[0], cfg.max_depth, &mut budget);
        hi = b.value;
        partial = b.partial || low.partial;
        depth_used = depth_used.max(b.depth_used);
    }
    if hi <= lo * (1.0 + cfg.target_width) {
        partial = false;
    }
    let hi = hi.max(lo);
    JsrResult {
        lo: down(lo * p.unscale, 1),
        hi: up(hi * p.unscale, 1),
        partial,
        depth_used,
        products: budget.spent + lower_budget.spent,
    }
}

/// Bracket for the maximum l2 norm over the members of `psi`.
pub fn set_norm(psi: &OperatorSet) -> Bracket {
    psi.members().iter().map(|m| spectral_norm_bracket(m, SPECTRAL_TOL)).fold(Bracket::zero(), |a, b| a.max(&b))
}

/// Exhaustive bracket over all products up to `depth`, without deduplication,
/// scaling, or pruning.
pub fn brute_force_oracle(sigma: &OperatorSet, depth: usize) -> Result<Bracket> {
    if depth == 0 {
        return Err(Error::InvalidParam("oracle depth must be at least 1".into()));
    }
    let k = sigma.len() as u64;
    let mut total: u64 = 0;
    let mut layer: u64 = 1;
    for _ in 0..depth {
        layer = layer.saturating_mul(k);
        total = total.saturating_add(layer);
    }
    if total > ORACLE_CAP {
        return Err(Error::Budget(format!("oracle would enumerate {total} products (cap {ORACLE_CAP})")));
    }
    let mats = sigma.members();
    let mut lo = 0.0f64;
    let mut hi_by_len = vec![0.0f64; depth + 1];
    let mut stack: Vec<(NonNegMatrix, usize)> = mats.iter().map(|m| (m.clone(), 1)).collect();
    while let Some((p, d)) = stack.pop() {
        let r = spectral_radius_bracket(&p, SPECTRAL_TOL);
        lo = lo.max(root_down(r.lo, d, p.dim()));
        let nb = spectral_norm_bracket(&p, SPECTRAL_TOL);
        hi_by_len[d] = hi_by_len[d].max(nb.hi);
        if d < depth {
            for a in mats {
                stack.push((mul_unchecked(&p, a), d + 1));
            }
        }
    }
    let hi = (1..=depth).map(|d| root_up(hi_by_len[d], d, mats[0].dim())).fold(f64::INFINITY, f64::min);
    Ok(Bracket::new(lo, hi.max(lo)))
}
