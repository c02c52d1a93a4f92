//! Dense nonnegative matrices, Hadamard operations, and certified brackets
//! for the spectral radius and the spectral norm of a single matrix.

use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::bracket::{down, up, Bracket, STAGE_ULPS};
use crate::error::{Error, Result};

/// Default width requested from the spectral brackets.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Power-iteration budget per irreducible block.
pub const ITERATION_BUDGET: usize = 10_000;
/// Perturbation sizes for the fallback upper bound on stalled blocks.
const PERTURBATIONS: [f64; 3] = [1e-8, 1e-10, 1e-12];
/// Iterations without progress after which a block counts as stalled.
const STALL_LIMIT: usize = 64;

/// Square matrix with finite nonnegative entries, stored row-major.
#[derive(Clone, PartialEq)]
pub struct NonNegMatrix {
    dim: usize,
    data: Vec<f64>,
}

/// JSON form `{"dim": n, "rows": [[...], ...]}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixLiteral {
    dim: usize,
    rows: Vec<Vec<f64>>,
}

impl NonNegMatrix {
    /// Build from row-major data, validating every entry.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyMatrix);
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { left: dim * dim, right: data.len() });
        }
        let mut data = data;
        for (k, v) in data.iter_mut().enumerate() {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(Error::InvalidEntry { row: k / dim, col: k % dim, value: *v });
            }
            // fold -0.0 into +0.0 so bit patterns are canonical
            *v += 0.0;
        }
        Ok(NonNegMatrix { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::RaggedRow { row: i, len: r.len(), dim });
            }
            data.extend_from_slice(r);
        }
        NonNegMatrix::new(dim, data)
    }

    pub fn zeros(dim: usize) -> Self {
        NonNegMatrix { dim, data: vec![0.0; dim * dim] }
    }

    pub fn ones(dim: usize) -> Self {
        NonNegMatrix { dim, data: vec![1.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = NonNegMatrix::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn transpose(&self) -> NonNegMatrix {
        let n = self.dim;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j];
            }
        }
        NonNegMatrix { dim: n, data }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &v| m.max(v))
    }

    /// Multiply every entry by `s > 0`.
    pub fn scale(&self, s: f64) -> NonNegMatrix {
        assert!(s.is_finite() && s > 0.0);
        NonNegMatrix { dim: self.dim, data: self.data.iter().map(|v| v * s).collect() }
    }

    /// Entrywise sum.
    pub fn add(&self, other: &NonNegMatrix) -> Result<NonNegMatrix> {
        check_dims(self, other)?;
        Ok(NonNegMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    /// Bit pattern used for exact deduplication and canonical ordering.
    pub fn key(&self) -> Vec<u64> {
        self.data.iter().map(|v| v.to_bits()).collect()
    }

    /// Upper bound on the induced l1 norm (max column sum).
    pub fn norm_l1(&self) -> f64 {
        let n = self.dim;
        let mut best = 0.0f64;
        for j in 0..n {
            let s: f64 = (0..n).map(|i| self.data[i * n + j]).sum();
            best = best.max(s);
        }
        up(best, n as u32)
    }

    /// Upper bound on the induced l-infinity norm (max row sum).
    pub fn norm_linf(&self) -> f64 {
        let best = self.data.chunks(self.dim).map(|r| r.iter().sum::<f64>()).fold(0.0, f64::max);
        up(best, self.dim as u32)
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (yi, row) in y.iter_mut().zip(self.data.chunks(self.dim)) {
            *yi = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `y = A^T x`.
    pub fn tmul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut y = vec![0.0; n];
        for (i, row) in self.data.chunks(n).enumerate() {
            let xi = x[i];
            if xi != 0.0 {
                for (yj, a) in y.iter_mut().zip(row) {
                    *yj += a * xi;
                }
            }
        }
        y
    }

    fn principal(&self, idx: &[usize]) -> NonNegMatrix {
        let k = idx.len();
        let mut data = Vec::with_capacity(k * k);
        for &i in idx {
            for &j in idx {
                data.push(self.get(i, j));
            }
        }
        NonNegMatrix { dim: k, data }
    }
}

impl fmt::Debug for NonNegMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NonNegMatrix{:?}", self.rows())
    }
}

impl Serialize for NonNegMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixLiteral { dim: self.dim, rows: self.rows() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for NonNegMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let lit = MatrixLiteral::deserialize(d)?;
        if lit.rows.len() != lit.dim {
            return Err(serde::de::Error::custom(format!(
                "rows: {} rows but dim is {}",
                lit.rows.len(),
                lit.dim
            )));
        }
        NonNegMatrix::from_rows(&lit.rows).map_err(|e| serde::de::Error::custom(format!("rows: {e}")))
    }
}

fn check_dims(a: &NonNegMatrix, b: &NonNegMatrix) -> Result<()> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { left: a.dim, right: b.dim });
    }
    Ok(())
}

/// Entrywise product `a ∘ b`.
pub fn hadamard_product(a: &NonNegMatrix, b: &NonNegMatrix) -> Result<NonNegMatrix> {
    check_dims(a, b)?;
    Ok(NonNegMatrix { dim: a.dim, data: a.data.iter().zip(&b.data).map(|(x, y)| x * y).collect() })
}

fn pow_entry(v: f64, t: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else if t == 1.0 {
        v
    } else {
        v.powf(t)
    }
}

/// Entrywise power `a^(t)` with `0^t = 0`.
pub fn hadamard_power(a: &NonNegMatrix, t: f64) -> Result<NonNegMatrix> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::NonPositiveExponent(t));
    }
    let data: Vec<f64> = a.data.iter().map(|&v| pow_entry(v, t)).collect();
    NonNegMatrix::new(a.dim, data)
}

/// Weighted Hadamard geometric mean `mats[0]^(alphas[0]) ∘ ... ∘ mats[k]^(alphas[k])`.
pub fn weighted_hadamard_mean(mats: &[&NonNegMatrix], alphas: &[f64]) -> Result<NonNegMatrix> {
    if mats.len() != alphas.len() {
        return Err(Error::WeightCount { sets: mats.len(), weights: alphas.len() });
    }
    let first = mats.first().ok_or(Error::Missing("matrices for the Hadamard mean"))?;
    for (index, &value) in alphas.iter().enumerate() {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::NonPositiveWeight { index, value });
        }
    }
    for m in mats {
        check_dims(first, m)?;
    }
    let mut data = vec![1.0; first.data.len()];
    for (m, &t) in mats.iter().zip(alphas) {
        for (d, &v) in data.iter_mut().zip(&m.data) {
            *d *= pow_entry(v, t);
        }
    }
    NonNegMatrix::new(first.dim, data)
}

/// Ordinary matrix product `a b`.
pub fn mat_product(a: &NonNegMatrix, b: &NonNegMatrix) -> Result<NonNegMatrix> {
    check_dims(a, b)?;
    Ok(mul_unchecked(a, b))
}

pub(crate) fn mul_unchecked(a: &NonNegMatrix, b: &NonNegMatrix) -> NonNegMatrix {
    let n = a.dim;
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        let out = &mut data[i * n..(i + 1) * n];
        for k in 0..n {
            let aik = a.data[i * n + k];
            if aik != 0.0 {
                let brow = &b.data[k * n..(k + 1) * n];
                for (o, bkj) in out.iter_mut().zip(brow) {
                    *o += aik * bkj;
                }
            }
        }
    }
    NonNegMatrix { dim: n, data }
}

/// True iff `a[i,j] <= b[i,j] + slack` everywhere.
pub fn pointwise_leq(a: &NonNegMatrix, b: &NonNegMatrix, slack: f64) -> Result<bool> {
    check_dims(a, b)?;
    Ok(a.data.iter().zip(&b.data).all(|(x, y)| *x <= y + slack))
}

/// Certified bracket for the spectral radius of `a`.
///
/// The matrix is split into strongly connected components; each irreducible
/// diagonal block is bracketed by Collatz–Wielandt ratios along a shifted
/// power iteration, and the radius is the maximum over blocks.
pub fn spectral_radius_bracket(a: &NonNegMatrix, tol: f64) -> Bracket {
    assert!(tol > 0.0, "tol must be positive");
    if a.is_zero() {
        return Bracket::zero();
    }
    if a.dim == 1 {
        return Bracket::point(a.data[0]);
    }
    let mut out = Bracket::zero();
    for comp in components(a) {
        let b = if comp.len() == 1 {
            Bracket::point(a.get(comp[0], comp[0]))
        } else {
            irreducible_bracket(&a.principal(&comp), tol)
        };
        out = out.max(&b);
    }
    out
}

fn components(a: &NonNegMatrix) -> Vec<Vec<usize>> {
    let n = a.dim;
    let mut g = DiGraph::<(), ()>::with_capacity(n, n * n);
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            if i != j && a.get(i, j) > 0.0 {
                g.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|ix| ix.index()).collect();
            v.sort_unstable();
            v
        })
        .collect()
}

/// Collatz–Wielandt ratio bounds for a strictly positive `x`, widened outward.
fn cw_ratios(x: &[f64], y: &[f64], ulps: u32) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for (xi, yi) in x.iter().zip(y) {
        let r = yi / xi;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    (down(lo, ulps), up(hi, ulps))
}

struct PowerRun {
    lo: f64,
    hi: f64,
    converged: bool,
}

/// Shifted power iteration on an irreducible (or positive) matrix.
fn power_run(a: &NonNegMatrix, tol: f64, budget: usize) -> PowerRun {
    let n = a.dim;
    let ulps = n as u32 + STAGE_ULPS;
    let sums: Vec<f64> = a.data.chunks(n).map(|r| r.iter().sum()).collect();
    let shift = 0.5 * (sums.iter().cloned().fold(f64::INFINITY, f64::min) + sums.iter().cloned().fold(0.0, f64::max));
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    let mut best_lo = 0.0f64;
    let mut best_hi = f64::INFINITY;
    let mut stale = 0;
    for _ in 0..budget {
        a.mul_vec_into(&x, &mut y);
        let (lo, hi) = cw_ratios(&x, &y, ulps);
        let improved = lo > best_lo || hi < best_hi;
        best_lo = best_lo.max(lo);
        best_hi = best_hi.min(hi);
        if best_hi - best_lo <= tol * best_hi.max(1.0) {
            return PowerRun { lo: best_lo, hi: best_hi, converged: true };
        }
        if improved {
            stale = 0;
        } else {
            stale += 1;
            if stale > STALL_LIMIT {
                break;
            }
        }
        let mut mx = 0.0f64;
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi + shift * *xi;
            mx = mx.max(*xi);
        }
        for xi in x.iter_mut() {
            *xi = (*xi / mx).max(f64::MIN_POSITIVE);
        }
    }
    PowerRun { lo: best_lo, hi: best_hi, converged: false }
}

fn irreducible_bracket(a: &NonNegMatrix, tol: f64) -> Bracket {
    let run = power_run(a, tol, ITERATION_BUDGET);
    if run.converged {
        return Bracket::new(run.lo, run.hi);
    }
    let mut hi = run.hi;
    let scale = a.max_entry();
    for eps in PERTURBATIONS {
        let data: Vec<f64> = a.data.iter().map(|v| v + eps * scale).collect();
        let p = NonNegMatrix { dim: a.dim, data };
        let r = power_run(&p, tol, ITERATION_BUDGET);
        hi = hi.min(r.hi);
    }
    Bracket::new(run.lo, hi.max(run.lo)).with_loose(true)
}

/// Certified bracket for the l2-induced norm, `sqrt(rho(a^T a))`.
pub fn spectral_norm_bracket(a: &NonNegMatrix, tol: f64) -> Bracket {
    if a.is_zero() {
        return Bracket::zero();
    }
    let ata = mul_unchecked(&a.transpose(), a);
    spectral_radius_bracket(&ata, tol).widen(a.dim as u32 + 1).sqrt()
}

/// Cheap valid lower bound on the spectral radius from a few power steps.
///
/// Uses `rho(A) >= min over supp(x) of (Ax)_i / x_i` for any nonzero `x >= 0`.
pub fn rho_lower_quick(a: &NonNegMatrix, iters: usize) -> f64 {
    let n = a.dim;
    let ulps = n as u32 + STAGE_ULPS;
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    let mut best = 0.0f64;
    for _ in 0..iters.max(1) {
        a.mul_vec_into(&x, &mut y);
        let mut lo = f64::INFINITY;
        let mut mx = 0.0f64;
        for (xi, yi) in x.iter().zip(&y) {
            if *xi > 0.0 {
                lo = lo.min(yi / xi);
            }
            mx = mx.max(*yi);
        }
        if lo.is_finite() {
            best = best.max(down(lo, ulps));
        }
        if mx == 0.0 {
            break;
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / mx;
        }
    }
    best
}

/// Approximate right Perron vector, strictly positive and max-normalized.
pub fn perron_vector(a: &NonNegMatrix, iters: usize) -> Vec<f64> {
    let n = a.dim;
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    for _ in 0..iters {
        a.mul_vec_into(&x, &mut y);
        let mx = y.iter().cloned().fold(0.0, f64::max);
        if mx == 0.0 {
            break;
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = 0.5 * (*xi + yi / mx);
        }
    }
    let mx = x.iter().cloned().fold(0.0, f64::max);
    x.iter().map(|v| (v / mx).max(1e-12)).collect()
}
