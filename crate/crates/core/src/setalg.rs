//! Finite operator sets: products, powers, adjoints, Hadamard means, and the
//! symbolic word constructions built from a base word and its rotations.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numat::{mul_unchecked, weighted_hadamard_mean, NonNegMatrix};

/// Hard cap on the number of raw products formed by one set operation.
pub const SET_SIZE_CAP: usize = 200_000;

/// Finite nonempty set of equal-dimension nonnegative matrices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatorSet {
    pub name: String,
    #[serde(rename = "matrices")]
    mats: Vec<NonNegMatrix>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SetLiteral {
    name: String,
    matrices: Vec<NonNegMatrix>,
}

impl<'de> Deserialize<'de> for OperatorSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let lit = SetLiteral::deserialize(d)?;
        OperatorSet::new(lit.name, lit.matrices).map_err(serde::de::Error::custom)
    }
}

impl OperatorSet {
    pub fn new(name: impl Into<String>, mats: Vec<NonNegMatrix>) -> Result<Self> {
        let name = name.into();
        let first = mats.first().ok_or_else(|| Error::EmptySet(name.clone()))?;
        for m in &mats {
            if m.dim() != first.dim() {
                return Err(Error::DimensionMismatch { left: first.dim(), right: m.dim() });
            }
        }
        Ok(OperatorSet { name, mats })
    }

    pub fn singleton(name: impl Into<String>, m: NonNegMatrix) -> Self {
        OperatorSet { name: name.into(), mats: vec![m] }
    }

    pub fn dim(&self) -> usize {
        self.mats[0].dim()
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn members(&self) -> &[NonNegMatrix] {
        &self.mats
    }

    /// Remove exact duplicates; members come out in canonical bit order.
    pub fn dedup(&self) -> OperatorSet {
        dedup_named(self.name.clone(), self.mats.iter().cloned())
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

fn dedup_named(name: String, mats: impl IntoIterator<Item = NonNegMatrix>) -> OperatorSet {
    let map: BTreeMap<Vec<u64>, NonNegMatrix> = mats.into_iter().map(|m| (m.key(), m)).collect();
    OperatorSet { name, mats: map.into_values().collect() }
}

fn check_set_dims(a: &OperatorSet, b: &OperatorSet) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    Ok(())
}

fn check_cap(count: usize, what: &str) -> Result<()> {
    if count > SET_SIZE_CAP {
        return Err(Error::Budget(format!("{what} would form {count} products (cap {SET_SIZE_CAP})")));
    }
    Ok(())
}

/// `{AB : A in phi, B in psi}`, deduplicated.
pub fn set_product(phi: &OperatorSet, psi: &OperatorSet) -> Result<OperatorSet> {
    check_set_dims(phi, psi)?;
    check_cap(phi.len().saturating_mul(psi.len()), "set product")?;
    let prods = phi.mats.iter().cartesian_product(&psi.mats).map(|(a, b)| mul_unchecked(a, b));
    Ok(dedup_named(format!("{}{}", phi.name, psi.name), prods))
}

/// All length-`m` products of members of `psi`, deduplicated level by level.
pub fn set_power(psi: &OperatorSet, m: usize) -> Result<OperatorSet> {
    if m == 0 {
        return Err(Error::InvalidParam("set power exponent must be at least 1".into()));
    }
    let mut acc = psi.dedup();
    for _ in 1..m {
        acc = set_product(&acc, psi)?;
    }
    Ok(acc.renamed(format!("({})^{m}", psi.name)))
}

/// Transposes of all members.
pub fn adjoint_set(psi: &OperatorSet) -> OperatorSet {
    OperatorSet { name: format!("{}*", psi.name), mats: psi.mats.iter().map(|m| m.transpose()).collect() }
}

/// Weighted Hadamard mean over independent choices from each set.
pub fn set_hadamard_mean(sets: &[&OperatorSet], alphas: &[f64]) -> Result<OperatorSet> {
    if sets.len() != alphas.len() {
        return Err(Error::WeightCount { sets: sets.len(), weights: alphas.len() });
    }
    let first = sets.first().ok_or(Error::Missing("sets for the Hadamard mean"))?;
    for s in sets {
        check_set_dims(first, s)?;
    }
    let count = sets.iter().try_fold(1usize, |acc, s| acc.checked_mul(s.len())).unwrap_or(usize::MAX);
    check_cap(count, "Hadamard mean")?;
    let mut out = Vec::with_capacity(count);
    for choice in sets.iter().map(|s| s.mats.iter()).multi_cartesian_product() {
        out.push(weighted_hadamard_mean(&choice, alphas)?);
    }
    if sets.len() == 1 {
        // multi_cartesian_product over one iterator yields one-element choices
        debug_assert_eq!(out.len(), first.len());
    }
    let name = sets.iter().map(|s| s.name.as_str()).join("∘");
    Ok(dedup_named(format!("mean({name})"), out))
}

/// Bijection of `{1..m}` given by its 1-based image list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    images: Vec<usize>,
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(images: Vec<usize>) -> Result<Self> {
        Permutation::new(images)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.images
    }
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let mut sorted = images.clone();
        sorted.sort_unstable();
        if images.is_empty() || sorted.iter().enumerate().any(|(i, &v)| v != i + 1) {
            return Err(Error::InvalidPermutation(images));
        }
        Ok(Permutation { images })
    }

    pub fn identity(m: usize) -> Self {
        Permutation { images: (1..=m).collect() }
    }

    pub fn m(&self) -> usize {
        self.images.len()
    }

    /// Image of `j` (1-based).
    pub fn apply(&self, j: usize) -> usize {
        self.images[j - 1]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }
}

/// One factor of a word: set `set` (1-based), transposed when `adjoint`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub set: usize,
    pub adjoint: bool,
}

impl Letter {
    pub fn plain(set: usize) -> Self {
        Letter { set, adjoint: false }
    }

    pub fn star(set: usize) -> Self {
        Letter { set, adjoint: true }
    }
}

/// Symbolic product of sets such as `Ψ1Ψ2*Ψ3`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn new(letters: Vec<Letter>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidParam("empty word".into()));
        }
        if let Some(l) = letters.iter().find(|l| l.set == 0) {
            return Err(Error::SetIndex { index: l.set, arity: 0 });
        }
        Ok(Word { letters })
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        Word { letters: self.letters.iter().chain(&other.letters).copied().collect() }
    }

    /// The word of the transposed product: reversed with flipped flags.
    pub fn adjoint(&self) -> Word {
        Word { letters: self.letters.iter().rev().map(|l| Letter { set: l.set, adjoint: !l.adjoint }).collect() }
    }

    /// Representative shared by all rotations of the word and of its adjoint.
    pub fn canonical(&self) -> Word {
        let adj = self.adjoint();
        (0..self.len())
            .flat_map(|k| [rotate_word(self, k), rotate_word(&adj, k)])
            .min()
            .expect("nonempty word")
    }

    pub fn max_set(&self) -> usize {
        self.letters.iter().map(|l| l.set).max().unwrap_or(0)
    }

    /// Evaluate against `sets` (index 1 is `sets[0]`).
    pub fn evaluate(&self, sets: &[OperatorSet]) -> Result<OperatorSet> {
        let pick = |l: &Letter| -> Result<OperatorSet> {
            let s = sets.get(l.set - 1).ok_or(Error::SetIndex { index: l.set, arity: sets.len() })?;
            Ok(if l.adjoint { adjoint_set(s) } else { s.clone() })
        };
        let mut acc = pick(&self.letters[0])?.dedup();
        for l in &self.letters[1..] {
            acc = set_product(&acc, &pick(l)?)?;
        }
        Ok(acc.renamed(self.to_string()))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "Ψ{}{}", l.set, if l.adjoint { "*" } else { "" })?;
        }
        Ok(())
    }
}

/// Cyclic left rotation by `offset` letters (taken modulo the length).
pub fn rotate_word(w: &Word, offset: usize) -> Word {
    let k = offset % w.len();
    let mut letters = w.letters[k..].to_vec();
    letters.extend_from_slice(&w.letters[..k]);
    Word { letters }
}

/// Named constructions of derived set families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstructionKind {
    CyclicSigma,
    PhiCyclic,
    OmegaOdd,
    SigmaEven,
    OmegaEven,
    ThetaHalf,
    OmegaTauNu,
    InterleavedPerms,
}

impl ConstructionKind {
    pub const ALL: [ConstructionKind; 8] = [
        ConstructionKind::CyclicSigma,
        ConstructionKind::PhiCyclic,
        ConstructionKind::OmegaOdd,
        ConstructionKind::SigmaEven,
        ConstructionKind::OmegaEven,
        ConstructionKind::ThetaHalf,
        ConstructionKind::OmegaTauNu,
        ConstructionKind::InterleavedPerms,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            ConstructionKind::CyclicSigma => "cyclic_sigma",
            ConstructionKind::PhiCyclic => "phi_cyclic",
            ConstructionKind::OmegaOdd => "omega_odd",
            ConstructionKind::SigmaEven => "sigma_even",
            ConstructionKind::OmegaEven => "omega_even",
            ConstructionKind::ThetaHalf => "theta_half",
            ConstructionKind::OmegaTauNu => "omega_tau_nu",
            ConstructionKind::InterleavedPerms => "interleaved_perms",
        }
    }

    /// Number of sets the construction produces for `m` input sets.
    pub fn output_count(&self, m: usize) -> usize {
        match self {
            ConstructionKind::ThetaHalf => m / 2,
            _ => m,
        }
    }
}

impl FromStr for ConstructionKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ConstructionKind::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| Error::UnknownConstruction(s.to_string()))
    }
}

fn require_even(m: usize, what: &str) -> Result<()> {
    if m == 0 || m % 2 != 0 {
        return Err(Error::Parity(format!("{what} needs an even number of sets, got {m}")));
    }
    Ok(())
}

fn require_odd(m: usize, what: &str) -> Result<()> {
    if m % 2 != 1 {
        return Err(Error::Parity(format!("{what} needs an odd number of sets, got {m}")));
    }
    Ok(())
}

fn require_perm<'a>(p: Option<&'a Permutation>, m: usize, what: &'static str) -> Result<&'a Permutation> {
    let p = p.ok_or(Error::Missing(what))?;
    if p.m() != m {
        return Err(Error::PermutationArity { expected: m, got: p.m() });
    }
    Ok(p)
}

/// `Ψ1 Ψ2 ... Ψm`.
pub fn plain_word(m: usize) -> Word {
    Word { letters: (1..=m).map(Letter::plain).collect() }
}

/// `Ψ1 Ψ2* Ψ3 ... Ψm Ψ1* ... Ψm*` for odd `m`: `2m` letters, adjoint at even positions.
pub fn alternating_word(m: usize) -> Word {
    Word { letters: (1..=2 * m).map(|p| Letter { set: (p - 1) % m + 1, adjoint: p % 2 == 0 }).collect() }
}

/// `Ψ*_{τ(1)} Ψ_{ν(1)} ... Ψ*_{τ(m)} Ψ_{ν(m)}`.
pub fn tau_nu_word(tau: &Permutation, nu: &Permutation) -> Word {
    let letters = (1..=tau.m()).flat_map(|j| [Letter::star(tau.apply(j)), Letter::plain(nu.apply(j))]).collect();
    Word { letters }
}

/// Pair words `Σ_j = Ψ*_{τ(2j-1)} Ψ_{τ(2j)}` followed by their adjoints `Σ_{m/2+j} = Σ_j*`.
pub fn sigma_even_words(tau: &Permutation) -> Result<Vec<Word>> {
    let m = tau.m();
    require_even(m, "sigma_even")?;
    let first: Vec<Word> = (1..=m / 2)
        .map(|j| Word { letters: vec![Letter::star(tau.apply(2 * j - 1)), Letter::plain(tau.apply(2 * j))] })
        .collect();
    let second: Vec<Word> = first.iter().map(Word::adjoint).collect();
    Ok(first.into_iter().chain(second).collect())
}

/// `τ(j) = 2j-1` then even numbers; `ν(j) = 2j` then odd numbers (odd `m`).
pub fn interleaved_permutations(m: usize) -> Result<(Permutation, Permutation)> {
    require_odd(m, "interleaved_perms")?;
    let h = (m + 1) / 2;
    let tau: Vec<usize> = (1..=m).map(|j| if j <= h { 2 * j - 1 } else { 2 * (j - h) }).collect();
    let l = (m - 1) / 2;
    let nu: Vec<usize> = (1..=m).map(|j| if j <= l { 2 * j } else { 2 * (j - l) - 1 }).collect();
    Ok((Permutation::new(tau)?, Permutation::new(nu)?))
}

fn rotations(base: &Word, count: usize, step: usize) -> Vec<Word> {
    (0..count).map(|j| rotate_word(base, step * j)).collect()
}

/// Symbolic words of a construction over `m` sets.
pub fn construction_words(
    kind: ConstructionKind,
    m: usize,
    tau: Option<&Permutation>,
    nu: Option<&Permutation>,
) -> Result<Vec<Word>> {
    if m == 0 {
        return Err(Error::InvalidParam("construction over zero sets".into()));
    }
    match kind {
        ConstructionKind::CyclicSigma => {
            Err(Error::InvalidParam("cyclic_sigma is a Hadamard mean, not a word family".into()))
        }
        ConstructionKind::PhiCyclic => Ok(rotations(&plain_word(m), m, 1)),
        ConstructionKind::OmegaOdd => {
            require_odd(m, "omega_odd")?;
            Ok(rotations(&alternating_word(m), m, 2))
        }
        ConstructionKind::SigmaEven => sigma_even_words(require_perm(tau, m, "permutation tau")?),
        ConstructionKind::OmegaEven => {
            let sig = sigma_even_words(require_perm(tau, m, "permutation tau")?)?;
            let nu = require_perm(nu, m, "permutation nu")?;
            let base = (1..=m).map(|i| sig[nu.apply(i) - 1].clone()).reduce(|a, b| a.concat(&b)).expect("m >= 1");
            Ok(rotations(&base, m, 2))
        }
        ConstructionKind::ThetaHalf => {
            let sig = sigma_even_words(require_perm(tau, m, "permutation tau")?)?;
            let base = sig[..m / 2].iter().cloned().reduce(|a, b| a.concat(&b)).expect("m >= 2");
            Ok(rotations(&base, m / 2, 2))
        }
        ConstructionKind::OmegaTauNu => {
            let tau = require_perm(tau, m, "permutation tau")?;
            let nu = require_perm(nu, m, "permutation nu")?;
            Ok(rotations(&tau_nu_word(tau, nu), m, 2))
        }
        ConstructionKind::InterleavedPerms => {
            let (tau, nu) = interleaved_permutations(m)?;
            Ok(rotations(&tau_nu_word(&tau, &nu), m, 2))
        }
    }
}

/// Index lists of the cyclic Hadamard means: entry `l` of list `i` is the set
/// (1-based) raised to weight `l+1` in `Σ_{i+1}`.
pub fn cyclic_sigma_indices(m: usize) -> Vec<Vec<usize>> {
    (0..m).map(|i| (0..m).map(|l| (i + l) % m + 1).collect()).collect()
}

/// Evaluate a construction on concrete sets.
pub fn build_construction(
    kind: ConstructionKind,
    sets: &[OperatorSet],
    weights: Option<&[f64]>,
    tau: Option<&Permutation>,
    nu: Option<&Permutation>,
) -> Result<Vec<OperatorSet>> {
    let m = sets.len();
    if kind == ConstructionKind::CyclicSigma {
        let w = weights.ok_or(Error::Missing("weights"))?;
        if w.len() != m {
            return Err(Error::WeightCount { sets: m, weights: w.len() });
        }
        return cyclic_sigma_indices(m)
            .into_iter()
            .enumerate()
            .map(|(i, idx)| {
                let chosen: Vec<&OperatorSet> = idx.iter().map(|&k| &sets[k - 1]).collect();
                Ok(set_hadamard_mean(&chosen, w)?.renamed(format!("Σ{}", i + 1)))
            })
            .collect();
    }
    construction_words(kind, m, tau, nu)?.iter().map(|w| w.evaluate(sets)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t0() -> NonNegMatrix {
        NonNegMatrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap()
    }

    fn single(m: NonNegMatrix) -> OperatorSet {
        OperatorSet::singleton("S", m)
    }

    fn w(spec: &[(usize, bool)]) -> Word {
        Word::new(spec.iter().map(|&(set, adjoint)| Letter { set, adjoint }).collect()).unwrap()
    }

    #[test]
    fn product_examples() {
        let psi = OperatorSet::new("P", vec![t0(), NonNegMatrix::ones(2)]).unwrap();
        let id = single(NonNegMatrix::identity(2));
        assert_eq!(set_product(&id, &psi).unwrap().members(), psi.dedup().members());
        let p = set_product(&single(t0().transpose()), &single(t0())).unwrap();
        assert_eq!(p.members(), &[NonNegMatrix::ones(2)]);
        assert!(set_product(&psi, &single(NonNegMatrix::ones(3))).is_err());
    }

    #[test]
    fn power_examples() {
        let e12 = NonNegMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let e21 = e12.transpose();
        let s = OperatorSet::new("E", vec![e12, e21]).unwrap();
        let p2 = set_power(&s, 2).unwrap();
        let d1 = NonNegMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let d2 = NonNegMatrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(p2.members().contains(&d1) && p2.members().contains(&d2));
        assert_eq!(set_power(&s, 1).unwrap().members(), s.dedup().members());
        let ones = single(NonNegMatrix::ones(2));
        for m in 1..6 {
            let p = set_power(&ones, m).unwrap();
            assert_eq!(p.members(), &[NonNegMatrix::ones(2).scale(2f64.powi(m as i32 - 1))]);
        }
    }

    #[test]
    fn adjoint_examples() {
        let a = adjoint_set(&single(t0()));
        assert_eq!(a.members()[0], NonNegMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap());
        let s = OperatorSet::new("P", vec![t0(), NonNegMatrix::identity(2)]).unwrap();
        assert_eq!(adjoint_set(&adjoint_set(&s)).members(), s.members());
        let sym = single(NonNegMatrix::ones(2));
        assert_eq!(adjoint_set(&sym).members(), sym.members());
    }

    #[test]
    fn mean_examples() {
        let t = single(t0());
        let third = 1.0 / 3.0;
        let m = set_hadamard_mean(&[&t, &t, &t], &[third; 3]).unwrap();
        assert_eq!(m.members(), &[t0()]);
        let a = OperatorSet::new("A", vec![t0(), NonNegMatrix::ones(2), NonNegMatrix::identity(2)]).unwrap();
        let b = OperatorSet::new("B", vec![NonNegMatrix::ones(2), t0().transpose()]).unwrap();
        assert!(set_hadamard_mean(&[&a, &b], &[0.5, 0.5]).unwrap().len() <= 6);
        assert!(set_hadamard_mean(&[&a, &b], &[0.5, 0.0]).is_err());
    }

    #[test]
    fn permutation_validation() {
        assert!(Permutation::new(vec![2, 1, 3]).is_ok());
        assert!(Permutation::new(vec![1, 1]).is_err());
        assert!(Permutation::new(vec![]).is_err());
        let p: Permutation = serde_json::from_str("[3,1,2]").unwrap();
        assert_eq!(p.apply(1), 3);
        assert!(serde_json::from_str::<Permutation>("[0,1]").is_err());
    }

    #[test]
    fn rotation_basics() {
        let word = w(&[(1, false), (2, true), (3, false)]);
        assert_eq!(rotate_word(&word, 0), word);
        assert_eq!(rotate_word(&word, 1).to_string(), "Ψ2*Ψ3Ψ1");
        let mut r = word.clone();
        for _ in 0..word.len() {
            r = rotate_word(&r, 1);
        }
        assert_eq!(r, word);
        assert_eq!(word.adjoint().to_string(), "Ψ3*Ψ2Ψ1*");
        assert_eq!(word.canonical(), rotate_word(&word.adjoint(), 2).canonical());
    }

    #[test]
    fn cyclic_sigma_m2() {
        let a = single(t0());
        let b = single(NonNegMatrix::ones(2));
        let out =
            build_construction(ConstructionKind::CyclicSigma, &[a.clone(), b.clone()], Some(&[0.5, 0.5]), None, None)
                .unwrap();
        let s1 = set_hadamard_mean(&[&a, &b], &[0.5, 0.5]).unwrap();
        let s2 = set_hadamard_mean(&[&b, &a], &[0.5, 0.5]).unwrap();
        assert_eq!(out[0].members(), s1.members());
        assert_eq!(out[1].members(), s2.members());
        assert_eq!(cyclic_sigma_indices(3), vec![vec![1, 2, 3], vec![2, 3, 1], vec![3, 1, 2]]);
    }

    #[test]
    fn omega_odd_on_t0() {
        let sets = vec![single(t0()), single(t0()), single(t0())];
        let out = build_construction(ConstructionKind::OmegaOdd, &sets, None, None, None).unwrap();
        let d = NonNegMatrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 8.0]]).unwrap();
        assert_eq!(out.len(), 3);
        for o in out {
            assert_eq!(o.members(), &[d.clone()]);
        }
    }

    #[test]
    fn sigma_even_on_t0() {
        let sets = vec![single(t0()); 4];
        let tau = Permutation::identity(4);
        let out = build_construction(ConstructionKind::SigmaEven, &sets, None, Some(&tau), None).unwrap();
        assert_eq!(out[0].members(), &[NonNegMatrix::ones(2)]);
        assert_eq!(out[1].members(), &[NonNegMatrix::ones(2)]);
        assert_eq!(out[2].members(), adjoint_set(&out[0]).members());
        assert_eq!(out[3].members(), adjoint_set(&out[1]).members());
    }

    #[test]
    fn sigma_even_second_half_is_adjoint() {
        let tau = Permutation::new(vec![3, 1, 4, 6, 2, 5]).unwrap();
        let words = sigma_even_words(&tau).unwrap();
        for j in 0..3 {
            assert_eq!(words[3 + j], words[j].adjoint());
        }
    }

    #[test]
    fn parity_and_arity_errors() {
        let sets = vec![single(t0()); 4];
        assert!(matches!(
            build_construction(ConstructionKind::OmegaOdd, &sets, None, None, None),
            Err(Error::Parity(_))
        ));
        let tau3 = Permutation::identity(3);
        assert!(matches!(
            build_construction(ConstructionKind::SigmaEven, &sets, None, Some(&tau3), None),
            Err(Error::PermutationArity { .. })
        ));
        assert!(matches!(
            build_construction(ConstructionKind::CyclicSigma, &sets, None, None, None),
            Err(Error::Missing(_))
        ));
        assert!(matches!(construction_words(ConstructionKind::InterleavedPerms, 4, None, None), Err(Error::Parity(_))));
    }

    #[test]
    fn kind_ids_roundtrip() {
        for k in ConstructionKind::ALL {
            assert_eq!(k.id().parse::<ConstructionKind>().unwrap(), k);
        }
        assert!("nope".parse::<ConstructionKind>().is_err());
    }

    #[test]
    fn interleaved_permutations_small() {
        let (tau, nu) = interleaved_permutations(5).unwrap();
        assert_eq!(tau.images(), &[1, 3, 5, 2, 4]);
        assert_eq!(nu.images(), &[2, 4, 1, 3, 5]);
    }

    #[test]
    fn set_json_roundtrip() {
        let s = OperatorSet::new("Psi1", vec![t0()]).unwrap();
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"name":"Psi1","matrices":[{"dim":2,"rows":[[0.0,0.0],[1.0,1.0]]}]}"#);
        assert_eq!(serde_json::from_str::<OperatorSet>(&j).unwrap(), s);
        assert!(serde_json::from_str::<OperatorSet>(r#"{"name":"x","matrices":[]}"#).is_err());
    }
}
