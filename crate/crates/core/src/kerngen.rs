//! Nyström discretization of positive kernels on [0,1]² into test matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{InstanceSpec, Params, Permutations};
use crate::numat::NonNegMatrix;
use crate::setalg::OperatorSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    /// `exp(-c|x-y|)`
    ExpAbs,
    /// `exp(-c(x-y)^2)`
    Gauss,
    /// `(1+xy)^c`
    Poly,
    /// `1`
    Const,
}

impl std::str::FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp_abs" => Ok(KernelKind::ExpAbs),
            "gauss" => Ok(KernelKind::Gauss),
            "poly" => Ok(KernelKind::Poly),
            "const" => Ok(KernelKind::Const),
            other => Err(Error::InvalidParam(format!(
                "unknown kernel `{other}` (expected exp_abs, gauss, poly or const)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub c: f64,
    pub grid_n: usize,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, c: f64, grid_n: usize) -> Result<Self> {
        let s = KernelSpec { kind, c, grid_n };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_n == 0 {
            return Err(Error::InvalidParam("grid_n must be at least 1".into()));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidParam(format!("kernel constant c must be positive, got {}", self.c)));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let c = self.c;
        match self.kind {
            KernelKind::ExpAbs => (-c * (x - y).abs()).exp(),
            KernelKind::Gauss => (-c * (x - y) * (x - y)).exp(),
            KernelKind::Poly => (1.0 + x * y).powf(c),
            KernelKind::Const => 1.0,
        }
    }
}

/// `M[i][j] = a(x_i, x_j) h` on the midpoint grid `x_i = (i + 1/2) h`, `h = 1/n`.
pub fn nystrom_matrix(spec: &KernelSpec) -> Result<NonNegMatrix> {
    spec.validate()?;
    let n = spec.grid_n;
    let h = 1.0 / n as f64;
    let x: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
    let data = (0..n * n).map(|k| spec.eval(x[k / n], x[k % n]) * h).collect();
    NonNegMatrix::new(n, data)
}

/// Singleton sets of Nyström matrices wrapped into an instance.
pub fn kernel_instance(
    specs: &[KernelSpec],
    weights: Vec<f64>,
    params: Params,
    permutations: Permutations,
) -> Result<InstanceSpec> {
    let first = specs.first().ok_or(Error::Missing("kernel specs"))?;
    if let Some(bad) = specs.iter().find(|s| s.grid_n != first.grid_n) {
        return Err(Error::DimensionMismatch { left: first.grid_n, right: bad.grid_n });
    }
    let sets = specs
        .iter()
        .enumerate()
        .map(|(i, s)| Ok(OperatorSet::singleton(format!("Psi{}", i + 1), nystrom_matrix(s)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut inst = InstanceSpec::new(sets)?.with_weights(weights);
    inst.params = params;
    inst.permutations = permutations;
    inst.validate()?;
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn const_kernel_grid_two() {
        let m = nystrom_matrix(&KernelSpec::new(KernelKind::Const, 1.0, 2).unwrap()).unwrap();
        assert_eq!(m.entries(), &[0.5, 0.5, 0.5, 0.5]);
    }

    #[test]
    fn exp_abs_approaches_const() {
        let a = nystrom_matrix(&KernelSpec::new(KernelKind::ExpAbs, 1e-9, 4).unwrap()).unwrap();
        let b = nystrom_matrix(&KernelSpec::new(KernelKind::Const, 1.0, 4).unwrap()).unwrap();
        for (x, y) in a.entries().iter().zip(b.entries()) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn symmetric_kernels_give_symmetric_positive_matrices() {
        for kind in [KernelKind::ExpAbs, KernelKind::Gauss, KernelKind::Poly, KernelKind::Const] {
            let m = nystrom_matrix(&KernelSpec::new(kind, 2.5, 5).unwrap()).unwrap();
            for i in 0..5 {
                for j in 0..5 {
                    assert!(m.get(i, j) > 0.0);
                    assert!((m.get(i, j) - m.get(j, i)).abs() <= 1e-15);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(KernelSpec::new(KernelKind::Gauss, 0.0, 3).is_err());
        assert!(KernelSpec::new(KernelKind::Gauss, 1.0, 0).is_err());
        assert!("cosine".parse::<KernelKind>().is_err());
        let a = KernelSpec::new(KernelKind::Gauss, 1.0, 3).unwrap();
        let b = KernelSpec::new(KernelKind::Gauss, 1.0, 4).unwrap();
        assert!(kernel_instance(&[a, b], vec![], Params::default(), Permutations::default()).is_err());
    }
}
