//! Instance descriptions: the operator sets and parameters a chain is checked on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::setalg::{OperatorSet, Permutation};

pub const SCHEMA: u32 = 1;

/// Scalar parameters of a catalog instance.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Permutations {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<Permutation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<Permutation>,
}

impl Permutations {
    pub fn is_empty(&self) -> bool {
        self.tau.is_none() && self.nu.is_none()
    }
}

/// Sets, weights, parameters and permutations of one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub schema: u32,
    pub dimension: usize,
    pub sets: Vec<OperatorSet>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub weights: Vec<f64>,
    #[serde(default)]
    pub params: Params,
    #[serde(default, skip_serializing_if = "Permutations::is_empty")]
    pub permutations: Permutations,
}

impl InstanceSpec {
    /// Instance over `sets` with no weights or parameters.
    pub fn new(sets: Vec<OperatorSet>) -> Result<Self> {
        let dimension = sets.first().ok_or(Error::Missing("sets"))?.dim();
        let inst = InstanceSpec {
            schema: SCHEMA,
            dimension,
            sets,
            weights: Vec::new(),
            params: Params::default(),
            permutations: Permutations::default(),
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn with_weights(mut self, w: Vec<f64>) -> Self {
        self.weights = w;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.params.alpha = Some(alpha);
        self
    }

    pub fn with_t(mut self, t: f64) -> Self {
        self.params.t = Some(t);
        self
    }

    pub fn with_tau(mut self, tau: Permutation) -> Self {
        self.permutations.tau = Some(tau);
        self
    }

    pub fn with_nu(mut self, nu: Permutation) -> Self {
        self.permutations.nu = Some(nu);
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: InstanceSpec = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(Error::Parse(format!("schema: unsupported version {}", self.schema)));
        }
        if self.sets.is_empty() {
            return Err(Error::Parse("sets: at least one set is required".into()));
        }
        for s in &self.sets {
            if s.dim() != self.dimension {
                return Err(Error::Parse(format!(
                    "dimension: set `{}` has dimension {}, declared {}",
                    s.name,
                    s.dim(),
                    self.dimension
                )));
            }
        }
        for (index, &value) in self.weights.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositiveWeight { index, value });
            }
        }
        let p = &self.params;
        for (name, v) in [("params.alpha", p.alpha), ("params.t", p.t)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::Parse(format!("{name}: must be positive, got {v}")));
                }
            }
        }
        for (name, v) in [("params.m", p.m), ("params.k", p.k), ("params.n", p.n), ("params.depth", p.depth)] {
            if v == Some(0) {
                return Err(Error::Parse(format!("{name}: must be at least 1")));
            }
        }
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.sets.len()
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{"schema":1,"dimension":2,
        "sets":[{"name":"Psi1","matrices":[{"dim":2,"rows":[[0,0],[1,1]]}]}],
        "params":{"alpha":0.4},"permutations":{"tau":[1]}}"#;

    #[test]
    fn parses_and_round_trips() {
        let inst = InstanceSpec::from_json(GOOD).unwrap();
        assert_eq!(inst.params.alpha, Some(0.4));
        assert_eq!(inst.permutations.tau.as_ref().unwrap().images(), &[1]);
        let again = InstanceSpec::from_json(&inst.to_json()).unwrap();
        assert_eq!(inst, again);
    }

    #[test]
    fn rejects_unknown_fields() {
        let bad = GOOD.replace("\"alpha\"", "\"alpah\"");
        let err = InstanceSpec::from_json(&bad).unwrap_err().to_string();
        assert!(err.contains("alpah"), "{err}");
        let bad = GOOD.replace("\"schema\":1,", "\"schema\":1,\"extra\":0,");
        assert!(InstanceSpec::from_json(&bad).unwrap_err().to_string().contains("extra"));
    }

    #[test]
    fn rejects_bad_values() {
        assert!(InstanceSpec::from_json(&GOOD.replace("\"schema\":1", "\"schema\":2")).is_err());
        assert!(InstanceSpec::from_json(&GOOD.replace("\"dimension\":2", "\"dimension\":3")).is_err());
        assert!(InstanceSpec::from_json(&GOOD.replace("[0,0]", "[0,-1]")).is_err());
        assert!(InstanceSpec::from_json(&GOOD.replace("0.4", "-0.4")).is_err());
        assert!(InstanceSpec::from_json(&GOOD.replace("[1]}", "[2]}")).is_err());
    }
}
