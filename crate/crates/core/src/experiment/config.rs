use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::holomap::Holomap;
use crate::kernel::BallPoint;
use crate::operator_r::MonomialMap;
use crate::tol::Tolerances;
use crate::C64;

use super::ConfigError;

/// One JSON document describing a run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub experiment: Experiment,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    PickNorm(PickNormSpec),
    HolomapCheck(HolomapCheckSpec),
    OperatorR(OperatorRSpec),
    ExtensionProbe(ExtensionProbeSpec),
    DisjointUnion(DisjointUnionSpec),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::PickNorm(_) => "pick-norm",
            Experiment::HolomapCheck(_) => "holomap-check",
            Experiment::OperatorR(_) => "operator-r",
            Experiment::ExtensionProbe(_) => "extension-probe",
            Experiment::DisjointUnion(_) => "disjoint-union",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PickNormSpec {
    pub nodes: Vec<BallPoint>,
    /// `[re, im]` per node.
    pub values: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_norm: Option<f64>,
    #[serde(default = "default_expected_tol")]
    pub expected_tol: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolomapCheckSpec {
    pub map: MapSpec,
    pub grid_size: usize,
    /// Declares `|h| = 1` on the circle, enabling the properness assertion.
    #[serde(default)]
    pub boundary_normalized: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_margin: Option<f64>,
    #[serde(default = "default_margin_tol")]
    pub expected_tol: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorRSpec {
    pub map: MapSpec,
    pub grid_size: usize,
    pub modes: usize,
    /// Bound on off-diagonal entries and on `|diag - oracle|`.
    #[serde(default = "default_oracle_tol")]
    pub oracle_tol: f64,
    /// Allowed relative change of the M-kernel HS norm between N/2 and N.
    #[serde(default = "default_hs_change_tol")]
    pub hs_change_tol: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionProbeSpec {
    pub map: MapSpec,
    pub target: AmbientPolynomial,
    /// Strictly increasing sample sizes; samples are nested prefixes.
    pub schedule: Vec<usize>,
    /// Upper bound on the multiplier norm of the target. Defaults to the sum
    /// of the coefficient moduli.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<f64>,
    #[serde(default = "default_cap_tol")]
    pub cap_tol: f64,
    /// Grid for the boundary injectivity / transversality preconditions.
    #[serde(default = "default_probe_grid")]
    pub grid_size: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisjointUnionSpec {
    pub pieces: Vec<Vec<BallPoint>>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Random values are drawn uniformly from the disk of this radius.
    #[serde(default = "default_value_bound")]
    pub value_bound: f64,
    #[serde(default = "default_union_tol")]
    pub inequality_tol: f64,
}

fn default_expected_tol() -> f64 {
    1e-10
}
fn default_margin_tol() -> f64 {
    1e-12
}
fn default_oracle_tol() -> f64 {
    1e-8
}
fn default_hs_change_tol() -> f64 {
    0.02
}
fn default_cap_tol() -> f64 {
    1e-8
}
fn default_probe_grid() -> usize {
    256
}
fn default_trials() -> usize {
    100
}
fn default_value_bound() -> f64 {
    1.0
}
fn default_union_tol() -> f64 {
    1e-8
}

/// Either a member of the `(a z^p, b z^q)` family or explicit polynomial
/// components.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapSpec {
    Monomial { p: usize, q: usize, alpha: f64 },
    Polynomial(Holomap),
}

impl MapSpec {
    pub fn holomap(&self) -> Result<Holomap, ConfigError> {
        match self {
            MapSpec::Monomial { p, q, alpha } => MonomialMap::with_alpha(*p, *q, *alpha)
                .map(|m| m.holomap())
                .map_err(|e| ConfigError(e.to_string())),
            MapSpec::Polynomial(h) => Ok(h.clone()),
        }
    }

    pub fn monomial_map(&self) -> Option<MonomialMap> {
        match self {
            MapSpec::Monomial { p, q, alpha } => MonomialMap::with_alpha(*p, *q, *alpha).ok(),
            MapSpec::Polynomial(h) => MonomialMap::from_holomap(h),
        }
    }
}

/// Polynomial in the ambient coordinates `w_1..w_d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbientPolynomial {
    pub terms: Vec<AmbientTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbientTerm {
    pub coeff: [f64; 2],
    pub powers: Vec<u32>,
}

impl AmbientPolynomial {
    pub fn eval(&self, w: &[C64]) -> C64 {
        self.terms
            .iter()
            .map(|t| {
                t.powers
                    .iter()
                    .zip(w)
                    .fold(C64::new(t.coeff[0], t.coeff[1]), |acc, (&k, wi)| {
                        acc * wi.powu(k)
                    })
            })
            .sum()
    }

    /// `sum |c_gamma|`. Each monomial `w^gamma` is a product of coordinate
    /// multipliers of norm one, so this bounds the multiplier norm.
    pub fn triangle_cap(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| C64::new(t.coeff[0], t.coeff[1]).norm())
            .sum()
    }

    fn check_dim(&self, dim: usize) -> Result<(), ConfigError> {
        for (i, t) in self.terms.iter().enumerate() {
            if t.powers.len() != dim {
                return Err(ConfigError(format!(
                    "target term {i} has {} powers, map dimension is {dim}",
                    t.powers.len()
                )));
            }
        }
        Ok(())
    }
}

fn positive(name: &str, v: usize) -> Result<(), ConfigError> {
    if v == 0 {
        return Err(ConfigError(format!("{name} must be positive")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| ConfigError(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Kind-specific structural checks.
    pub fn validate(&self) -> Result<(), ConfigError> {
        match &self.experiment {
            Experiment::PickNorm(s) => {
                if s.nodes.is_empty() {
                    return Err(ConfigError("pick-norm needs at least one node".into()));
                }
                if s.nodes.len() != s.values.len() {
                    return Err(ConfigError(format!(
                        "{} nodes but {} values",
                        s.nodes.len(),
                        s.values.len()
                    )));
                }
            }
            Experiment::HolomapCheck(s) => {
                s.map.holomap()?;
                positive("grid_size", s.grid_size)?;
            }
            Experiment::OperatorR(s) => {
                s.map.holomap()?;
                positive("grid_size", s.grid_size)?;
                positive("modes", s.modes)?;
            }
            Experiment::ExtensionProbe(s) => {
                let h = s.map.holomap()?;
                s.target.check_dim(h.dim())?;
                positive("grid_size", s.grid_size)?;
                if s.schedule.is_empty() {
                    return Err(ConfigError("schedule must not be empty".into()));
                }
                positive("schedule entries", s.schedule[0])?;
                if s.schedule.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(ConfigError("schedule must be strictly increasing".into()));
                }
            }
            Experiment::DisjointUnion(s) => {
                if s.pieces.is_empty() || s.pieces.iter().any(Vec::is_empty) {
                    return Err(ConfigError("every piece needs at least one node".into()));
                }
                positive("trials", s.trials)?;
                if !(s.value_bound > 0.0) {
                    return Err(ConfigError("value_bound must be positive".into()));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_operator_r() {
        let cfg = ExperimentConfig::from_json(
            r#"{"kind":"operator-r","map":{"monomial":{"p":2,"q":3,"alpha":0.5}},
                "grid_size":1024,"modes":32,"tolerances":{"tol_kernel":1e-7}}"#,
        )
        .unwrap();
        assert_eq!(cfg.experiment.kind(), "operator-r");
        assert_eq!(cfg.tolerances.tol_kernel, 1e-7);
        assert_eq!(cfg.tolerances.tol_psd, 1e-10);
    }

    #[test]
    fn rejects_zero_modes_and_bad_schedule() {
        let zero = r#"{"kind":"operator-r","map":{"monomial":{"p":2,"q":3,"alpha":0.5}},"grid_size":64,"modes":0}"#;
        assert!(ExperimentConfig::from_json(zero).is_err());
        let sched = r#"{"kind":"extension-probe","map":{"monomial":{"p":2,"q":3,"alpha":0.5}},
            "target":{"terms":[{"coeff":[1,0],"powers":[1,0]}]},"schedule":[4,4]}"#;
        assert!(ExperimentConfig::from_json(sched).is_err());
        let dims = r#"{"kind":"extension-probe","map":{"monomial":{"p":2,"q":3,"alpha":0.5}},
            "target":{"terms":[{"coeff":[1,0],"powers":[1]}]},"schedule":[4]}"#;
        assert!(ExperimentConfig::from_json(dims).is_err());
        assert!(ExperimentConfig::from_json(r#"{"kind":"nope"}"#).is_err());
    }

    #[test]
    fn ambient_polynomial() {
        let f = AmbientPolynomial {
            terms: vec![
                AmbientTerm {
                    coeff: [2.0, 0.0],
                    powers: vec![1, 0],
                },
                AmbientTerm {
                    coeff: [0.0, 1.0],
                    powers: vec![0, 2],
                },
            ],
        };
        let w = [C64::new(0.5, 0.0), C64::new(0.0, 0.5)];
        assert!((f.eval(&w) - C64::new(1.0, -0.25)).norm() < 1e-15);
        assert_eq!(f.triangle_cap(), 3.0);
    }
}
