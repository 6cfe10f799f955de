//! JSON documents describing systems, maps and simulation settings.

use serde::{Deserialize, Serialize};

use crate::analytics::TwoDSpec;
use crate::error::{Error, Result};
use crate::matcore::{matrix_from_rows, SymMatrix};
use crate::mc::{SimConfig, DEFAULT_STRIDE};
use crate::model::{normalize_map, CoarseGrainingMap, SystemSpec};
use crate::systems::{build_2d, build_chain, build_tridiag, ChainSpec, TridiagSpec};

/// `{"A": [[…]], "beta": r, "phi_raw": [[…]]}` with optional simulation
/// fields; matrices are row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDocument {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub beta: f64,
    pub phi_raw: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_total: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q0: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct LoadedSystem {
    pub sys: SystemSpec,
    pub cg: CoarseGrainingMap,
    pub sim: Option<SimConfig>,
}

impl SystemDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(&self) -> Result<LoadedSystem> {
        let sys = SystemSpec::new(SymMatrix::from_rows(&self.a)?, self.beta)?;
        let cg = normalize_map(&matrix_from_rows(&self.phi_raw)?)?;
        Ok(LoadedSystem {
            sys,
            cg,
            sim: self.sim_config()?,
        })
    }

    /// `None` when no simulation field is present; an error when only some are.
    pub fn sim_config(&self) -> Result<Option<SimConfig>> {
        let required = (self.dt, self.t_total, self.n_samples, self.base_seed, &self.q0);
        let any = self.dt.is_some()
            || self.t_total.is_some()
            || self.n_samples.is_some()
            || self.base_seed.is_some()
            || self.q0.is_some()
            || self.burn_in_fraction.is_some()
            || self.stride.is_some();
        match required {
            (Some(dt), Some(t_total), Some(n_samples), Some(base_seed), Some(q0)) => {
                let cfg = SimConfig {
                    dt,
                    t_total,
                    n_samples,
                    base_seed,
                    burn_in_fraction: self.burn_in_fraction.unwrap_or(0.5),
                    stride: self.stride.unwrap_or(DEFAULT_STRIDE),
                    q0: q0.clone(),
                };
                cfg.validate()?;
                Ok(Some(cfg))
            }
            _ if any => Err(Error::InvalidParameter(
                "simulation settings need dt, t_total, n_samples, base_seed and q0 together".into(),
            )),
            _ => Ok(None),
        }
    }
}

/// `{"kind": "2d"|"tridiag"|"chain", …}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum BuilderDocument {
    #[serde(rename = "2d")]
    TwoD {
        lambda: f64,
        theta: f64,
        #[serde(default = "unit_beta")]
        beta: f64,
    },
    #[serde(rename = "tridiag")]
    Tridiag {
        /// Omitted: the ten-dimensional diagonal `1, 1.5, …, 10`.
        #[serde(default)]
        diag: Option<Vec<f64>>,
        offdiag_sigma: f64,
        #[serde(default = "unit_beta")]
        beta: f64,
    },
    #[serde(rename = "chain")]
    Chain {
        n_masses: usize,
        k1: f64,
        k2: f64,
        k3: f64,
        #[serde(default)]
        springs: Option<Vec<f64>>,
        #[serde(default = "unit_beta")]
        beta: f64,
    },
}

fn unit_beta() -> f64 {
    1.0
}

/// A built system, plus the map for families that define one.
#[derive(Debug, Clone)]
pub struct BuiltSystem {
    pub sys: SystemSpec,
    pub cg: Option<CoarseGrainingMap>,
}

impl BuilderDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self) -> Result<BuiltSystem> {
        match self {
            BuilderDocument::TwoD { lambda, theta, beta } => {
                let (sys, cg) = build_2d(TwoDSpec::new(*lambda, *theta)?, *beta)?;
                Ok(BuiltSystem { sys, cg: Some(cg) })
            }
            BuilderDocument::Tridiag {
                diag,
                offdiag_sigma,
                beta,
            } => {
                let spec = match diag {
                    Some(d) => TridiagSpec {
                        diag: d.clone(),
                        offdiag_sigma: *offdiag_sigma,
                    },
                    None => TridiagSpec::paper_10d(*offdiag_sigma),
                };
                Ok(BuiltSystem {
                    sys: build_tridiag(&spec, *beta)?,
                    cg: None,
                })
            }
            BuilderDocument::Chain {
                n_masses,
                k1,
                k2,
                k3,
                springs,
                beta,
            } => {
                let spec = ChainSpec {
                    n_masses: *n_masses,
                    k1: *k1,
                    k2: *k2,
                    k3: *k3,
                    springs: springs.clone(),
                };
                Ok(BuiltSystem {
                    sys: build_chain(&spec, *beta)?,
                    cg: None,
                })
            }
        }
    }
}
