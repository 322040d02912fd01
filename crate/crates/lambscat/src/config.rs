//! TOML run configuration: one file drives every command.
//!
//! The `[model]` block is either raw `{eigenvalues, coupling, metric?, theta?}`
//! data or exactly one of the presets `lamb_chain`, `pauli_fierz`,
//! `acoustic_shell`; the remaining blocks configure initial data, simulation,
//! scattering window, an optional anharmonic potential and output layout.

use serde::{Deserialize, Serialize};

use crate::dynamics::{DataMode, InitialData};
use crate::error::{Error, Result};
use crate::model::{build_chain, normalize, ChainSpec, ModelSpec, NormalizedModel};
use crate::potential::PolyPotential;
use crate::profile::{FieldProfile, ProfileTerm};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scatter: Option<ScatterBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonlinear: Option<NonlinearBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputBlock>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lamb_chain: Option<ChainBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pauli_fierz: Option<PauliFierzBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acoustic_shell: Option<AcousticShellBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainBlock {
    pub masses: Vec<f64>,
    pub springs: Vec<f64>,
    pub tension: f64,
}

/// Charged oscillator in dipole coupling: mass m, frequency omega, charge e.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PauliFierzBlock {
    pub m: f64,
    pub omega: f64,
    pub e: f64,
}

/// Radially oscillating elastic shell: mass, Young modulus, rest radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcousticShellBlock {
    pub mass: f64,
    pub young: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataBlock {
    #[serde(default = "default_mode")]
    pub mode: DataMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ydot0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub phi0: Vec<TermBlock>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub phidot0: Vec<TermBlock>,
}

fn default_mode() -> DataMode {
    DataMode::Compatible
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TermBlock {
    Gaussian {
        amplitude: f64,
        center: f64,
        sigma: f64,
        #[serde(default)]
        power: u32,
    },
    Bump {
        amplitude: f64,
        center: f64,
        radius: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimBlock {
    pub t_final: f64,
    pub dt: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshot_times: Vec<f64>,
    #[serde(default = "default_snapshot_x_max")]
    pub snapshot_x_max: f64,
    #[serde(default = "default_snapshot_points")]
    pub snapshot_points: usize,
    /// Window [lo, hi] for the asymptotic decay fit; defaults to [T/2, T].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_window: Option<(f64, f64)>,
}

fn default_snapshot_x_max() -> f64 {
    20.0
}

fn default_snapshot_points() -> usize {
    201
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterBlock {
    pub x_max: f64,
    pub h: f64,
    #[serde(default = "default_covariance_time")]
    pub covariance_time: f64,
}

fn default_covariance_time() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearBlock {
    pub v: String,
    pub grad: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default = "default_directory")]
    pub directory: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

fn default_directory() -> String {
    "out".into()
}

fn default_formats() -> Vec<String> {
    vec!["csv".into(), "json".into()]
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Resolve the model block (raw or preset) to the normalized model.
    /// Presets print through the normalized (λ, c, θ) so the parameter maps
    /// can be cross-checked by hand.
    pub fn resolve_model(&self) -> Result<NormalizedModel> {
        let b = &self.model;
        let presets = [
            b.lamb_chain.is_some(),
            b.pauli_fierz.is_some(),
            b.acoustic_shell.is_some(),
        ]
        .iter()
        .filter(|x| **x)
        .count();
        let raw = b.eigenvalues.is_some() || b.coupling.is_some();
        if presets + usize::from(raw) != 1 {
            return Err(Error::Config(
                "model block must contain exactly one of: raw {eigenvalues, coupling}, lamb_chain, pauli_fierz, acoustic_shell".into(),
            ));
        }
        if let Some(chain) = &b.lamb_chain {
            return build_chain(&ChainSpec {
                masses: chain.masses.clone(),
                springs: chain.springs.clone(),
                tension: chain.tension,
            });
        }
        if let Some(pf) = &b.pauli_fierz {
            if pf.m <= 0.0 || pf.omega <= 0.0 {
                return Err(Error::Config("pauli_fierz needs m > 0 and omega > 0".into()));
            }
            let w2 = pf.omega * pf.omega;
            return normalize(&ModelSpec {
                eigenvalues: vec![-w2],
                coupling: vec![pf.e * w2],
                metric: Some(vec![2.0 / (3.0 * pf.m * w2)]),
                theta: 2.0 * pf.e * pf.e / (3.0 * pf.m),
            });
        }
        if let Some(sh) = &b.acoustic_shell {
            if sh.mass <= 0.0 || sh.young <= 0.0 || sh.radius <= 0.0 {
                return Err(Error::Config("acoustic_shell needs positive mass, young, radius".into()));
            }
            let pi = std::f64::consts::PI;
            let w2 = sh.young / sh.mass;
            let r0 = sh.radius;
            return normalize(&ModelSpec {
                eigenvalues: vec![-w2 / (1.0 + r0)],
                coupling: vec![-4.0 * pi * w2 * r0 * r0 / (1.0 + r0)],
                metric: Some(vec![1.0 / (4.0 * pi * sh.young)]),
                theta: -r0 / (1.0 + r0),
            });
        }
        let eigenvalues = b
            .eigenvalues
            .clone()
            .ok_or_else(|| Error::Config("raw model needs eigenvalues".into()))?;
        let coupling = b
            .coupling
            .clone()
            .ok_or_else(|| Error::Config("raw model needs coupling".into()))?;
        normalize(&ModelSpec {
            eigenvalues,
            coupling,
            metric: b.metric.clone(),
            theta: b.theta.unwrap_or(0.0),
        })
    }

    fn profile_from(terms: &[TermBlock]) -> Result<FieldProfile> {
        FieldProfile::new(
            terms
                .iter()
                .map(|t| match *t {
                    TermBlock::Gaussian {
                        amplitude,
                        center,
                        sigma,
                        power,
                    } => ProfileTerm::Gaussian {
                        amplitude,
                        center,
                        sigma,
                        power,
                    },
                    TermBlock::Bump {
                        amplitude,
                        center,
                        radius,
                    } => ProfileTerm::Bump {
                        amplitude,
                        center,
                        radius,
                    },
                })
                .collect(),
        )
    }

    /// Resolve the data block into initial data for `model`.
    pub fn resolve_data(&self, model: &NormalizedModel) -> Result<InitialData> {
        let block = self
            .data
            .as_ref()
            .ok_or_else(|| Error::Config("this command needs a [data] block".into()))?;
        let phi0 = Self::profile_from(&block.phi0)?;
        let phidot0 = Self::profile_from(&block.phidot0)?;
        match block.mode {
            DataMode::ClassD => {
                if block.y0.is_some() || block.ydot0.is_some() {
                    return Err(Error::Config(
                        "mode = \"class_d\" computes y0/ydot0 from the field; do not supply them".into(),
                    ));
                }
                InitialData::class_d(model, phi0, phidot0)
            }
            DataMode::Compatible => {
                let n = model.n();
                let y0 = block.y0.clone().unwrap_or_else(|| vec![0.0; n]);
                let ydot0 = block.ydot0.clone().unwrap_or_else(|| vec![0.0; n]);
                InitialData::compatible(model, phi0, phidot0, y0, ydot0)
            }
        }
    }

    /// Parse the optional nonlinear block into a potential for `model`.
    pub fn resolve_potential(&self, model: &NormalizedModel) -> Result<Option<PolyPotential>> {
        match &self.nonlinear {
            None => Ok(None),
            Some(nl) => Ok(Some(PolyPotential::parse(&nl.v, &nl.grad, model.n())?)),
        }
    }

    pub fn output_directory(&self) -> String {
        self.output
            .as_ref()
            .map(|o| o.directory.clone())
            .unwrap_or_else(default_directory)
    }

    pub fn wants_format(&self, fmt: &str) -> bool {
        match &self.output {
            None => true,
            Some(o) => o.formats.iter().any(|f| f == fmt),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LAMB_TOML: &str = r#"
[model.lamb_chain]
masses = [1.0]
springs = [1.0]
tension = 1.0

[data]
mode = "compatible"

[[data.phi0]]
kind = "gaussian"
amplitude = 1.0
center = 5.0
sigma = 1.0

[sim]
t_final = 20.0
dt = 1e-3
"#;

    #[test]
    fn parses_and_resolves_lamb_preset() {
        let cfg = RunConfig::parse(LAMB_TOML).unwrap();
        let m = cfg.resolve_model().unwrap();
        assert_eq!(m.lambda, vec![-1.0]);
        assert!((m.c[0].abs() - 1.0).abs() < 1e-15);
        assert_eq!(m.theta, 0.0);
        let data = cfg.resolve_data(&m).unwrap();
        assert_eq!(data.y0, vec![0.0]);
        assert!((data.phi0.value(5.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = RunConfig::parse(LAMB_TOML).unwrap();
        let dumped = cfg.to_toml().unwrap();
        let cfg2 = RunConfig::parse(&dumped).unwrap();
        assert_eq!(cfg, cfg2);
    }

    #[test]
    fn rejects_ambiguous_model_blocks() {
        let text = r#"
[model]
eigenvalues = [-1.0]
coupling = [1.0]

[model.pauli_fierz]
m = 1.0
omega = 1.0
e = 1.0
"#;
        let cfg = RunConfig::parse(text).unwrap();
        assert!(cfg.resolve_model().is_err());
    }

    #[test]
    fn preset_parameter_maps() {
        let cfg = RunConfig::parse("[model.pauli_fierz]\nm = 1.0\nomega = 1.0\ne = 1.0\n").unwrap();
        let m = cfg.resolve_model().unwrap();
        assert_eq!(m.lambda, vec![-1.0]);
        assert!((m.theta - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.c[0] - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);

        let cfg =
            RunConfig::parse("[model.acoustic_shell]\nmass = 1.0\nyoung = 1.0\nradius = 1.0\n")
                .unwrap();
        let m = cfg.resolve_model().unwrap();
        assert_eq!(m.lambda, vec![-0.5]);
        assert_eq!(m.theta, -0.5);
        assert!((m.c[0] + std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn duplicate_eigenvalues_rejected_through_config() {
        let cfg = RunConfig::parse("[model]\neigenvalues = [-1.0, -1.0]\ncoupling = [1.0, 1.0]\n").unwrap();
        match cfg.resolve_model() {
            Err(Error::DuplicateEigenvalue { .. }) => {}
            other => panic!("expected DuplicateEigenvalue, got {other:?}"),
        }
    }
}
