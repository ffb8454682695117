//! TOML experiment configuration. Every key has a default except
//! `experiment` and, for commands that need one, the Hamiltonian source.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ansatz::AnsatzFamily;
use crate::cluster::{ClusterParameters, NoiseSource};
use crate::error::{Error, Result};
use crate::fermion::AimParameters;
use crate::noise::Durations;
use crate::vqe::OptimizerConfig;

pub const DEFAULT_SEED: u64 = 20240601;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub description: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<HamiltonianConfig>,
    #[serde(default)]
    pub ansatz: AnsatzConfig,
    #[serde(default)]
    pub backend: BackendConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologyConfig>,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation: Option<CorrelationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jmodel: Option<JModelConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianConfig {
    /// Listing file, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builder: Option<BuilderConfig>,
    /// Electron count of the reference; defaults to the exact ground state's sector.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_electrons: Option<usize>,
    /// Onsite repulsion already contained in the listing, Hartree.
    #[serde(default = "default_base_u")]
    pub base_u: f64,
    /// Number of impurity sites (the lowest sites).
    #[serde(default = "default_impurities")]
    pub n_impurity: usize,
}

fn default_base_u() -> f64 {
    0.29340
}

fn default_impurities() -> usize {
    2
}

/// AIM parameters in Hartree; matrices are row lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuilderConfig {
    pub n_impurity: usize,
    pub n_bath: usize,
    #[serde(default)]
    pub eps_n: Vec<Vec<f64>>,
    #[serde(default)]
    pub eps_a: Vec<Vec<f64>>,
    #[serde(default)]
    pub v: Vec<Vec<f64>>,
    #[serde(default)]
    pub mu: f64,
    #[serde(default)]
    pub u: f64,
    #[serde(default)]
    pub j_hund: f64,
}

impl BuilderConfig {
    pub fn to_parameters(&self) -> Result<AimParameters> {
        let matrix = |field: &str, rows: &[Vec<f64>], r: usize, c: usize| -> Result<DMatrix<f64>> {
            if rows.is_empty() {
                return Ok(DMatrix::zeros(r, c));
            }
            if rows.len() != r || rows.iter().any(|row| row.len() != c) {
                return Err(Error::config(
                    format!("hamiltonian.builder.{field}"),
                    format!("expected a {r} x {c} matrix"),
                ));
            }
            Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
        };
        let nb = self.n_bath;
        Ok(AimParameters {
            n_impurity: self.n_impurity,
            n_bath: nb,
            eps_n: matrix("eps_n", &self.eps_n, nb, nb)?,
            eps_a: matrix("eps_a", &self.eps_a, nb, nb)?,
            v: matrix("v", &self.v, nb, self.n_impurity)?,
            mu: self.mu,
            u: self.u,
            j_hund: self.j_hund,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzConfig {
    #[serde(default = "default_family")]
    pub family: AnsatzFamily,
    #[serde(default = "default_reps")]
    pub reps: usize,
    /// Occupied qubits of the reference; defaults to the lowest onsite energies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Vec<usize>>,
}

fn default_family() -> AnsatzFamily {
    AnsatzFamily::GeneralizedUCCSD
}

fn default_reps() -> usize {
    3
}

impl Default for AnsatzConfig {
    fn default() -> Self {
        Self {
            family: default_family(),
            reps: default_reps(),
            reference: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BackendConfig {
    #[default]
    Exact,
    Sampled {
        #[serde(default = "default_shots")]
        shots: u64,
    },
    Density,
}

fn default_shots() -> u64 {
    8192
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Thermal,
    Depolarizing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub kind: NoiseKind,
    /// Logical qubits carrying noise; all qubits when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<usize>>,
    #[serde(default = "one")]
    pub scale: f64,
    /// Seed for the T1/T2 draw; the master seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "mean_t1")]
    pub mean_t1: f64,
    #[serde(default = "ten")]
    pub sd_t1: f64,
    #[serde(default = "mean_t2")]
    pub mean_t2: f64,
    #[serde(default = "ten")]
    pub sd_t2: f64,
    #[serde(default)]
    pub p1: f64,
    /// Two-qubit depolarizing probability; `p1` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p2: Option<f64>,
    #[serde(default)]
    pub durations: Durations,
    #[serde(default)]
    pub measurement: bool,
}

fn one() -> f64 {
    1.0
}
fn ten() -> f64 {
    10.0
}
fn mean_t1() -> f64 {
    50.0
}
fn mean_t2() -> f64 {
    70.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlacementRef {
    Preset(String),
    Mapping(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyConfig {
    /// `heavy_hex_7` or `custom` (with `n_physical` and `edges`).
    #[serde(default = "default_map")]
    pub map: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_physical: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<(usize, usize)>,
    #[serde(default = "default_placement")]
    pub placement: PlacementRef,
}

fn default_map() -> String {
    "heavy_hex_7".into()
}

fn default_placement() -> PlacementRef {
    PlacementRef::Preset("Config-A".into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    #[default]
    ParameterShiftGd,
    NelderMead,
    Spsa,
}

/// Optimizer keys; unset ones take the optimizer's defaults.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    #[serde(default)]
    pub kind: OptimizerKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gradient_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability: Option<f64>,
    /// SPSA perturbation seed; the master seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl OptimizerSection {
    pub fn resolve(&self, master_seed: u64) -> Result<OptimizerConfig> {
        let cfg = match self.kind {
            OptimizerKind::ParameterShiftGd => {
                let OptimizerConfig::ParameterShiftGd {
                    learning_rate,
                    max_iterations,
                    gradient_tol,
                } = OptimizerConfig::gradient_descent(self.max_iterations.unwrap_or(300))
                else {
                    unreachable!()
                };
                OptimizerConfig::ParameterShiftGd {
                    learning_rate: self.learning_rate.unwrap_or(learning_rate),
                    max_iterations,
                    gradient_tol: self.gradient_tol.unwrap_or(gradient_tol),
                }
            }
            OptimizerKind::NelderMead => {
                let OptimizerConfig::NelderMead {
                    initial_scale,
                    x_tol,
                    f_tol,
                    max_iterations,
                } = OptimizerConfig::nelder_mead(self.max_iterations.unwrap_or(2000))
                else {
                    unreachable!()
                };
                OptimizerConfig::NelderMead {
                    initial_scale: self.initial_scale.unwrap_or(initial_scale),
                    x_tol: self.x_tol.unwrap_or(x_tol),
                    f_tol: self.f_tol.unwrap_or(f_tol),
                    max_iterations,
                }
            }
            OptimizerKind::Spsa => {
                let OptimizerConfig::Spsa {
                    a,
                    c,
                    alpha,
                    gamma,
                    stability,
                    max_iterations,
                    seed,
                } = OptimizerConfig::spsa(
                    self.max_iterations.unwrap_or(300),
                    self.seed.unwrap_or(master_seed),
                )
                else {
                    unreachable!()
                };
                OptimizerConfig::Spsa {
                    a: self.a.unwrap_or(a),
                    c: self.c.unwrap_or(c),
                    alpha: self.alpha.unwrap_or(alpha),
                    gamma: self.gamma.unwrap_or(gamma),
                    stability: self.stability.unwrap_or(stability),
                    max_iterations,
                    seed,
                }
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Uniform depolarizing probability on every targeted qubit.
    DepolarizingP,
    /// Impurity onsite repulsion in eV.
    OnsiteU,
    /// Logical qubit sets receiving thermal noise.
    NoiseTargets,
    /// Preset names or explicit mappings.
    Placement,
    AnsatzFamily,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::DepolarizingP => "depolarizing_p",
            SweepVariable::OnsiteU => "onsite_u_ev",
            SweepVariable::NoiseTargets => "noise_targets",
            SweepVariable::Placement => "placement",
            SweepVariable::AnsatzFamily => "ansatz_family",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValue {
    Number(f64),
    Text(String),
    Qubits(Vec<usize>),
}

impl SweepValue {
    /// The CSV spelling.
    pub fn label(&self) -> String {
        match self {
            SweepValue::Number(x) => format!("{x:e}"),
            SweepValue::Text(s) => s.clone(),
            SweepValue::Qubits(q) => q
                .iter()
                .map(|q| q.to_string())
                .collect::<Vec<_>>()
                .join(" "),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub values: Vec<SweepValue>,
    /// Noise seeds per value; the master seed alone when absent.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_sites")]
    pub correlation_sites: (usize, usize),
}

fn default_sites() -> (usize, usize) {
    (0, 1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationRow {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub placement: Option<PlacementRef>,
    pub family: AnsatzFamily,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationConfig {
    pub rows: Vec<CorrelationRow>,
    #[serde(default = "default_sites")]
    pub sites: (usize, usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JModelConfig {
    #[serde(default = "ClusterParameters::hemocyanin")]
    pub parameters: ClusterParameters,
    pub sources: Vec<NoiseSource>,
    pub amplitudes: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    10_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
    /// Wall-clock times in traces; off keeps outputs bit-for-bit reproducible.
    #[serde(default)]
    pub record_timing: bool,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_out(),
            record_timing: false,
        }
    }
}

/// A parsed config together with the directory relative paths resolve against.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let field = e
                .message()
                .split('`')
                .nth(1)
                .map(str::to_string)
                .unwrap_or_else(|| "<document>".into());
            Error::config(field, e.message().trim().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(json))
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiment.trim().is_empty() {
            return Err(Error::config("experiment", "must not be empty"));
        }
        if let Some(h) = &self.hamiltonian {
            match (&h.file, &h.builder) {
                (Some(_), Some(_)) => {
                    return Err(Error::config(
                        "hamiltonian",
                        "give either `file` or `builder`, not both",
                    ))
                }
                (None, None) => {
                    return Err(Error::config("hamiltonian.file", "missing Hamiltonian source"))
                }
                _ => {}
            }
        }
        if let Some(n) = &self.noise {
            if !(n.scale >= 0.0) {
                return Err(Error::config("noise.scale", "must be non-negative"));
            }
            for (field, p) in [("noise.p1", Some(n.p1)), ("noise.p2", n.p2)] {
                if let Some(p) = p {
                    if !(0.0..=1.0).contains(&p) {
                        return Err(Error::config(field, format!("probability {p} outside [0, 1]")));
                    }
                }
            }
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(Error::config("sweep.values", "must not be empty"));
            }
        }
        self.optimizer.resolve(self.seed)?;
        Ok(())
    }
}

impl LoadedConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::config("--config", format!("cannot read {}: {e}", path.display()))
        })?;
        let config = ExperimentConfig::from_toml(&text)?;
        let base_dir = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Ok(Self { config, base_dir })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}
