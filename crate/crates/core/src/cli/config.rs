//! Declarative experiment configuration (TOML). Unknown keys are rejected
//! everywhere; semantic validation runs before any computation.

use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, KernelModel};
use crate::linalg;
use crate::regression::Loss;

use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Regress,
    RegressWithInitial,
    PredictCompare,
    DensityCombine,
    KernelCheck,
    Simulate,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    pub kernel: KernelConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub data: Option<DataConfig>,
    #[serde(default)]
    pub initial: Option<InitialConfig>,
    #[serde(default)]
    pub predict: Option<PredictConfig>,
    #[serde(default)]
    pub density: Option<DensityConfig>,
    #[serde(default)]
    pub simulate: Option<SimulateConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub family: String,
    pub diffusion: Option<f64>,
    pub theta: Option<f64>,
    pub sigma: Option<f64>,
    pub truncation_tol: Option<f64>,
    pub max_terms: Option<usize>,
    pub t_floor: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Relative singular-value cutoff; `None` uses max(rows, cols)·ε.
    pub rtol: Option<f64>,
    pub t_epsilon: f64,
    pub clamp_tol: f64,
    pub initial_weight: f64,
    pub loss: String,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rtol: None,
            t_epsilon: 1e-6,
            clamp_tol: linalg::DEFAULT_CLAMP_TOL,
            initial_weight: 1.0,
            loss: "squared".into(),
        }
    }
}

impl SolverConfig {
    pub fn loss(&self) -> Result<Loss> {
        match self.loss.as_str() {
            "squared" => Ok(Loss::Squared),
            other => Err(Error::Config(format!(
                "unknown loss tag {other:?}; only \"squared\" ships"
            ))),
        }
    }

    pub fn rtol_for(&self, rows: usize, cols: usize) -> f64 {
        self.rtol
            .unwrap_or_else(|| linalg::default_rtol(rows, cols))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub source: DataSource,
    /// CSV path (source = "csv").
    pub path: Option<String>,
    /// Inline snapshots (source = "inline").
    #[serde(default)]
    pub snapshots: Vec<InlineSnapshot>,
    /// Synthetic sensors (source = "synthetic").
    pub sensor_count: Option<usize>,
    /// Shared synthetic truth sampled at `times`.
    pub times: Option<Vec<f64>>,
    pub truth: Option<TruthSpec>,
    /// Per-snapshot synthetic truths (alternative to `times` + `truth`).
    #[serde(default)]
    pub snapshot_truths: Vec<SnapshotTruth>,
    #[serde(default)]
    pub error: ErrorSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataSource {
    Inline,
    Synthetic,
    Csv,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineSnapshot {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotTruth {
    pub t: f64,
    pub truth: TruthSpec,
}

/// Catalog of truth fields u(x, t).
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TruthSpec {
    /// `height - slope·|x - 1/2|`, constant in t.
    Tent { height: f64, slope: f64 },
    /// `(2πσ²)^{-1/2} exp(-(x-center)²/(2σ²))`, constant in t.
    GaussianBump { center: f64, sigma: f64 },
    /// `4(1-x)³` on [0,1], constant in t.
    BetaCubic,
    /// Constant value, constant in t.
    Constant { value: f64 },
    /// Evolve an initial profile under the configured kernel family's
    /// dynamics (spectral projection for interval families; closed form for
    /// a Gaussian bump under the line heat kernel).
    Evolved {
        initial: Box<TruthSpec>,
        #[serde(default = "default_modes")]
        modes: usize,
        #[serde(default = "default_quad_nodes")]
        quad_nodes: usize,
    },
}

fn default_modes() -> usize {
    200
}

fn default_quad_nodes() -> usize {
    4001
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ErrorSpec {
    #[default]
    None,
    /// `amplitude · sin(2π · frequency · x)`, the same at every snapshot.
    Sine {
        amplitude: f64,
        #[serde(default = "default_frequency")]
        frequency: f64,
    },
    /// Independent N(0, σ²) draws per sensor and snapshot.
    Gaussian { sigma: f64 },
}

fn default_frequency() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub truth: TruthSpec,
    #[serde(default)]
    pub t0: f64,
    pub sensor_count: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictConfig {
    pub time: f64,
    #[serde(default = "default_query_points")]
    pub query_points: usize,
    pub idw_bandwidth: f64,
    /// Optional grid for bandwidth cross validation (reported, not used for
    /// the comparison unless `use_cv_bandwidth` is set).
    pub idw_bandwidth_grid: Option<Vec<f64>>,
    #[serde(default = "default_cv_folds")]
    pub cv_folds: usize,
    #[serde(default)]
    pub use_cv_bandwidth: bool,
    #[serde(default)]
    pub cv_by_snapshot: bool,
    /// Also fit the static-kernel pseudo-inverse variant and report its RMSE.
    #[serde(default)]
    pub static_kernel_variant: bool,
}

fn default_query_points() -> usize {
    100
}

fn default_cv_folds() -> usize {
    5
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    pub times: Vec<f64>,
    pub sample_sizes: Vec<usize>,
    pub initial: TruthSpec,
    pub eval_time: f64,
    #[serde(default = "default_eval_points")]
    pub eval_points: usize,
    /// Also emit the clipped-and-rescaled combined curve.
    #[serde(default)]
    pub renormalize: bool,
}

fn default_eval_points() -> usize {
    401
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub x0: f64,
    pub dt: f64,
    pub n_steps: usize,
    #[serde(default = "default_n_paths")]
    pub n_paths: usize,
    /// Path positions recorded at these times become density-style snapshot
    /// CSV rows.
    pub observe_times: Vec<f64>,
}

fn default_n_paths() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Spatial resolution of emitted grid CSVs.
    pub grid_points: usize,
    /// Times at which prediction grids are emitted; defaults to the data
    /// snapshot times.
    pub grid_times: Option<Vec<f64>>,
    /// Attach the truth column to grids when a synthetic truth exists.
    pub include_truth: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            grid_points: 201,
            grid_times: None,
            include_truth: true,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn kernel_model(&self) -> Result<KernelModel> {
        let k = &self.kernel;
        let family = match k.family.as_str() {
            "gaussian-heat" => KernelFamily::GaussianHeat {
                diffusion: k.diffusion.unwrap_or(0.5),
            },
            "dirichlet-heat" => KernelFamily::DirichletHeat,
            "neumann-heat" => KernelFamily::NeumannHeat,
            "ornstein-uhlenbeck" => KernelFamily::OrnsteinUhlenbeck {
                theta: k.theta.ok_or_else(|| {
                    Error::Config("ornstein-uhlenbeck needs `theta`".into())
                })?,
                sigma: k.sigma.ok_or_else(|| {
                    Error::Config("ornstein-uhlenbeck needs `sigma`".into())
                })?,
            },
            other => {
                return Err(Error::Config(format!(
                    "unknown kernel family {other:?} (expected gaussian-heat, dirichlet-heat, neumann-heat or ornstein-uhlenbeck)"
                )));
            }
        };
        KernelModel::with_tolerances(
            family,
            k.truncation_tol.unwrap_or(crate::kernels::DEFAULT_TRUNCATION_TOL),
            k.max_terms.unwrap_or(crate::kernels::DEFAULT_MAX_TERMS),
            k.t_floor.unwrap_or(crate::kernels::DEFAULT_T_FLOOR),
        )
        .map_err(|e| Error::Config(format!("kernel: {e}")))
    }

    fn validate(&self) -> Result<()> {
        // instantiating the model validates all kernel parameters
        self.kernel_model()?;
        self.solver.loss()?;
        if let Some(rtol) = self.solver.rtol {
            if !(0.0..1.0).contains(&rtol) {
                return Err(Error::Config(format!("solver.rtol {rtol} not in [0, 1)")));
            }
        }
        if self.solver.t_epsilon <= 0.0 {
            return Err(Error::Config("solver.t_epsilon must be positive".into()));
        }
        if self.solver.initial_weight <= 0.0 {
            return Err(Error::Config("solver.initial_weight must be positive".into()));
        }
        if self.output.grid_points < 2 {
            return Err(Error::Config("output.grid_points must be at least 2".into()));
        }

        match self.kind {
            ExperimentKind::Regress | ExperimentKind::RegressWithInitial => {
                let data = self
                    .data
                    .as_ref()
                    .ok_or_else(|| Error::Config("regress kinds need a [data] section".into()))?;
                data.validate()?;
                if self.kind == ExperimentKind::RegressWithInitial && self.initial.is_none() {
                    return Err(Error::Config(
                        "regress-with-initial needs an [initial] section".into(),
                    ));
                }
            }
            ExperimentKind::PredictCompare => {
                let data = self.data.as_ref().ok_or_else(|| {
                    Error::Config("predict-compare needs a [data] section".into())
                })?;
                data.validate()?;
                let p = self.predict.as_ref().ok_or_else(|| {
                    Error::Config("predict-compare needs a [predict] section".into())
                })?;
                if p.idw_bandwidth <= 0.0 {
                    return Err(Error::Config(format!(
                        "predict.idw_bandwidth must be positive, got {}",
                        p.idw_bandwidth
                    )));
                }
                if p.query_points < 2 {
                    return Err(Error::Config("predict.query_points must be ≥ 2".into()));
                }
                if p.use_cv_bandwidth && p.idw_bandwidth_grid.is_none() {
                    return Err(Error::Config(
                        "predict.use_cv_bandwidth needs predict.idw_bandwidth_grid".into(),
                    ));
                }
            }
            ExperimentKind::DensityCombine => {
                let d = self.density.as_ref().ok_or_else(|| {
                    Error::Config("density-combine needs a [density] section".into())
                })?;
                if d.times.is_empty() || d.times.len() != d.sample_sizes.len() {
                    return Err(Error::Config(
                        "density.times and density.sample_sizes must be nonempty and equal length"
                            .into(),
                    ));
                }
                if d.sample_sizes.iter().any(|&n| n == 0) {
                    return Err(Error::Config("density.sample_sizes must be positive".into()));
                }
            }
            ExperimentKind::KernelCheck => {}
            ExperimentKind::Simulate => {
                let s = self
                    .simulate
                    .as_ref()
                    .ok_or_else(|| Error::Config("simulate needs a [simulate] section".into()))?;
                if s.dt <= 0.0 {
                    return Err(Error::Config("simulate.dt must be positive".into()));
                }
                if s.n_steps == 0 || s.n_paths == 0 {
                    return Err(Error::Config(
                        "simulate.n_steps and simulate.n_paths must be positive".into(),
                    ));
                }
                for &t in &s.observe_times {
                    let horizon = s.dt * s.n_steps as f64;
                    if t < 0.0 || t > horizon {
                        return Err(Error::Config(format!(
                            "simulate.observe_times entry {t} outside [0, {horizon}]"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

impl DataConfig {
    fn validate(&self) -> Result<()> {
        match self.source {
            DataSource::Inline => {
                if self.snapshots.is_empty() {
                    return Err(Error::Config(
                        "inline data needs at least one [[data.snapshots]] entry".into(),
                    ));
                }
                for s in &self.snapshots {
                    if s.x.len() != s.y.len() || s.x.is_empty() {
                        return Err(Error::Config(format!(
                            "inline snapshot at t = {} needs equal nonempty x and y lists",
                            s.t
                        )));
                    }
                }
            }
            DataSource::Csv => {
                if self.path.is_none() {
                    return Err(Error::Config("csv data needs `data.path`".into()));
                }
            }
            DataSource::Synthetic => {
                let n = self.sensor_count.unwrap_or(0);
                if n < 2 {
                    return Err(Error::Config(
                        "synthetic data needs data.sensor_count ≥ 2".into(),
                    ));
                }
                let shared = self.times.is_some() && self.truth.is_some();
                let per_snapshot = !self.snapshot_truths.is_empty();
                if shared == per_snapshot {
                    return Err(Error::Config(
                        "synthetic data needs either (data.times + data.truth) or \
                         [[data.snapshot_truths]], not both or neither"
                            .into(),
                    ));
                }
                if let Some(times) = &self.times {
                    if times.is_empty() {
                        return Err(Error::Config("data.times must be nonempty".into()));
                    }
                }
            }
        }
        if let ErrorSpec::Gaussian { sigma } = self.error {
            if sigma < 0.0 {
                return Err(Error::Config(format!(
                    "data.error gaussian sigma must be nonnegative, got {sigma}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
kind = "regress"
seed = 42

[kernel]
family = "gaussian-heat"
diffusion = 0.5

[data]
source = "inline"

[[data.snapshots]]
t = 1.0
x = [1.0, 2.0]
y = [1.0, 1.0]

[[data.snapshots]]
t = 2.0
x = [1.0, 2.0]
y = [1.0, 2.0]
"#;

    #[test]
    fn parses_minimal_config() {
        let c = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(c.kind, ExperimentKind::Regress);
        assert_eq!(c.seed, 42);
        let model = c.kernel_model().unwrap();
        assert_eq!(
            model.family(),
            KernelFamily::GaussianHeat { diffusion: 0.5 }
        );
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = MINIMAL.replace("seed = 42", "seed = 42\nbogus_key = 1");
        assert!(matches!(
            ExperimentConfig::from_toml_str(&text),
            Err(Error::Config(_))
        ));
        let text = MINIMAL.replace("diffusion = 0.5", "diffusion = 0.5\nwhatever = 3");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn negative_parameters_rejected() {
        let text = MINIMAL.replace("diffusion = 0.5", "diffusion = -1.0");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn unknown_loss_rejected() {
        let text = format!("{MINIMAL}\n[solver]\nloss = \"hinge\"\n");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn missing_sections_are_reported() {
        let text = r#"
kind = "predict-compare"
[kernel]
family = "dirichlet-heat"
"#;
        let err = ExperimentConfig::from_toml_str(text).unwrap_err();
        assert!(err.to_string().contains("[data]"), "{err}");
    }

    #[test]
    fn synthetic_requires_one_truth_style() {
        let text = r#"
kind = "regress"
[kernel]
family = "dirichlet-heat"
[data]
source = "synthetic"
sensor_count = 10
"#;
        assert!(ExperimentConfig::from_toml_str(text).is_err());
    }
}
