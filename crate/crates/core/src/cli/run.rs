//! Experiment orchestration: build data per the config, run the requested
//! pipeline, and emit the artifact files (data/coefficients/grid CSVs,
//! metrics JSON, manifest).
//!
//! Everything is computed in memory first; files are only written once the
//! whole computation has succeeded, so a failing run leaves no partial
//! outputs.

use crate::baselines;
use crate::checks;
use crate::cli::config::{
    DataConfig, DataSource, ErrorSpec, ExperimentConfig, ExperimentKind, TruthSpec,
};
use crate::data::{DensitySampleSet, DensitySnapshot, Snapshot, SnapshotSet};
use crate::density;
use crate::dynamics::{self, NoiseModel, SdeSpec, SpectralFunction};
use crate::error::{Error, Result};
use crate::io::{self, CoefficientRow, GridRow, Metrics};
use crate::kernels::{Domain, KernelModel};
use crate::regression::{self, FitResult};

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Everything a run produced.
pub struct RunArtifacts {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub metrics: Metrics,
    pub seed: u64,
}

/// A data-generating truth field u(x, t).
enum TruthField {
    Static(TruthSpec),
    Spectral(SpectralFunction),
    GaussianEvolved { center: f64, var0: f64, d: f64 },
}

fn eval_static(spec: &TruthSpec, x: f64) -> f64 {
    match spec {
        TruthSpec::Tent { height, slope } => height - slope * (x - 0.5).abs(),
        TruthSpec::GaussianBump { center, sigma } => {
            (-(x - center) * (x - center) / (2.0 * sigma * sigma)).exp()
                / (2.0 * PI * sigma * sigma).sqrt()
        }
        TruthSpec::BetaCubic => 4.0 * (1.0 - x) * (1.0 - x) * (1.0 - x),
        TruthSpec::Constant { value } => *value,
        TruthSpec::Evolved { .. } => f64::NAN,
    }
}

impl TruthField {
    fn build(spec: &TruthSpec, model: &KernelModel) -> Result<TruthField> {
        match spec {
            TruthSpec::Evolved {
                initial,
                modes,
                quad_nodes,
            } => {
                if matches!(initial.as_ref(), TruthSpec::Evolved { .. }) {
                    return Err(Error::Config("nested evolved truths are not supported".into()));
                }
                match model.spectral_basis() {
                    Some(basis) => {
                        let init = initial.clone();
                        let f = dynamics::project(
                            &basis,
                            move |x| eval_static(&init, x),
                            *modes,
                            *quad_nodes,
                        )?;
                        Ok(TruthField::Spectral(f))
                    }
                    None => match initial.as_ref() {
                        TruthSpec::GaussianBump { center, sigma } => {
                            Ok(TruthField::GaussianEvolved {
                                center: *center,
                                var0: sigma * sigma,
                                d: model.diffusion_coefficient(),
                            })
                        }
                        _ => Err(Error::Config(
                            "the line heat kernel only evolves gaussian-bump initials in closed \
                             form; use a spectral family for other initial profiles"
                                .into(),
                        )),
                    },
                }
            }
            other => Ok(TruthField::Static(other.clone())),
        }
    }

    fn eval(&self, x: f64, t: f64) -> f64 {
        match self {
            TruthField::Static(spec) => eval_static(spec, x),
            TruthField::Spectral(f) => f.evolve(t, x),
            TruthField::GaussianEvolved { center, var0, d } => {
                let var = var0 + 2.0 * d * t;
                (-(x - center) * (x - center) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
            }
        }
    }
}

/// Synthetic data plus the truth evaluator for scoring, when one exists.
struct BuiltData {
    data: SnapshotSet,
    /// Shared truth field (synthetic shared-truth style).
    truth: Option<TruthField>,
    /// Per-snapshot static truths (synthetic per-snapshot style).
    snapshot_truths: Vec<Option<TruthSpec>>,
}

impl BuiltData {
    fn truth_at(&self, k: usize, x: f64, t: f64) -> Option<f64> {
        if let Some(field) = &self.truth {
            return Some(field.eval(x, t));
        }
        self.snapshot_truths
            .get(k)
            .and_then(|s| s.as_ref())
            .map(|spec| eval_static(spec, x))
    }
}

fn build_data(
    cfg: &DataConfig,
    model: &KernelModel,
    seed: u64,
    config_dir: &Path,
) -> Result<BuiltData> {
    match cfg.source {
        DataSource::Inline => {
            let snapshots = cfg
                .snapshots
                .iter()
                .map(|s| {
                    Snapshot::new(s.t, s.x.iter().cloned().zip(s.y.iter().cloned()).collect())
                })
                .collect();
            Ok(BuiltData {
                data: SnapshotSet::new(snapshots)?,
                truth: None,
                snapshot_truths: Vec::new(),
            })
        }
        DataSource::Csv => {
            let raw = cfg.path.as_ref().expect("validated");
            let path = config_dir.join(raw);
            Ok(BuiltData {
                data: io::read_snapshot_csv(&path)?,
                truth: None,
                snapshot_truths: Vec::new(),
            })
        }
        DataSource::Synthetic => {
            let n = cfg.sensor_count.expect("validated");
            let sensors = dynamics::equispaced(0.0, 1.0, n);
            let mut snapshots = Vec::new();
            let mut snapshot_truths = Vec::new();
            let mut shared_truth = None;

            let make_snapshot = |truth: &dyn Fn(f64, f64) -> f64,
                                 t: f64,
                                 k: usize|
             -> Snapshot {
                match &cfg.error {
                    ErrorSpec::None => {
                        dynamics::synth_measurements(truth, &sensors, t, &NoiseModel::None, seed)
                    }
                    ErrorSpec::Sine {
                        amplitude,
                        frequency,
                    } => {
                        let a = *amplitude;
                        let f = *frequency;
                        let e = move |x: f64| a * (2.0 * PI * f * x).sin();
                        dynamics::synth_measurements(
                            truth,
                            &sensors,
                            t,
                            &NoiseModel::Deterministic(&e),
                            seed,
                        )
                    }
                    ErrorSpec::Gaussian { sigma } => dynamics::synth_measurements(
                        truth,
                        &sensors,
                        t,
                        &NoiseModel::IidGaussian { sigma: *sigma },
                        seed.wrapping_add(k as u64),
                    ),
                }
            };

            if let (Some(times), Some(truth_spec)) = (&cfg.times, &cfg.truth) {
                let field = TruthField::build(truth_spec, model)?;
                for (k, &t) in times.iter().enumerate() {
                    snapshots.push(make_snapshot(&|x, tt| field.eval(x, tt), t, k));
                }
                shared_truth = Some(field);
            } else {
                for (k, st) in cfg.snapshot_truths.iter().enumerate() {
                    let spec = st.truth.clone();
                    snapshots.push(make_snapshot(&|x, _| eval_static(&spec, x), st.t, k));
                    snapshot_truths.push(Some(st.truth.clone()));
                }
            }
            Ok(BuiltData {
                data: SnapshotSet::new(snapshots)?,
                truth: shared_truth,
                snapshot_truths,
            })
        }
    }
}

fn spatial_grid(model: &KernelModel, data: Option<&SnapshotSet>, points: usize) -> Vec<f64> {
    match model.domain() {
        Domain::UnitInterval => dynamics::equispaced(0.0, 1.0, points),
        Domain::RealLine => {
            let (mut lo, mut hi) = (-2.0f64, 2.0f64);
            if let Some(d) = data {
                for s in d.snapshots() {
                    for &(x, _) in &s.points {
                        lo = lo.min(x - 2.0);
                        hi = hi.max(x + 2.0);
                    }
                }
            }
            dynamics::equispaced(lo, hi, points)
        }
    }
}

fn coefficient_rows(fit: &FitResult) -> Vec<CoefficientRow> {
    fit.center_index
        .iter()
        .zip(fit.centers.iter())
        .zip(fit.center_times.iter())
        .zip(fit.coefficients.iter())
        .map(|((((k, i), &x), &t), &a)| CoefficientRow {
            snapshot: k + 1,
            i: i + 1,
            x_center: x,
            t_snapshot: t,
            coefficient: a,
        })
        .collect()
}

fn density_coefficient_rows(est: &density::DensityEstimate) -> Vec<CoefficientRow> {
    est.center_index
        .iter()
        .zip(est.centers.iter())
        .zip(est.center_times.iter())
        .zip(est.coefficients.iter())
        .map(|((((k, i), &x), &t), &b)| CoefficientRow {
            snapshot: k + 1,
            i: i + 1,
            x_center: x,
            t_snapshot: t,
            coefficient: b,
        })
        .collect()
}

fn add_coefficient_metrics(metrics: &mut Metrics, fit: &FitResult) {
    if fit.coefficients.len() <= 16 {
        for (j, a) in fit.coefficients.iter().enumerate() {
            metrics.insert(format!("coefficient_{j}"), *a);
        }
    }
    metrics.insert("coefficient_count", fit.coefficients.len() as f64);
    metrics.insert("residual_norm", fit.residual_norm);
}

struct Emitter {
    out_dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Emitter {
    fn new(out_dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(out_dir)
            .map_err(Error::io(format!("creating {}", out_dir.display())))?;
        Ok(Emitter {
            out_dir: out_dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.out_dir.join(name);
        self.files.push(p.clone());
        p
    }
}

/// Run one experiment. `config_bytes` is the raw config text (hashed into
/// the manifest); `seed_override` replaces the config seed when given.
pub fn run(
    config: &ExperimentConfig,
    config_bytes: &[u8],
    config_dir: &Path,
    out_dir: &Path,
    seed_override: Option<u64>,
    quiet: bool,
) -> Result<RunArtifacts> {
    let started = Instant::now();
    let seed = seed_override.unwrap_or(config.seed);
    let model = config.kernel_model()?;
    let mut metrics = Metrics::new();
    let mut emitter = Emitter::new(out_dir)?;

    match config.kind {
        ExperimentKind::Regress | ExperimentKind::RegressWithInitial => run_regress(
            config, &model, seed, config_dir, &mut metrics, &mut emitter,
        )?,
        ExperimentKind::PredictCompare => run_predict_compare(
            config, &model, seed, config_dir, &mut metrics, &mut emitter,
        )?,
        ExperimentKind::DensityCombine => {
            run_density_combine(config, &model, seed, &mut metrics, &mut emitter)?
        }
        ExperimentKind::KernelCheck => {
            let props = checks::kernel_check(&model, seed)?;
            if !quiet {
                for p in &props {
                    let status = if p.pass { "pass" } else { "FAIL" };
                    eprintln!(
                        "{status} {} measured {:?} tolerance {}",
                        p.name, p.measured, p.tolerance
                    );
                }
            }
            metrics.extend_properties(props);
        }
        ExperimentKind::Simulate => run_simulate(config, &model, seed, &mut metrics, &mut emitter)?,
    }

    metrics.insert("runtime_seconds", started.elapsed().as_secs_f64());
    let metrics_path = emitter.path("metrics.json");
    io::write_metrics_json(&metrics_path, &metrics)?;

    let manifest_path = emitter.out_dir.join("manifest.json");
    io::write_manifest(
        &manifest_path,
        &io::sha256_hex(config_bytes),
        seed,
        &emitter.files,
    )?;
    let mut files = emitter.files;
    files.push(manifest_path);

    if !quiet {
        eprintln!(
            "wrote {} files to {}",
            files.len(),
            out_dir.display()
        );
    }
    Ok(RunArtifacts {
        out_dir: out_dir.to_path_buf(),
        files,
        metrics,
        seed,
    })
}

fn run_regress(
    config: &ExperimentConfig,
    model: &KernelModel,
    seed: u64,
    config_dir: &Path,
    metrics: &mut Metrics,
    emitter: &mut Emitter,
) -> Result<()> {
    let data_cfg = config.data.as_ref().expect("validated");
    let built = build_data(data_cfg, model, seed, config_dir)?;
    let loss = config.solver.loss()?;

    let n = built.data.total_points();
    let fit = if config.kind == ExperimentKind::RegressWithInitial {
        let init_cfg = config.initial.as_ref().expect("validated");
        let sensor_count = init_cfg
            .sensor_count
            .or(data_cfg.sensor_count)
            .ok_or_else(|| Error::Config("initial needs a sensor_count".into()))?;
        let sensors = dynamics::equispaced(0.0, 1.0, sensor_count);
        let init_field = TruthField::build(&init_cfg.truth, model)?;
        let initial = Snapshot::new(
            init_cfg.t0,
            sensors
                .iter()
                .map(|&x| (x, init_field.eval(x, init_cfg.t0)))
                .collect(),
        );
        let total = n + initial.len();
        regression::fit_with_initial_weighted(
            model,
            &built.data,
            &initial,
            config.solver.t_epsilon,
            config.solver.initial_weight,
            config.solver.rtol_for(total, total),
        )?
    } else {
        let system = regression::assemble(model, &built.data)?;
        regression::fit(model, &system, config.solver.rtol_for(n, n))?
    };

    metrics.insert(
        "empirical_risk",
        regression::empirical_risk(&fit, &built.data, loss)?,
    );
    add_coefficient_metrics(metrics, &fit);

    // grids at the requested times (default: data snapshot times)
    let times = config
        .output
        .grid_times
        .clone()
        .unwrap_or_else(|| built.data.snapshots().iter().map(|s| s.t).collect());
    let xs = spatial_grid(model, Some(&built.data), config.output.grid_points);
    let mut rows = Vec::new();
    let mut boundary_absmax = 0.0f64;
    for (k, &t) in times.iter().enumerate() {
        let mut sse = 0.0;
        let mut truth_known = true;
        for &x in &xs {
            let v = fit.predict(x, t)?;
            let tr = if config.output.include_truth {
                built.truth_at(k, x, t)
            } else {
                None
            };
            if let Some(tv) = tr {
                sse += (v - tv) * (v - tv);
            } else {
                truth_known = false;
            }
            rows.push(GridRow {
                t,
                x,
                value: v,
                value_truth: tr,
            });
        }
        if truth_known && config.output.include_truth && built.truth_at(k, xs[0], t).is_some() {
            metrics.insert(
                format!("rmse_vs_truth_t{}", k + 1),
                (sse / xs.len() as f64).sqrt(),
            );
        }
        if model.domain() == Domain::UnitInterval {
            boundary_absmax = boundary_absmax
                .max(fit.predict(0.0, t)?.abs())
                .max(fit.predict(1.0, t)?.abs());
        }
    }
    if model.domain() == Domain::UnitInterval {
        metrics.insert("boundary_absmax", boundary_absmax);
    }

    // per-snapshot interpolation comparison when a shared synthetic truth exists
    if let Some(truth) = &built.truth {
        let mut acc = 0.0;
        for snap in built.data.snapshots() {
            let single = SnapshotSet::new(vec![snap.clone()])?;
            let sys = regression::assemble(model, &single)?;
            let sfit = regression::fit(model, &sys, config.solver.rtol_for(snap.len(), snap.len()))?;
            let mut sse = 0.0;
            for &(x, _) in &snap.points {
                let r = sfit.predict(x, snap.t)? - truth.eval(x, snap.t);
                sse += r * r;
            }
            acc += sse / snap.len() as f64;
        }
        metrics.insert(
            "risk_vs_truth_per_snapshot_interp",
            acc / built.data.len() as f64,
        );
        let mut acc = 0.0;
        for snap in built.data.snapshots() {
            let mut sse = 0.0;
            for &(x, _) in &snap.points {
                let r = fit.predict(x, snap.t)? - truth.eval(x, snap.t);
                sse += r * r;
            }
            acc += sse / snap.len() as f64;
        }
        metrics.insert("risk_vs_truth_joint", acc / built.data.len() as f64);
    }

    io::write_snapshot_csv(&emitter.path("data.csv"), &built.data)?;
    io::write_coefficients_csv(&emitter.path("coefficients.csv"), &coefficient_rows(&fit))?;
    io::write_grid_csv(&emitter.path("grid.csv"), &rows)?;
    Ok(())
}

fn run_predict_compare(
    config: &ExperimentConfig,
    model: &KernelModel,
    seed: u64,
    config_dir: &Path,
    metrics: &mut Metrics,
    emitter: &mut Emitter,
) -> Result<()> {
    let data_cfg = config.data.as_ref().expect("validated");
    let predict_cfg = config.predict.as_ref().expect("validated");
    let built = build_data(data_cfg, model, seed, config_dir)?;
    let truth = built.truth.as_ref().ok_or_else(|| {
        Error::Config("predict-compare needs synthetic data with a shared truth".into())
    })?;

    let n = built.data.total_points();
    let system = regression::assemble(model, &built.data)?;
    let fit = regression::fit(model, &system, config.solver.rtol_for(n, n))?;
    metrics.insert(
        "empirical_risk",
        regression::empirical_risk(&fit, &built.data, config.solver.loss()?)?,
    );
    add_coefficient_metrics(metrics, &fit);

    let bandwidth = if predict_cfg.use_cv_bandwidth {
        let grid = predict_cfg.idw_bandwidth_grid.as_ref().expect("validated");
        let strategy = if predict_cfg.cv_by_snapshot {
            baselines::FoldStrategy::BySnapshot
        } else {
            baselines::FoldStrategy::ByPoint
        };
        let s = baselines::cross_validate_bandwidth(
            &built.data,
            grid,
            predict_cfg.cv_folds,
            seed,
            strategy,
        )?;
        metrics.insert("cv_selected_bandwidth", s);
        s
    } else {
        if let Some(grid) = &predict_cfg.idw_bandwidth_grid {
            let strategy = if predict_cfg.cv_by_snapshot {
                baselines::FoldStrategy::BySnapshot
            } else {
                baselines::FoldStrategy::ByPoint
            };
            let s = baselines::cross_validate_bandwidth(
                &built.data,
                grid,
                predict_cfg.cv_folds,
                seed,
                strategy,
            )?;
            metrics.insert("cv_selected_bandwidth", s);
        }
        predict_cfg.idw_bandwidth
    };
    metrics.insert("idw_bandwidth", bandwidth);

    let t4 = predict_cfg.time;
    let query = match model.domain() {
        Domain::UnitInterval => dynamics::equispaced(0.0, 1.0, predict_cfg.query_points),
        Domain::RealLine => spatial_grid(model, Some(&built.data), predict_cfg.query_points),
    };
    let mut pde_rows = Vec::new();
    let mut idw_rows = Vec::new();
    let mut sse_pde = 0.0;
    let mut sse_idw = 0.0;
    let mut fallback_count = 0usize;
    for &x in &query {
        let tv = truth.eval(x, t4);
        let vp = fit.predict(x, t4)?;
        let pi = baselines::idw_predict(&built.data, bandwidth, x, t4)?;
        if pi.nearest_neighbor_fallback {
            fallback_count += 1;
        }
        sse_pde += (vp - tv) * (vp - tv);
        sse_idw += (pi.value - tv) * (pi.value - tv);
        pde_rows.push(GridRow {
            t: t4,
            x,
            value: vp,
            value_truth: Some(tv),
        });
        idw_rows.push(GridRow {
            t: t4,
            x,
            value: pi.value,
            value_truth: Some(tv),
        });
    }
    let m = query.len() as f64;
    metrics.insert("rmse_pde_t4", (sse_pde / m).sqrt());
    metrics.insert("rmse_idw_t4", (sse_idw / m).sqrt());
    metrics.insert("idw_fallback_count", fallback_count as f64);

    if predict_cfg.static_kernel_variant {
        let sfit = baselines::static_kernel_fit(
            &built.data,
            bandwidth,
            config.solver.rtol_for(n, n),
        )?;
        let sse: f64 = query
            .iter()
            .map(|&x| {
                let r = sfit.predict(x, t4) - truth.eval(x, t4);
                r * r
            })
            .sum();
        metrics.insert("rmse_static_kernel_t4", (sse / m).sqrt());
    }

    // fitted curves at the data times, for the figure panels
    let mut fit_rows = Vec::new();
    for snap in built.data.snapshots() {
        for &x in &query {
            fit_rows.push(GridRow {
                t: snap.t,
                x,
                value: fit.predict(x, snap.t)?,
                value_truth: Some(truth.eval(x, snap.t)),
            });
        }
    }
    fit_rows.extend(pde_rows.iter().cloned());

    io::write_snapshot_csv(&emitter.path("data.csv"), &built.data)?;
    io::write_coefficients_csv(&emitter.path("coefficients.csv"), &coefficient_rows(&fit))?;
    io::write_grid_csv(&emitter.path("grid_pde.csv"), &fit_rows)?;
    io::write_grid_csv(&emitter.path("grid_idw.csv"), &idw_rows)?;
    Ok(())
}

fn run_density_combine(
    config: &ExperimentConfig,
    model: &KernelModel,
    seed: u64,
    metrics: &mut Metrics,
    emitter: &mut Emitter,
) -> Result<()> {
    let d = config.density.as_ref().expect("validated");
    let basis = model.spectral_basis().ok_or_else(|| {
        Error::Config("density-combine needs a spectral (bounded-domain) family".into())
    })?;
    if model.domain() != Domain::UnitInterval {
        return Err(Error::Config(
            "density-combine needs a bounded-domain family".into(),
        ));
    }
    if matches!(d.initial, TruthSpec::Evolved { .. }) {
        return Err(Error::Config(
            "density.initial must be a static profile".into(),
        ));
    }
    let init = d.initial.clone();
    let rho0 = dynamics::project(&basis, move |x| eval_static(&init, x), 200, 4001)?;

    let mut snaps = Vec::new();
    for (k, (&t, &n)) in d.times.iter().zip(d.sample_sizes.iter()).enumerate() {
        let positions = dynamics::sample_evolved(&rho0, t, n, seed.wrapping_add(k as u64))?;
        snaps.push(DensitySnapshot::new(t, positions));
    }
    let samples = DensitySampleSet::new(snaps)?;

    let combined = density::kme_combined_with(model, &samples, config.solver.clamp_tol)?;
    metrics.insert(
        "kme_risk_combined",
        density::kme_risk(&combined, &samples)?,
    );

    let t3 = d.eval_time;
    let xs = dynamics::equispaced(0.0, 1.0, d.eval_points);
    let ise_of = |est: &density::DensityEstimate| -> Result<f64> {
        let mut values = Vec::with_capacity(xs.len());
        for &x in &xs {
            let diff = est.evaluate(x, t3)? - rho0.evolve(t3, x);
            values.push(diff * diff);
        }
        let n = xs.len();
        let h = 1.0 / (n - 1) as f64;
        let mut acc = 0.0;
        for (i, v) in values.iter().enumerate() {
            let w = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += w * v;
        }
        Ok(acc * h / 3.0)
    };

    metrics.insert("ise_combined", ise_of(&combined)?);
    let (mass, min_value) = density::mass_and_negativity_report(&combined, t3, 2001)?;
    metrics.insert("mass_combined", mass);
    metrics.insert("min_value_combined", min_value);

    let mut grid_files: Vec<(String, density::DensityEstimate)> = Vec::new();
    for k in 0..samples.len() {
        let est = density::embedded_snapshot_estimate(model, &samples, k)?;
        metrics.insert(
            format!("kme_risk_snapshot_{}", k + 1),
            density::kme_risk(&est, &samples)?,
        );
        metrics.insert(format!("ise_snapshot_{}", k + 1), ise_of(&est)?);
        let (mass, min_value) = density::mass_and_negativity_report(&est, t3, 2001)?;
        metrics.insert(format!("mass_snapshot_{}", k + 1), mass);
        metrics.insert(format!("min_value_snapshot_{}", k + 1), min_value);
        grid_files.push((format!("grid_snapshot_{}.csv", k + 1), est));
    }

    io::write_density_csv(&emitter.path("samples.csv"), &samples)?;
    io::write_coefficients_csv(
        &emitter.path("coefficients.csv"),
        &density_coefficient_rows(&combined),
    )?;

    let curve_rows = |est: &density::DensityEstimate| -> Result<Vec<GridRow>> {
        let mut rows = Vec::with_capacity(xs.len());
        for &x in &xs {
            rows.push(GridRow {
                t: t3,
                x,
                value: est.evaluate(x, t3)?,
                value_truth: Some(rho0.evolve(t3, x)),
            });
        }
        Ok(rows)
    };
    io::write_grid_csv(&emitter.path("grid_combined.csv"), &curve_rows(&combined)?)?;
    for (name, est) in &grid_files {
        io::write_grid_csv(&emitter.path(name), &curve_rows(est)?)?;
    }
    if d.renormalize {
        let curve = combined.renormalized_curve(t3, d.eval_points)?;
        let rows: Vec<GridRow> = curve
            .iter()
            .map(|&(x, v)| GridRow {
                t: t3,
                x,
                value: v,
                value_truth: Some(rho0.evolve(t3, x)),
            })
            .collect();
        io::write_grid_csv(&emitter.path("grid_combined_renormalized.csv"), &rows)?;
    }
    Ok(())
}

fn run_simulate(
    config: &ExperimentConfig,
    model: &KernelModel,
    seed: u64,
    metrics: &mut Metrics,
    emitter: &mut Emitter,
) -> Result<()> {
    let s = config.simulate.as_ref().expect("validated");
    let spec = SdeSpec::for_model(model);
    let paths = dynamics::euler_maruyama_ensemble(&spec, s.x0, s.dt, s.n_steps, s.n_paths, seed);

    let mut observed = Vec::new();
    let mut times = s.observe_times.clone();
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times.dedup();
    for &t in &times {
        let idx = ((t / s.dt).round() as usize).min(s.n_steps);
        let positions: Vec<f64> = paths
            .iter()
            .filter(|p| p.len() > idx)
            .map(|p| p[idx])
            .collect();
        if positions.is_empty() {
            return Err(Error::Unsupported(format!(
                "no surviving paths at observation time {t}"
            )));
        }
        let mean = positions.iter().sum::<f64>() / positions.len() as f64;
        let var = positions
            .iter()
            .map(|&x| (x - mean) * (x - mean))
            .sum::<f64>()
            / positions.len() as f64;
        metrics.insert(format!("mean_at_{t}"), mean);
        metrics.insert(format!("variance_at_{t}"), var);
        metrics.insert(format!("alive_at_{t}"), positions.len() as f64);
        observed.push(DensitySnapshot::new(idx as f64 * s.dt, positions));
    }
    metrics.insert("paths", s.n_paths as f64);
    metrics.insert("steps", s.n_steps as f64);
    metrics.insert("dt", s.dt);

    let sample_set = DensitySampleSet::new(observed)?;
    io::write_density_csv(&emitter.path("samples.csv"), &sample_set)?;
    Ok(())
}
