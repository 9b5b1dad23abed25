//! Spatio-temporal kernel regression: assemble the representer system over
//! all snapshots, solve by pseudo-inverse, predict and score.
//!
//! The fitted function is `f(x, t) = Σ_{k,i} a_{i,k} K_t(x, x_i^{(k)})` with
//! time-independent coefficients, so it inherits the kernel's dynamics: any
//! such combination solves the family's PDE exactly.

use crate::data::{Snapshot, SnapshotSet};
use crate::error::{Error, Result};
use crate::kernels::KernelModel;
use crate::linalg;

use nalgebra::{DMatrix, DVector};

/// Assembled least-squares system: `matrix[r][c] = K_{t(r)}(x(r), x(c))`
/// over the flat snapshot-grouped ordering (all of S^(1), then S^(2), ...).
#[derive(Debug, Clone)]
pub struct GramSystem {
    pub matrix: DMatrix<f64>,
    pub target: DVector<f64>,
    /// Flat index -> (snapshot index, point index).
    pub index_map: Vec<(usize, usize)>,
    /// Snapshot time of each flat row.
    pub row_times: Vec<f64>,
    /// Center position of each flat column (identical to the row positions).
    pub centers: Vec<f64>,
}

/// Fitted representer expansion.
#[derive(Debug, Clone)]
pub struct FitResult {
    /// Time-independent coefficients, one per center, in assembly order.
    pub coefficients: DVector<f64>,
    /// Kernel centers `x_i^{(k)}` in assembly order.
    pub centers: Vec<f64>,
    /// Snapshot time each center was observed at (bookkeeping only; the
    /// expansion itself evaluates every center with the query time).
    pub center_times: Vec<f64>,
    /// Flat index -> (snapshot index, point index) of each center.
    pub center_index: Vec<(usize, usize)>,
    /// `‖K a - y‖₂` of the solved system.
    pub residual_norm: f64,
    model: KernelModel,
}

/// Squared loss is the only shipped loss; the config layer parses the tag
/// and rejects anything unknown.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    Squared,
}

/// Build the spatio-temporal Gram system for a snapshot set.
pub fn assemble(model: &KernelModel, data: &SnapshotSet) -> Result<GramSystem> {
    for s in data.snapshots() {
        if s.t < model.t_floor() {
            return Err(Error::TimeBelowFloor {
                t: s.t,
                t_floor: model.t_floor(),
            });
        }
    }
    let rows = data.flat_rows();
    let centers: Vec<f64> = rows.iter().map(|&(x, _)| x).collect();
    let matrix = model.gram(&rows, &centers)?;
    Ok(GramSystem {
        matrix,
        target: DVector::from_vec(data.flat_targets()),
        index_map: data.flat_index(),
        row_times: rows.iter().map(|&(_, t)| t).collect(),
        centers,
    })
}

/// Solve the assembled system by minimum-norm least squares:
/// `a* = K⁺ y`. Duplicate rows or centers are fine; rank handling is the
/// pseudo-inverse's job.
pub fn fit(model: &KernelModel, system: &GramSystem, rtol: f64) -> Result<FitResult> {
    let (pseudo, _report) = linalg::pinv(&system.matrix, rtol)?;
    let coefficients = &pseudo * &system.target;
    let residual_norm = (&system.matrix * &coefficients - &system.target).norm();
    Ok(FitResult {
        coefficients,
        centers: system.centers.clone(),
        center_times: system.row_times.clone(),
        center_index: system.index_map.clone(),
        residual_norm,
        model: *model,
    })
}

impl FitResult {
    pub fn model(&self) -> &KernelModel {
        &self.model
    }

    /// Evaluate the fitted expansion at `(x, t)`.
    pub fn predict(&self, x: f64, t: f64) -> Result<f64> {
        let order = self.model.truncation_order(t)?;
        let mut acc = 0.0;
        for (a, &c) in self.coefficients.iter().zip(self.centers.iter()) {
            acc += a * self.model.eval_with_order(order, t, x, c)?;
        }
        if !acc.is_finite() {
            return Err(Error::NonFinite("predict"));
        }
        Ok(acc)
    }
}

/// Empirical risk `(1/T) Σ_k (1/N_k) Σ_i loss(f(x_i, t_k), y_i)`, the
/// per-snapshot `1/N_k` generalizing the uniform-size case.
pub fn empirical_risk(fit: &FitResult, data: &SnapshotSet, loss: Loss) -> Result<f64> {
    let Loss::Squared = loss;
    let mut acc = 0.0;
    for s in data.snapshots() {
        let mut snap = 0.0;
        for &(x, y) in &s.points {
            let r = fit.predict(x, s.t)? - y;
            snap += r * r;
        }
        acc += snap / s.len() as f64;
    }
    Ok(acc / data.len() as f64)
}

/// Fit with a soft initial condition: the initial snapshot (t₀ = 0 allowed)
/// enters as an ordinary measurement block evaluated at `max(t₀, t_epsilon)`,
/// since `K_0` degenerates to a Dirac delta. Equal weight between the initial
/// block and the data reproduces the plain two-term risk sum; `weight`
/// rescales the initial block's squared-loss share for sensitivity studies.
pub fn fit_with_initial_weighted(
    model: &KernelModel,
    data: &SnapshotSet,
    initial: &Snapshot,
    t_epsilon: f64,
    weight: f64,
    rtol: f64,
) -> Result<FitResult> {
    if t_epsilon < model.t_floor() {
        return Err(Error::TimeBelowFloor {
            t: t_epsilon,
            t_floor: model.t_floor(),
        });
    }
    if weight <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "weight",
            value: weight,
            reason: "initial-condition weight must be strictly positive",
        });
    }
    if initial.is_empty() {
        let system = assemble(model, data)?;
        return fit(model, &system, rtol);
    }
    let t0 = initial.t.max(t_epsilon);
    let mut snapshots = vec![Snapshot::new(t0, initial.points.clone())];
    snapshots.extend(data.snapshots().iter().cloned());
    let combined = SnapshotSet::new(snapshots)?;
    let mut system = assemble(model, &combined)?;
    if weight != 1.0 {
        // scaling rows and targets by √w turns the plain least squares into
        // the w-weighted sum of the initial block's squared residuals
        let sqrt_w = weight.sqrt();
        let n0 = initial.len();
        for r in 0..n0 {
            system.matrix.row_mut(r).scale_mut(sqrt_w);
            system.target[r] *= sqrt_w;
        }
    }
    fit(model, &system, rtol)
}

/// [`fit_with_initial_weighted`] with equal weight.
pub fn fit_with_initial(
    model: &KernelModel,
    data: &SnapshotSet,
    initial: &Snapshot,
    t_epsilon: f64,
    rtol: f64,
) -> Result<FitResult> {
    fit_with_initial_weighted(model, data, initial, t_epsilon, 1.0, rtol)
}

/// Risks from [`representer_optimality_check`].
#[derive(Debug, Clone, Copy)]
pub struct OptimalityReport {
    pub representer_risk: f64,
    pub enlarged_risk: f64,
}

impl OptimalityReport {
    /// The representer theorem asserts the enlarged expansion cannot do
    /// better; numerically we allow a 1e-9 slack.
    pub fn holds(&self) -> bool {
        self.enlarged_risk >= self.representer_risk - 1e-9
    }
}

/// Solve the representer system and an enlarged system whose expansion also
/// includes kernels at off-sample centers, and report both empirical risks.
/// Rows are scaled by `1/√(T·N_k)` in both solves so each minimizes the
/// empirical risk itself, which keeps the comparison meaningful for unequal
/// snapshot sizes.
pub fn representer_optimality_check(
    model: &KernelModel,
    data: &SnapshotSet,
    extra_centers: &[(f64, f64)],
    rtol: f64,
) -> Result<OptimalityReport> {
    let rows = data.flat_rows();
    let sample_centers: Vec<f64> = rows.iter().map(|&(x, _)| x).collect();
    let t_count = data.len() as f64;
    let weights: Vec<f64> = data
        .snapshots()
        .iter()
        .flat_map(|s| {
            let w = 1.0 / (t_count * s.len() as f64).sqrt();
            std::iter::repeat(w).take(s.len())
        })
        .collect();

    let solve_risk = |centers: &[f64]| -> Result<f64> {
        let mut matrix = model.gram(&rows, centers)?;
        let mut target = DVector::from_vec(data.flat_targets());
        for (r, w) in weights.iter().enumerate() {
            matrix.row_mut(r).scale_mut(*w);
            target[r] *= w;
        }
        let (pseudo, _) = linalg::pinv(&matrix, rtol)?;
        let coeffs = &pseudo * &target;
        Ok((&matrix * &coeffs - &target).norm_squared())
    };

    let representer_risk = solve_risk(&sample_centers)?;
    let mut enlarged: Vec<f64> = sample_centers.clone();
    enlarged.extend(extra_centers.iter().map(|&(x, _)| x));
    let enlarged_risk = solve_risk(&enlarged)?;
    Ok(OptimalityReport {
        representer_risk,
        enlarged_risk,
    })
}
