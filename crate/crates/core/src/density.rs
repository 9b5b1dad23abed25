//! Time-dependent kernel density estimation: per-snapshot estimators and the
//! combined simultaneous kernel-mean estimator over all snapshots.
//!
//! An estimate is an expansion `ρ̂(x, t) = Σ_{k,i} β_{i,k} K_t(x, x_i^{(k)})`,
//! so evaluating it at any admissible time yields an exact PDE solution. The
//! combined estimator minimizes the summed per-snapshot embedding risk via a
//! stacked square-root least-squares solve.

use crate::data::DensitySampleSet;
use crate::error::{Error, Result};
use crate::kernels::{Domain, KernelModel};
use crate::linalg;
use nalgebra::DVector;

/// A kernel density expansion with time-independent weights.
#[derive(Debug, Clone)]
pub struct DensityEstimate {
    /// Weights β, one per center, in assembly order.
    pub coefficients: DVector<f64>,
    /// Sample positions the kernels are centered at.
    pub centers: Vec<f64>,
    /// Snapshot time each center was sampled at (bookkeeping only).
    pub center_times: Vec<f64>,
    /// Flat index -> (snapshot index, point index).
    pub center_index: Vec<(usize, usize)>,
    model: KernelModel,
}

impl DensityEstimate {
    pub fn model(&self) -> &KernelModel {
        &self.model
    }

    /// `ρ̂(x, t) = Σ_j β_j K_t(x, c_j)`. May be negative; reported as-is.
    pub fn evaluate(&self, x: f64, t: f64) -> Result<f64> {
        let order = self.model.truncation_order(t)?;
        let mut acc = 0.0;
        for (b, &c) in self.coefficients.iter().zip(self.centers.iter()) {
            acc += b * self.model.eval_with_order(order, t, x, c)?;
        }
        if !acc.is_finite() {
            return Err(Error::NonFinite("evaluate_density"));
        }
        Ok(acc)
    }

    /// Post-hoc cleanup for presentation: clip the curve at zero on the given
    /// evaluation grid and rescale to unit mass. This leaves the expansion
    /// untouched and returns grid values; the unconstrained estimate is the
    /// primary object.
    pub fn renormalized_curve(&self, t: f64, nodes: usize) -> Result<Vec<(f64, f64)>> {
        if self.model.domain() != Domain::UnitInterval {
            return Err(Error::Unsupported(
                "renormalization needs a bounded domain".into(),
            ));
        }
        let n = if nodes % 2 == 0 { nodes + 1 } else { nodes.max(3) };
        let h = 1.0 / (n - 1) as f64;
        let mut values = Vec::with_capacity(n);
        for i in 0..n {
            let x = i as f64 * h;
            values.push((x, self.evaluate(x, t)?.max(0.0)));
        }
        let mut mass = 0.0;
        for (i, &(_, v)) in values.iter().enumerate() {
            let w = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            mass += w * v;
        }
        mass *= h / 3.0;
        if mass > 0.0 {
            for v in values.iter_mut() {
                v.1 /= mass;
            }
        }
        Ok(values)
    }
}

/// Classical kernel density estimator of one snapshot: weight `1/N` at each
/// sample point, evaluated with the time-dependent kernel at any query time.
pub fn kde_snapshot(model: &KernelModel, sample: &[f64], t: f64) -> Result<DensityEstimate> {
    if sample.is_empty() {
        return Err(Error::EmptyInput("kde_snapshot sample"));
    }
    if t < model.t_floor() {
        return Err(Error::TimeBelowFloor {
            t,
            t_floor: model.t_floor(),
        });
    }
    let n = sample.len();
    Ok(DensityEstimate {
        coefficients: DVector::from_element(n, 1.0 / n as f64),
        centers: sample.to_vec(),
        center_times: vec![t; n],
        center_index: (0..n).map(|i| (0, i)).collect(),
        model: *model,
    })
}

/// Embed a single snapshot's equal-weight estimator into the full center set
/// of a sample set: `1/N_k` at snapshot `k`'s positions, zero elsewhere.
pub fn embedded_snapshot_estimate(
    model: &KernelModel,
    data: &DensitySampleSet,
    snapshot: usize,
) -> Result<DensityEstimate> {
    if snapshot >= data.len() {
        return Err(Error::DimensionMismatch {
            context: "snapshot index out of range",
            expected: data.len(),
            got: snapshot,
        });
    }
    let index = data.flat_index();
    let n_k = data.snapshots()[snapshot].len() as f64;
    let coefficients = DVector::from_iterator(
        index.len(),
        index
            .iter()
            .map(|&(k, _)| if k == snapshot { 1.0 / n_k } else { 0.0 }),
    );
    Ok(DensityEstimate {
        coefficients,
        centers: data.all_centers(),
        center_times: center_times(data),
        center_index: index,
        model: *model,
    })
}

fn center_times(data: &DensitySampleSet) -> Vec<f64> {
    data.snapshots()
        .iter()
        .flat_map(|s| std::iter::repeat(s.t).take(s.len()))
        .collect()
}

/// The simultaneous kernel-mean estimator over all snapshots: minimize
/// `Σ_k ‖L_{t_k} v_k - L_{t_k} β‖²` over β, where `K_{t_k}` is the Gram of
/// ALL centers at time `t_k`, `L = √K`, and `v_k` carries `1/N_k` at
/// snapshot k's own positions. Solved by the stacked pseudo-inverse; the
/// minimum-norm solution is returned.
pub fn kme_combined(model: &KernelModel, data: &DensitySampleSet) -> Result<DensityEstimate> {
    kme_combined_with(model, data, linalg::DEFAULT_CLAMP_TOL)
}

/// [`kme_combined`] with an explicit PSD clamp tolerance for the square
/// roots.
pub fn kme_combined_with(
    model: &KernelModel,
    data: &DensitySampleSet,
    clamp_tol: f64,
) -> Result<DensityEstimate> {
    for s in data.snapshots() {
        if s.t < model.t_floor() {
            return Err(Error::TimeBelowFloor {
                t: s.t,
                t_floor: model.t_floor(),
            });
        }
    }
    let centers = data.all_centers();
    let index = data.flat_index();
    let total = centers.len();
    let mut blocks = Vec::with_capacity(data.len());
    for (k, snap) in data.snapshots().iter().enumerate() {
        let rows: Vec<(f64, f64)> = centers.iter().map(|&x| (x, snap.t)).collect();
        let gram = model.gram(&rows, &centers)?;
        let sqrt = linalg::sym_sqrt_psd(&gram, clamp_tol)?;
        let n_k = snap.len() as f64;
        let v_k = DVector::from_iterator(
            total,
            index
                .iter()
                .map(|&(kk, _)| if kk == k { 1.0 / n_k } else { 0.0 }),
        );
        let rhs = &sqrt * v_k;
        blocks.push((sqrt, rhs));
    }
    let beta = linalg::stacked_min_norm_lstsq(&blocks)?;
    Ok(DensityEstimate {
        coefficients: beta,
        centers,
        center_times: center_times(data),
        center_index: index,
        model: *model,
    })
}

/// Summed per-snapshot embedding risk of an estimate against a sample set:
/// `(1/T) Σ_k [ βᵀK_{t_k}β − (2/N_k) Σ_i ρ̂(x_i^{(k)}, t_k) + (1/N_k²) Σ_i K_{t_k}(x_i, x_i) ]`.
/// Risk differences between two estimates on the same data equal their
/// stacked least-squares objective differences; the constant term is
/// reported as written here.
pub fn kme_risk(estimate: &DensityEstimate, data: &DensitySampleSet) -> Result<f64> {
    let model = &estimate.model;
    let mut acc = 0.0;
    for snap in data.snapshots() {
        let t = snap.t;
        let order = model.truncation_order(t)?;
        // quadratic term over the estimate's own centers
        let rows: Vec<(f64, f64)> = estimate.centers.iter().map(|&x| (x, t)).collect();
        let gram = model.gram(&rows, &estimate.centers)?;
        let quad = (estimate.coefficients.transpose() * &gram * &estimate.coefficients)[(0, 0)];

        let n_k = snap.len() as f64;
        let mut cross = 0.0;
        let mut diag = 0.0;
        for &x in &snap.positions {
            cross += estimate.evaluate(x, t)?;
            diag += model.eval_with_order(order, t, x, x)?;
        }
        acc += quad - 2.0 / n_k * cross + diag / (n_k * n_k);
    }
    Ok(acc / data.len() as f64)
}

/// Simpson-quadrature mass over [0, 1] and the minimum value over the
/// quadrature nodes. Diagnostics only; nothing is renormalized.
pub fn mass_and_negativity_report(
    estimate: &DensityEstimate,
    t: f64,
    quadrature_nodes: usize,
) -> Result<(f64, f64)> {
    if estimate.model.domain() != Domain::UnitInterval {
        return Err(Error::Unsupported(
            "mass diagnostics need a bounded domain".into(),
        ));
    }
    let n = if quadrature_nodes % 2 == 0 {
        quadrature_nodes + 1
    } else {
        quadrature_nodes.max(3)
    };
    let h = 1.0 / (n - 1) as f64;
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        values.push(estimate.evaluate(i as f64 * h, t)?);
    }
    let mut mass = 0.0;
    let mut min_value = f64::INFINITY;
    for (i, &v) in values.iter().enumerate() {
        min_value = min_value.min(v);
        let w = if i == 0 || i == n - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        mass += w * v;
    }
    Ok((mass * h / 3.0, min_value))
}
