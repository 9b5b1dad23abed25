//! Static space-time Gaussian kernel baseline: Nadaraya-Watson weighted
//! averaging over `(x, t)`-concatenated observations, with cross-validated
//! bandwidth. This is the inverse-distance-weighting comparison point for
//! the PDE predictor.

use crate::data::SnapshotSet;
use crate::error::{Error, Result};
use crate::linalg;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A prediction together with the underflow-fallback flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdwPrediction {
    pub value: f64,
    /// True when all weights underflowed to zero and the nearest sample's
    /// target was returned instead.
    pub nearest_neighbor_fallback: bool,
}

/// Nadaraya-Watson prediction with isotropic Gaussian weights
/// `w = exp(-[(x-x_i)² + (t-t_k)²]/(2s²))` over every observation.
pub fn idw_predict(data: &SnapshotSet, bandwidth: f64, x: f64, t: f64) -> Result<IdwPrediction> {
    if bandwidth <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "bandwidth",
            value: bandwidth,
            reason: "must be strictly positive",
        });
    }
    let mut num = 0.0;
    let mut den = 0.0;
    let mut nearest = (f64::INFINITY, 0.0);
    for snap in data.snapshots() {
        let dt2 = (t - snap.t) * (t - snap.t);
        for &(xi, yi) in &snap.points {
            let d2 = (x - xi) * (x - xi) + dt2;
            if d2 < nearest.0 {
                nearest = (d2, yi);
            }
            let w = (-d2 / (2.0 * bandwidth * bandwidth)).exp();
            num += w * yi;
            den += w;
        }
    }
    if den == 0.0 {
        return Ok(IdwPrediction {
            value: nearest.1,
            nearest_neighbor_fallback: true,
        });
    }
    Ok(IdwPrediction {
        value: num / den,
        nearest_neighbor_fallback: false,
    })
}

/// How observations are grouped into cross-validation folds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldStrategy {
    /// Shuffle all points and deal them round-robin into folds.
    ByPoint,
    /// Hold out whole snapshots (folds = snapshot count groups).
    BySnapshot,
}

/// Pick the grid bandwidth minimizing mean squared leave-fold-out prediction
/// error. Deterministic under `seed` (the shuffle generator is ChaCha8).
pub fn cross_validate_bandwidth(
    data: &SnapshotSet,
    grid: &[f64],
    folds: usize,
    seed: u64,
    strategy: FoldStrategy,
) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::EmptyInput("bandwidth grid"));
    }
    if folds < 2 {
        return Err(Error::InvalidParameter {
            name: "folds",
            value: folds as f64,
            reason: "cross validation needs at least 2 folds",
        });
    }
    // flat (x, t, y) triples with a fold label each
    let mut triples: Vec<(f64, f64, f64)> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    match strategy {
        FoldStrategy::ByPoint => {
            for snap in data.snapshots() {
                for &(x, y) in &snap.points {
                    triples.push((x, snap.t, y));
                }
            }
            let mut order: Vec<usize> = (0..triples.len()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            order.shuffle(&mut rng);
            labels = vec![0; triples.len()];
            for (pos, &idx) in order.iter().enumerate() {
                labels[idx] = pos % folds;
            }
        }
        FoldStrategy::BySnapshot => {
            for (k, snap) in data.snapshots().iter().enumerate() {
                for &(x, y) in &snap.points {
                    triples.push((x, snap.t, y));
                    labels.push(k % folds);
                }
            }
        }
    }
    for fold in 0..folds {
        let held = labels.iter().filter(|&&l| l == fold).count();
        if held == 0 || held == triples.len() {
            return Err(Error::EmptyFold {
                fold,
                n: triples.len(),
                folds,
            });
        }
    }

    let mut best = (f64::INFINITY, grid[0]);
    for &s in grid {
        if s <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "bandwidth",
                value: s,
                reason: "grid bandwidths must be strictly positive",
            });
        }
        let mut sse = 0.0;
        let mut count = 0usize;
        for fold in 0..folds {
            for (i, &(x, t, y)) in triples.iter().enumerate() {
                if labels[i] != fold {
                    continue;
                }
                let mut num = 0.0;
                let mut den = 0.0;
                let mut nearest = (f64::INFINITY, 0.0);
                for (j, &(xj, tj, yj)) in triples.iter().enumerate() {
                    if labels[j] == fold {
                        continue;
                    }
                    let d2 = (x - xj) * (x - xj) + (t - tj) * (t - tj);
                    if d2 < nearest.0 {
                        nearest = (d2, yj);
                    }
                    let w = (-d2 / (2.0 * s * s)).exp();
                    num += w * yj;
                    den += w;
                }
                let pred = if den == 0.0 { nearest.1 } else { num / den };
                sse += (pred - y) * (pred - y);
                count += 1;
            }
        }
        let mse = sse / count as f64;
        if mse < best.0 {
            best = (mse, s);
        }
    }
    Ok(best.1)
}

/// Static-kernel least-squares variant: fit coefficients over the space-time
/// observations with the same isotropic Gaussian kernel and solve by
/// pseudo-inverse. Shipped for sensitivity analysis next to the
/// weighted-average form.
#[derive(Debug, Clone)]
pub struct StaticKernelFit {
    pub bandwidth: f64,
    pub coefficients: DVector<f64>,
    centers: Vec<(f64, f64)>,
}

pub fn static_kernel_fit(data: &SnapshotSet, bandwidth: f64, rtol: f64) -> Result<StaticKernelFit> {
    if bandwidth <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "bandwidth",
            value: bandwidth,
            reason: "must be strictly positive",
        });
    }
    let centers: Vec<(f64, f64)> = data
        .snapshots()
        .iter()
        .flat_map(|s| s.points.iter().map(move |&(x, _)| (x, s.t)))
        .collect();
    let targets = DVector::from_vec(data.flat_targets());
    let n = centers.len();
    let kernel = |a: (f64, f64), b: (f64, f64)| {
        let d2 = (a.0 - b.0) * (a.0 - b.0) + (a.1 - b.1) * (a.1 - b.1);
        (-d2 / (2.0 * bandwidth * bandwidth)).exp()
    };
    let gram = DMatrix::from_fn(n, n, |i, j| kernel(centers[i], centers[j]));
    let (pseudo, _) = linalg::pinv(&gram, rtol)?;
    Ok(StaticKernelFit {
        bandwidth,
        coefficients: pseudo * targets,
        centers,
    })
}

impl StaticKernelFit {
    pub fn predict(&self, x: f64, t: f64) -> f64 {
        self.centers
            .iter()
            .zip(self.coefficients.iter())
            .map(|(&(cx, ct), a)| {
                let d2 = (x - cx) * (x - cx) + (t - ct) * (t - ct);
                a * (-d2 / (2.0 * self.bandwidth * self.bandwidth)).exp()
            })
            .sum()
    }
}
