//! Ground-truth machinery: spectral evolution of initial conditions,
//! inverse-CDF sampling from evolved densities, Euler-Maruyama simulation of
//! the underlying Itô process, and synthetic sensor measurements.
//!
//! All randomness flows through `ChaCha8` generators seeded from user seeds
//! (stream = path index for ensembles), so every sample and path is
//! bit-reproducible across platforms.

use crate::data::Snapshot;
use crate::error::{Error, Result};
use crate::kernels::{Domain, KernelFamily, KernelModel, SpectralBasis};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// A function expanded in a spectral basis: `u(x, t) = Σ_j g_j e^{-λ_j t} φ_j(x)`.
#[derive(Debug, Clone)]
pub struct SpectralFunction {
    basis: SpectralBasis,
    coefficients: Vec<f64>,
}

impl SpectralFunction {
    pub fn new(basis: SpectralBasis, coefficients: Vec<f64>) -> Self {
        SpectralFunction {
            basis,
            coefficients,
        }
    }

    pub fn basis(&self) -> &SpectralBasis {
        &self.basis
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Evaluate the evolved expansion. `t = 0` is valid here: evolution acts
    /// on coefficients, there is no kernel singularity involved.
    pub fn evolve(&self, t: f64, x: f64) -> f64 {
        let phis = self.basis.eigenfunctions(self.coefficients.len(), x);
        self.coefficients
            .iter()
            .zip(phis.iter())
            .enumerate()
            .map(|(j, (g, phi))| g * (-self.basis.eigenvalue(j) * t).exp() * phi)
            .sum()
    }
}

/// Project `g` onto the first `n_terms` basis functions by Simpson quadrature
/// of `∫ g φ_j e^{Φ} dx` over the basis's quadrature interval.
pub fn project<G: Fn(f64) -> f64>(
    basis: &SpectralBasis,
    g: G,
    n_terms: usize,
    quad_nodes: usize,
) -> Result<SpectralFunction> {
    if quad_nodes < 3 {
        return Err(Error::InvalidParameter {
            name: "quad_nodes",
            value: quad_nodes as f64,
            reason: "Simpson quadrature needs at least 3 nodes",
        });
    }
    let (a, b) = basis.quadrature_interval();
    let n = if quad_nodes % 2 == 0 {
        quad_nodes + 1
    } else {
        quad_nodes
    };
    let h = (b - a) / (n - 1) as f64;
    let mut coefficients = vec![0.0; n_terms];
    for i in 0..n {
        let x = a + i as f64 * h;
        let w = if i == 0 || i == n - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let gx = g(x) * basis.weight_potential(x).exp() * w;
        let phis = basis.eigenfunctions(n_terms, x);
        for (c, phi) in coefficients.iter_mut().zip(phis.iter()) {
            *c += gx * phi;
        }
    }
    for c in coefficients.iter_mut() {
        *c *= h / 3.0;
    }
    Ok(SpectralFunction::new(*basis, coefficients))
}

/// Inverse-CDF sampling from the evolved density on a 4097-node grid with
/// linear interpolation. Bounded domains only; the density may not dip below
/// -1e-9 on the grid (smaller negative truncation wiggle is clamped to zero).
pub fn sample_evolved(
    f: &SpectralFunction,
    t: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    const GRID: usize = 4097;
    if f.basis.domain() != Domain::UnitInterval {
        return Err(Error::Unsupported(
            "inverse-CDF sampling needs a bounded domain".into(),
        ));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let h = 1.0 / (GRID - 1) as f64;
    let mut density = Vec::with_capacity(GRID);
    let mut min_value = f64::INFINITY;
    for i in 0..GRID {
        let v = f.evolve(t, i as f64 * h);
        min_value = min_value.min(v);
        density.push(v.max(0.0));
    }
    if min_value < -1e-9 {
        return Err(Error::InvalidDensity { min_value });
    }
    let mut cdf = Vec::with_capacity(GRID);
    cdf.push(0.0);
    let mut acc = 0.0;
    for i in 1..GRID {
        acc += 0.5 * (density[i - 1] + density[i]) * h;
        cdf.push(acc);
    }
    let total = acc;
    if !(total > 0.0) {
        return Err(Error::InvalidDensity { min_value });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let u = rng.random::<f64>() * total;
        // binary search for the bracketing grid cell
        let mut lo = 0usize;
        let mut hi = GRID - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if cdf[mid] <= u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let span = cdf[hi] - cdf[lo];
        let frac = if span > 0.0 { (u - cdf[lo]) / span } else { 0.5 };
        samples.push((lo as f64 + frac) * h);
    }
    Ok(samples)
}

/// Boundary handling for simulated paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryPolicy {
    None,
    /// Mirror at the interval endpoints; the probabilistic counterpart of
    /// Neumann (no-flux) boundary conditions.
    Reflect { lower: f64, upper: f64 },
    /// Stop the path at the first exit; counterpart of Dirichlet conditions.
    Absorb { lower: f64, upper: f64 },
}

/// Drift, diffusion and boundary policy of an Itô process
/// `dX = μ(X) dt + σ(X) dW`.
pub struct SdeSpec {
    drift: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    diffusion: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub boundary: BoundaryPolicy,
}

impl SdeSpec {
    /// σ(x) must be nonnegative on the domain of interest.
    pub fn new(
        drift: impl Fn(f64) -> f64 + Send + Sync + 'static,
        diffusion: impl Fn(f64) -> f64 + Send + Sync + 'static,
        boundary: BoundaryPolicy,
    ) -> Self {
        SdeSpec {
            drift: Box::new(drift),
            diffusion: Box::new(diffusion),
            boundary,
        }
    }

    /// The process whose density evolves under the model's generator:
    /// σ = √(2D), μ from the family, reflection for Neumann walls and
    /// absorption for Dirichlet walls.
    pub fn for_model(model: &KernelModel) -> Self {
        let sigma = (2.0 * model.diffusion_coefficient()).sqrt();
        let boundary = match model.family() {
            KernelFamily::DirichletHeat => BoundaryPolicy::Absorb {
                lower: 0.0,
                upper: 1.0,
            },
            KernelFamily::NeumannHeat => BoundaryPolicy::Reflect {
                lower: 0.0,
                upper: 1.0,
            },
            _ => BoundaryPolicy::None,
        };
        match model.family() {
            KernelFamily::OrnsteinUhlenbeck { theta, .. } => SdeSpec::new(
                move |x| -theta * x,
                move |_| sigma,
                boundary,
            ),
            _ => SdeSpec::new(|_| 0.0, move |_| sigma, boundary),
        }
    }

    pub fn drift(&self, x: f64) -> f64 {
        (self.drift)(x)
    }

    pub fn diffusion(&self, x: f64) -> f64 {
        (self.diffusion)(x)
    }
}

/// Simulate one Euler-Maruyama path `X_{m+1} = X_m + μ Δt + σ √Δt Z_m` from
/// a ChaCha8 generator seeded with `seed`. The returned path includes the
/// initial state; an absorbed path is cut at the boundary crossing.
pub fn euler_maruyama(spec: &SdeSpec, x0: f64, dt: f64, n_steps: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    euler_maruyama_with(spec, x0, dt, n_steps, &mut rng)
}

/// Ensemble of paths; path `i` uses generator stream `i` of the seed, so the
/// ensemble is reproducible and trivially parallelizable by index.
pub fn euler_maruyama_ensemble(
    spec: &SdeSpec,
    x0: f64,
    dt: f64,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    (0..n_paths)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            euler_maruyama_with(spec, x0, dt, n_steps, &mut rng)
        })
        .collect()
}

fn euler_maruyama_with<R: Rng>(
    spec: &SdeSpec,
    x0: f64,
    dt: f64,
    n_steps: usize,
    rng: &mut R,
) -> Vec<f64> {
    assert!(dt > 0.0, "dt must be positive");
    let sqrt_dt = dt.sqrt();
    let mut path = Vec::with_capacity(n_steps + 1);
    let mut x = x0;
    path.push(x);
    for _ in 0..n_steps {
        let sigma = spec.diffusion(x);
        debug_assert!(sigma >= 0.0, "diffusion coefficient must be nonnegative");
        let z: f64 = StandardNormal.sample(rng);
        x += spec.drift(x) * dt + sigma * sqrt_dt * z;
        match spec.boundary {
            BoundaryPolicy::None => {}
            BoundaryPolicy::Reflect { lower, upper } => {
                // fold until inside; one fold per boundary violation
                while x < lower || x > upper {
                    if x < lower {
                        x = 2.0 * lower - x;
                    } else {
                        x = 2.0 * upper - x;
                    }
                }
            }
            BoundaryPolicy::Absorb { lower, upper } => {
                if x <= lower || x >= upper {
                    path.push(x.clamp(lower, upper));
                    return path;
                }
            }
        }
        path.push(x);
    }
    path
}

/// Additive measurement noise.
pub enum NoiseModel<'a> {
    None,
    /// Deterministic error function e(x) added to every measurement.
    Deterministic(&'a dyn Fn(f64) -> f64),
    /// Independent N(0, ς²) draws per sensor.
    IidGaussian { sigma: f64 },
}

/// Sensor measurements `y_i = truth(x_i, t) + noise` at one time.
/// Stochastic noise is drawn from a ChaCha8 generator seeded with `seed`;
/// deterministic noise ignores the seed.
pub fn synth_measurements<F: Fn(f64, f64) -> f64>(
    truth: F,
    sensors: &[f64],
    t: f64,
    noise: &NoiseModel,
    seed: u64,
) -> Snapshot {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = sensors
        .iter()
        .map(|&x| {
            let e = match noise {
                NoiseModel::None => 0.0,
                NoiseModel::Deterministic(f) => f(x),
                NoiseModel::IidGaussian { sigma } => {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    sigma * z
                }
            };
            (x, truth(x, t) + e)
        })
        .collect();
    Snapshot::new(t, points)
}

/// `n` equally spaced sensors covering [lo, hi] inclusive.
pub fn equispaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}
