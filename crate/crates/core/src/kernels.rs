//! Time-dependent kernels that solve `∂_t u = L u` exactly for the built-in
//! Fokker-Planck generators.
//!
//! Each family provides either a closed form (Gaussian heat kernel on the
//! line) or a truncated eigen-expansion `K_t(x,x') = Σ_n e^{-λ_n t} φ_n(x) φ_n(x')`
//! whose terms each solve the PDE, so every truncation does too.

use crate::error::{Error, Result};

use std::f64::consts::PI;

pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_TERMS: usize = 10_000;
pub const DEFAULT_T_FLOOR: f64 = 1e-6;

/// `sin(π u)` with exact argument reduction: exactly zero at integer `u`.
///
/// Direct `(n as f64 * PI * x).sin()` leaks O(n·ε) at the boundary points of
/// the interval families; reducing to the principal quadrant first keeps the
/// Dirichlet kernel exactly zero at x ∈ {0, 1}.
pub fn sinpi(u: f64) -> f64 {
    let r = u.rem_euclid(2.0); // [0, 2)
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    if r < 0.5 {
        (PI * r).sin()
    } else if r < 1.0 {
        (PI * (1.0 - r)).sin()
    } else if r < 1.5 {
        -(PI * (r - 1.0)).sin()
    } else {
        -(PI * (2.0 - r)).sin()
    }
}

/// `cos(π u)` via the shifted sine; exactly zero at half-integer `u`.
pub fn cospi(u: f64) -> f64 {
    sinpi(0.5 - u)
}

/// Probabilists' Hermite polynomial `H_n(u)` by the three-term recurrence
/// `H_{n+1}(u) = u H_n(u) - n H_{n-1}(u)`, `H_0 = 1`, `H_1 = u`.
///
/// Overflow for large `n` returns an infinite value; callers that need large
/// orders should work with the normalized eigenfunctions instead.
pub fn hermite(n: u32, u: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => u,
        _ => {
            let mut prev = 1.0;
            let mut cur = u;
            for k in 1..n {
                let next = u * cur - k as f64 * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Spatial domain on which a kernel family lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    UnitInterval,
    RealLine,
}

impl Domain {
    pub fn contains(&self, x: f64) -> bool {
        match self {
            Domain::UnitInterval => (0.0..=1.0).contains(&x),
            Domain::RealLine => x.is_finite(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Domain::UnitInterval => "[0, 1]",
            Domain::RealLine => "the real line",
        }
    }
}

/// The four built-in kernel families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelFamily {
    /// Heat kernel on the line, `K_t(x,x') = (4πDt)^{-1/2} exp(-(x-x')²/(4Dt))`,
    /// solving `∂_t u = D ∂_xx u`. `D = 1/2` gives the classical
    /// `(2πt)^{-1/2} exp(-(x-x')²/(2t))` form.
    GaussianHeat { diffusion: f64 },
    /// Heat kernel on `[0,1]` with zero boundary values:
    /// eigenpairs `λ_n = n²π²`, `φ_n = √2 sin(nπx)`, n ≥ 1.
    DirichletHeat,
    /// Heat kernel on `[0,1]` with zero boundary flux (mass conserving):
    /// `λ_n = n²π²`, `φ_0 = 1`, `φ_n = √2 cos(nπx)`, n ≥ 0.
    NeumannHeat,
    /// Ornstein-Uhlenbeck generator `L = θ ∂_x(x·) + (σ²/2) ∂_xx` on the line.
    /// Eigenvalues `λ_n = nθ` (the literature often states `λ_n = n`, which is
    /// the θ = 1 case). Eigenfunctions are scaled Gaussian-weighted Hermite
    /// polynomials, orthonormal under the weight `e^{Φ}` with
    /// `Φ(x) = x²/(2s²)`, `s² = σ²/(2θ)`; the normalization carries the extra
    /// length-scale factor `s^{-1/2}` so that orthonormality holds for any
    /// (θ, σ), not only `s = 1`.
    OrnsteinUhlenbeck { theta: f64, sigma: f64 },
}

impl KernelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            KernelFamily::GaussianHeat { .. } => "gaussian-heat",
            KernelFamily::DirichletHeat => "dirichlet-heat",
            KernelFamily::NeumannHeat => "neumann-heat",
            KernelFamily::OrnsteinUhlenbeck { .. } => "ornstein-uhlenbeck",
        }
    }
}

/// A time-dependent kernel family together with its truncation policy.
///
/// Immutable after construction; evaluation is pure, so a model can be shared
/// freely across threads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelModel {
    family: KernelFamily,
    truncation_tol: f64,
    max_terms: usize,
    t_floor: f64,
}

impl KernelModel {
    pub fn new(family: KernelFamily) -> Result<Self> {
        Self::with_tolerances(
            family,
            DEFAULT_TRUNCATION_TOL,
            DEFAULT_MAX_TERMS,
            DEFAULT_T_FLOOR,
        )
    }

    pub fn with_tolerances(
        family: KernelFamily,
        truncation_tol: f64,
        max_terms: usize,
        t_floor: f64,
    ) -> Result<Self> {
        match family {
            KernelFamily::GaussianHeat { diffusion } if diffusion <= 0.0 => {
                return Err(Error::InvalidParameter {
                    name: "diffusion",
                    value: diffusion,
                    reason: "must be strictly positive",
                });
            }
            KernelFamily::OrnsteinUhlenbeck { theta, sigma } => {
                if theta <= 0.0 {
                    return Err(Error::InvalidParameter {
                        name: "theta",
                        value: theta,
                        reason: "must be strictly positive",
                    });
                }
                if sigma <= 0.0 {
                    return Err(Error::InvalidParameter {
                        name: "sigma",
                        value: sigma,
                        reason: "must be strictly positive",
                    });
                }
            }
            _ => {}
        }
        if !(truncation_tol > 0.0 && truncation_tol < 1.0) {
            return Err(Error::InvalidParameter {
                name: "truncation_tol",
                value: truncation_tol,
                reason: "must lie in (0, 1)",
            });
        }
        if max_terms == 0 {
            return Err(Error::InvalidParameter {
                name: "max_terms",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        if t_floor <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "t_floor",
                value: t_floor,
                reason: "must be strictly positive",
            });
        }
        Ok(KernelModel {
            family,
            truncation_tol,
            max_terms,
            t_floor,
        })
    }

    pub fn gaussian_heat(diffusion: f64) -> Result<Self> {
        Self::new(KernelFamily::GaussianHeat { diffusion })
    }

    pub fn dirichlet_heat() -> Self {
        Self::new(KernelFamily::DirichletHeat).expect("defaults are valid")
    }

    pub fn neumann_heat() -> Self {
        Self::new(KernelFamily::NeumannHeat).expect("defaults are valid")
    }

    pub fn ornstein_uhlenbeck(theta: f64, sigma: f64) -> Result<Self> {
        Self::new(KernelFamily::OrnsteinUhlenbeck { theta, sigma })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn truncation_tol(&self) -> f64 {
        self.truncation_tol
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    pub fn t_floor(&self) -> f64 {
        self.t_floor
    }

    pub fn domain(&self) -> Domain {
        match self.family {
            KernelFamily::GaussianHeat { .. } | KernelFamily::OrnsteinUhlenbeck { .. } => {
                Domain::RealLine
            }
            _ => Domain::UnitInterval,
        }
    }

    /// Drift coefficient μ(x) of the family's Itô process.
    pub fn drift(&self, x: f64) -> f64 {
        match self.family {
            KernelFamily::OrnsteinUhlenbeck { theta, .. } => -theta * x,
            _ => 0.0,
        }
    }

    /// Diffusion coefficient D(x) = σ²(x)/2 of the family.
    pub fn diffusion_coefficient(&self) -> f64 {
        match self.family {
            KernelFamily::GaussianHeat { diffusion } => diffusion,
            KernelFamily::DirichletHeat | KernelFamily::NeumannHeat => 1.0,
            KernelFamily::OrnsteinUhlenbeck { sigma, .. } => 0.5 * sigma * sigma,
        }
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !t.is_finite() || t < self.t_floor {
            return Err(Error::TimeBelowFloor {
                t,
                t_floor: self.t_floor,
            });
        }
        Ok(())
    }

    fn check_position(&self, x: f64) -> Result<()> {
        if !self.domain().contains(x) {
            return Err(Error::OutOfDomain {
                x,
                domain: self.domain().name(),
            });
        }
        Ok(())
    }

    /// The spectral basis behind the kernel, if the family is spectral.
    pub fn spectral_basis(&self) -> Option<SpectralBasis> {
        match self.family {
            KernelFamily::GaussianHeat { .. } => None,
            family => Some(SpectralBasis { family }),
        }
    }

    /// Smallest mode number `N` whose tail term falls below the relative
    /// truncation tolerance: `e^{-λ_N t} / max(e^{-λ_lead t}, ε) < tol`,
    /// capped at `max_terms`. Mode numbers follow the family convention
    /// (Dirichlet modes start at 1, Neumann and OU at 0); the kernel sum
    /// retains all modes up to and including `N`.
    pub fn truncation_order(&self, t: f64) -> Result<usize> {
        self.check_time(t)?;
        let basis = match self.spectral_basis() {
            // Closed form: a single "term".
            None => return Ok(1),
            Some(b) => b,
        };
        let first = basis.first_mode();
        let lead = (-basis.eigenvalue_of_mode(first) * t).exp();
        let cap = self.truncation_tol * lead.max(f64::EPSILON);
        let mut n = first.max(1);
        while n < self.max_terms {
            if (-basis.eigenvalue_of_mode(n) * t).exp() < cap {
                return Ok(n);
            }
            n += 1;
        }
        Ok(self.max_terms)
    }

    /// Kernel value `K_t(x, x')`. Exactly symmetric in (x, x') because every
    /// summand is a commutative product.
    pub fn eval(&self, t: f64, x: f64, xp: f64) -> Result<f64> {
        let order = self.truncation_order(t)?;
        self.eval_with_order(order, t, x, xp)
    }

    /// Kernel value with an explicit truncation order (mode number), useful
    /// when a consistent truncation is needed across several evaluations,
    /// e.g. in finite-difference stencils. Ignored by the closed-form family.
    pub fn eval_with_order(&self, order: usize, t: f64, x: f64, xp: f64) -> Result<f64> {
        self.check_time(t)?;
        self.check_position(x)?;
        self.check_position(xp)?;
        Ok(self.eval_unchecked(order, t, x, xp))
    }

    fn eval_unchecked(&self, order: usize, t: f64, x: f64, xp: f64) -> f64 {
        match self.family {
            KernelFamily::GaussianHeat { diffusion } => {
                let denom = 4.0 * diffusion * t;
                let d = x - xp;
                (-d * d / denom).exp() / (PI * denom).sqrt()
            }
            KernelFamily::DirichletHeat => {
                let mut acc = 0.0;
                for n in 1..=order {
                    let e = (-((n * n) as f64) * PI * PI * t).exp();
                    acc += e * (2.0 * sinpi(n as f64 * x) * sinpi(n as f64 * xp));
                }
                acc
            }
            KernelFamily::NeumannHeat => {
                let mut acc = 1.0;
                for n in 1..=order {
                    let e = (-((n * n) as f64) * PI * PI * t).exp();
                    acc += e * (2.0 * cospi(n as f64 * x) * cospi(n as f64 * xp));
                }
                acc
            }
            KernelFamily::OrnsteinUhlenbeck { theta, sigma } => {
                let s = (sigma * sigma / (2.0 * theta)).sqrt();
                let u = x / s;
                let v = xp / s;
                // Normalized recurrence ψ_{n+1} = (u ψ_n - √n ψ_{n-1}) / √(n+1)
                // keeps magnitudes representable for thousands of modes.
                let pref = (-0.5 * (u * u + v * v)).exp() / ((2.0 * PI).sqrt() * s);
                let mut pu_prev = 0.0;
                let mut pu = 1.0;
                let mut pv_prev = 0.0;
                let mut pv = 1.0;
                let mut acc = pu * pv; // n = 0 term, e^{-0·θt} = 1
                for n in 0..order {
                    let nf = n as f64;
                    let inv = 1.0 / (nf + 1.0).sqrt();
                    let pu_next = (u * pu - nf.sqrt() * pu_prev) * inv;
                    let pv_next = (v * pv - nf.sqrt() * pv_prev) * inv;
                    pu_prev = pu;
                    pu = pu_next;
                    pv_prev = pv;
                    pv = pv_next;
                    acc += (-(nf + 1.0) * theta * t).exp() * (pu * pv);
                }
                pref * acc
            }
        }
    }

    /// Kernel matrix `M[r][c] = K_{t_r}(x_r, centers[c])` for rows of
    /// space-time points `(x, t)`. Only the row's time enters, so the matrix
    /// is not symmetric in general.
    pub fn gram(
        &self,
        rows: &[(f64, f64)],
        centers: &[f64],
    ) -> Result<nalgebra::DMatrix<f64>> {
        let mut m = nalgebra::DMatrix::zeros(rows.len(), centers.len());
        for (r, &(x, t)) in rows.iter().enumerate() {
            let order = self.truncation_order(t).map_err(|e| annotate(e, r, None))?;
            for (c, &center) in centers.iter().enumerate() {
                m[(r, c)] = self
                    .eval_with_order(order, t, x, center)
                    .map_err(|e| annotate(e, r, Some(c)))?;
            }
        }
        Ok(m)
    }

    /// Finite-difference residual `|∂_t K - L K|` at `(t, x, x')`, with the
    /// generator applied symmetrically in both spatial arguments (each exact
    /// identity `L_x K = ∂_t K = L_{x'} K` holds term by term, and the
    /// symmetrized form makes the residual invariant under swapping x and x').
    /// Central differences of second order; the truncation order is fixed at
    /// the smallest stencil time so no stencil point sees a different series.
    pub fn pde_residual(&self, t: f64, x: f64, xp: f64, h_t: f64, h_x: f64) -> Result<f64> {
        if h_t <= 0.0 || h_x <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "step",
                value: h_t.min(h_x),
                reason: "finite-difference steps must be positive",
            });
        }
        self.check_time(t - h_t)?;
        for &p in &[x, xp] {
            if !(self.domain().contains(p - 2.0 * h_x) && self.domain().contains(p + 2.0 * h_x)) {
                return Err(Error::StencilOutOfDomain { t, x: p });
            }
        }
        let order = self.truncation_order(t - h_t)?;
        let k = |tt: f64, a: f64, b: f64| self.eval_unchecked(order, tt, a, b);
        let residual_fn = FdResidual {
            model: self,
            h_t,
            h_x,
        };
        Ok(residual_fn.apply(&k, t, x, xp))
    }

    /// Finite-difference PDE residual of an arbitrary function `f(x, t)`
    /// against this family's generator, symmetrized the same way as
    /// [`KernelModel::pde_residual`] but in the single spatial argument.
    /// Used to verify that fitted expansions inherit the dynamics.
    pub fn pde_residual_of<F: Fn(f64, f64) -> f64>(
        &self,
        f: &F,
        t: f64,
        x: f64,
        h_t: f64,
        h_x: f64,
    ) -> Result<f64> {
        self.check_time(t - h_t)?;
        if !(self.domain().contains(x - 2.0 * h_x) && self.domain().contains(x + 2.0 * h_x)) {
            return Err(Error::StencilOutOfDomain { t, x });
        }
        let dt = (f(x, t + h_t) - f(x, t - h_t)) / (2.0 * h_t);
        let fm = f(x - h_x, t);
        let f0 = f(x, t);
        let fp = f(x + h_x, t);
        let dx = (fp - fm) / (2.0 * h_x);
        let dxx = (fp - 2.0 * f0 + fm) / (h_x * h_x);
        let lf = self.apply_generator(x, f0, dx, dxx);
        Ok((dt - lf).abs())
    }

    /// `L f` at x given f, f' and f'' there: `L = -∂_x μ + D ∂_xx` with the
    /// family's μ(x) and constant D.
    fn apply_generator(&self, x: f64, f0: f64, dx: f64, dxx: f64) -> f64 {
        let d = self.diffusion_coefficient();
        match self.family {
            KernelFamily::OrnsteinUhlenbeck { theta, .. } => {
                // -∂_x(μ f) = -μ' f - μ f' with μ = -θx
                theta * f0 + theta * x * dx + d * dxx
            }
            _ => d * dxx,
        }
    }

    /// Stationary density of the family's evolution, when one exists:
    /// Neumann heat relaxes to the constant density on [0,1] and the OU
    /// process to N(0, σ²/2θ); the line and Dirichlet families decay to zero.
    pub fn stationary_density(&self) -> Option<StationaryDensity> {
        match self.family {
            KernelFamily::NeumannHeat => Some(StationaryDensity::Uniform),
            KernelFamily::OrnsteinUhlenbeck { theta, sigma } => Some(StationaryDensity::Gaussian {
                variance: sigma * sigma / (2.0 * theta),
            }),
            _ => None,
        }
    }
}

fn annotate(e: Error, row: usize, col: Option<usize>) -> Error {
    match e {
        Error::TimeBelowFloor { t, t_floor } => Error::Config(format!(
            "gram row {row}: time {t} below t_floor {t_floor}"
        )),
        Error::OutOfDomain { x, domain } => match col {
            Some(c) => Error::Config(format!(
                "gram entry ({row}, {c}): position {x} outside {domain}"
            )),
            None => Error::Config(format!("gram row {row}: position {x} outside {domain}")),
        },
        other => other,
    }
}

struct FdResidual<'a> {
    model: &'a KernelModel,
    h_t: f64,
    h_x: f64,
}

impl FdResidual<'_> {
    fn apply<K: Fn(f64, f64, f64) -> f64>(&self, k: &K, t: f64, x: f64, xp: f64) -> f64 {
        let (h_t, h_x) = (self.h_t, self.h_x);
        let dt = (k(t + h_t, x, xp) - k(t - h_t, x, xp)) / (2.0 * h_t);
        let k0 = k(t, x, xp);

        let kxm = k(t, x - h_x, xp);
        let kxp = k(t, x + h_x, xp);
        let lx = self.model.apply_generator(
            x,
            k0,
            (kxp - kxm) / (2.0 * h_x),
            (kxp - 2.0 * k0 + kxm) / (h_x * h_x),
        );

        let kym = k(t, x, xp - h_x);
        let kyp = k(t, x, xp + h_x);
        let ly = self.model.apply_generator(
            xp,
            k0,
            (kyp - kym) / (2.0 * h_x),
            (kyp - 2.0 * k0 + kym) / (h_x * h_x),
        );

        (dt - 0.5 * (lx + ly)).abs()
    }
}

/// Stationary density shapes returned by [`KernelModel::stationary_density`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StationaryDensity {
    /// Constant 1 on [0, 1].
    Uniform,
    /// Centered normal with the given variance.
    Gaussian { variance: f64 },
}

impl StationaryDensity {
    pub fn density(&self, x: f64) -> f64 {
        match self {
            StationaryDensity::Uniform => 1.0,
            StationaryDensity::Gaussian { variance } => {
                (-x * x / (2.0 * variance)).exp() / (2.0 * PI * variance).sqrt()
            }
        }
    }
}

/// Eigenvalues, orthonormal eigenfunctions and the weight potential of a
/// spectral family. Sequence indices are 0-based: index `j` is the j-th
/// retained mode (Dirichlet mode numbers are `j + 1`, Neumann and OU `j`).
#[derive(Debug, Clone, Copy)]
pub struct SpectralBasis {
    family: KernelFamily,
}

impl SpectralBasis {
    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn domain(&self) -> Domain {
        match self.family {
            KernelFamily::OrnsteinUhlenbeck { .. } => Domain::RealLine,
            _ => Domain::UnitInterval,
        }
    }

    /// First mode number in the family convention.
    fn first_mode(&self) -> usize {
        match self.family {
            KernelFamily::DirichletHeat => 1,
            _ => 0,
        }
    }

    /// Mode number of sequence index `j`.
    pub fn mode_number(&self, j: usize) -> usize {
        j + self.first_mode()
    }

    fn eigenvalue_of_mode(&self, n: usize) -> f64 {
        match self.family {
            KernelFamily::DirichletHeat | KernelFamily::NeumannHeat => {
                (n * n) as f64 * PI * PI
            }
            KernelFamily::OrnsteinUhlenbeck { theta, .. } => n as f64 * theta,
            KernelFamily::GaussianHeat { .. } => unreachable!("not spectral"),
        }
    }

    /// Eigenvalue `λ_j ≥ 0` of sequence index `j` (nondecreasing in `j`).
    pub fn eigenvalue(&self, j: usize) -> f64 {
        self.eigenvalue_of_mode(self.mode_number(j))
    }

    /// OU length scale `s = sqrt(σ²/2θ)`.
    fn ou_scale(&self) -> Option<f64> {
        match self.family {
            KernelFamily::OrnsteinUhlenbeck { theta, sigma } => {
                Some((sigma * sigma / (2.0 * theta)).sqrt())
            }
            _ => None,
        }
    }

    /// Orthonormal eigenfunction `φ_j(x)` (sequence index `j`).
    pub fn eigenfunction(&self, j: usize, x: f64) -> f64 {
        match self.family {
            KernelFamily::DirichletHeat => {
                std::f64::consts::SQRT_2 * sinpi(self.mode_number(j) as f64 * x)
            }
            KernelFamily::NeumannHeat => {
                if j == 0 {
                    1.0
                } else {
                    std::f64::consts::SQRT_2 * cospi(j as f64 * x)
                }
            }
            KernelFamily::OrnsteinUhlenbeck { .. } => {
                let s = self.ou_scale().unwrap();
                let u = x / s;
                let pref = (-0.5 * u * u).exp() / ((2.0 * PI).sqrt() * s).sqrt();
                let mut prev = 0.0;
                let mut cur = 1.0;
                for n in 0..j {
                    let nf = n as f64;
                    let next = (u * cur - nf.sqrt() * prev) / (nf + 1.0).sqrt();
                    prev = cur;
                    cur = next;
                }
                pref * cur
            }
            KernelFamily::GaussianHeat { .. } => unreachable!("not spectral"),
        }
    }

    /// Eigenfunctions φ_0(x) .. φ_{count-1}(x) in one recurrence pass.
    pub fn eigenfunctions(&self, count: usize, x: f64) -> Vec<f64> {
        match self.family {
            KernelFamily::OrnsteinUhlenbeck { .. } => {
                let s = self.ou_scale().unwrap();
                let u = x / s;
                let pref = (-0.5 * u * u).exp() / ((2.0 * PI).sqrt() * s).sqrt();
                let mut out = Vec::with_capacity(count);
                let mut prev = 0.0;
                let mut cur = 1.0;
                for n in 0..count {
                    out.push(pref * cur);
                    let nf = n as f64;
                    let next = (u * cur - nf.sqrt() * prev) / (nf + 1.0).sqrt();
                    prev = cur;
                    cur = next;
                }
                out
            }
            _ => (0..count).map(|j| self.eigenfunction(j, x)).collect(),
        }
    }

    /// Weight potential Φ with scalar product `⟨f, g⟩ = ∫ f g e^{Φ} dx`.
    /// Zero for the interval families; `x²/(2s²)` for OU (the reciprocal
    /// log-density of the stationary Gaussian, up to a constant).
    pub fn weight_potential(&self, x: f64) -> f64 {
        match self.ou_scale() {
            Some(s) => x * x / (2.0 * s * s),
            None => 0.0,
        }
    }

    /// Interval on which quadrature against `e^{Φ}` is carried out:
    /// the whole domain for interval families, ±10 stationary standard
    /// deviations for OU (±8 leaves ~4e-6 of orthonormality defect for the
    /// first nine modes, which is too coarse for the 1e-6 checks).
    pub fn quadrature_interval(&self) -> (f64, f64) {
        match self.ou_scale() {
            Some(s) => (-10.0 * s, 10.0 * s),
            None => (0.0, 1.0),
        }
    }
}
