//! Spatio-temporal regression and density estimation in which every candidate
//! function exactly solves a Fokker-Planck-type PDE.
//!
//! Candidate functions are expansions `f(x, t) = Σ a_μ K_t(x, x_μ)` in
//! time-dependent positive-definite kernels `K_t` — the Green's functions of
//! `∂_t u = L u` for the built-in generators (heat on the line, heat on
//! `[0,1]` with Dirichlet or Neumann boundaries, Ornstein-Uhlenbeck). A
//! representer argument reduces risk minimization over all solutions to a
//! finite pseudo-inverse solve over kernels centered at the sample points;
//! the same machinery drives a simultaneous kernel-mean density estimator
//! across snapshots.
//!
//! The `fpkern` binary runs declarative experiment configs and emits
//! machine-readable CSV/JSON artifacts; see the `cli` module and the
//! `configs/` fixtures.

pub mod baselines;
pub mod checks;
pub mod cli;
pub mod data;
pub mod density;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod kernels;
pub mod linalg;
pub mod quadrature;
pub mod regression;

pub use data::{DensitySampleSet, DensitySnapshot, Snapshot, SnapshotSet};
pub use error::{Error, Result};
pub use kernels::{KernelFamily, KernelModel, SpectralBasis};
