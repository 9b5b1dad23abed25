//! Dense linear algebra: SVD pseudo-inverse, symmetric PSD square root, and
//! minimum-norm least squares over vertically stacked blocks.
//!
//! Decompositions come from nalgebra; the rank thresholding, clamping and
//! stacking policies live here.

use crate::error::{Error, Result};

use nalgebra::{DMatrix, DVector};

const MAX_ITER: usize = 10_000;

/// Default clamp tolerance for [`sym_sqrt_psd`]. Gram matrices of fast
/// decaying spectral kernels are numerically semi-definite, so a small
/// negative band must be treated as zero for the square root to exist.
pub const DEFAULT_CLAMP_TOL: f64 = 1e-10;

/// Standard numerical-rank tolerance: `max(rows, cols) · ε`.
pub fn default_rtol(rows: usize, cols: usize) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON
}

/// Rank and spectrum diagnostics from a pseudo-inverse computation.
#[derive(Debug, Clone)]
pub struct PinvReport {
    pub rank: usize,
    /// Singular values, sorted nonincreasing.
    pub singular_values: Vec<f64>,
    pub rtol_used: f64,
}

fn check_finite(a: &DMatrix<f64>, context: &'static str) -> Result<()> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(context));
    }
    Ok(())
}

/// Moore-Penrose pseudo-inverse by SVD. Singular values below
/// `rtol · σ_max` are treated as zero; `rtol = 0` keeps every positive one.
pub fn pinv(a: &DMatrix<f64>, rtol: f64) -> Result<(DMatrix<f64>, PinvReport)> {
    check_finite(a, "pinv input")?;
    if !(0.0..1.0).contains(&rtol) {
        return Err(Error::InvalidParameter {
            name: "rtol",
            value: rtol,
            reason: "must lie in [0, 1)",
        });
    }
    // nalgebra 0.35 can return misaligned factors on some wide inputs;
    // A+ = (A^T+)^T routes everything through the tall orientation.
    if a.nrows() < a.ncols() {
        let (pt, report) = pinv_tall(&a.transpose(), rtol)?;
        return Ok((pt.transpose(), report));
    }
    pinv_tall(a, rtol)
}

fn pinv_tall(a: &DMatrix<f64>, rtol: f64) -> Result<(DMatrix<f64>, PinvReport)> {
    let (u, sigma, v) = jacobi_svd(a)?;
    let sigma_max = sigma.iter().cloned().fold(0.0, f64::max);
    let threshold = rtol * sigma_max;

    let mut ut = u.transpose();
    let mut rank = 0;
    for i in 0..sigma.len() {
        if sigma[i] > threshold && sigma[i] > 0.0 {
            let inv = 1.0 / sigma[i];
            ut.row_mut(i).scale_mut(inv);
            rank += 1;
        } else {
            ut.row_mut(i).fill(0.0);
        }
    }
    let pseudo = v * ut;

    let mut values = sigma;
    values.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok((
        pseudo,
        PinvReport {
            rank,
            singular_values: values,
            rtol_used: rtol,
        },
    ))
}

/// One-sided Jacobi SVD of a tall matrix (`rows ≥ cols`): returns the thin
/// factorization `A = U diag(σ) Vᵀ` as `(U, σ, V)` with `U` m×n and `V` n×n.
///
/// Chosen over the nalgebra SVD after it returned misaligned factors on some
/// exactly rank-deficient inputs; Jacobi rotations also resolve small
/// singular values with high relative accuracy, which the near-singular Gram
/// matrices of fast-decaying spectral kernels need. Cost is O(m n² · sweeps),
/// fine at desk scale.
fn jacobi_svd(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    const MAX_SWEEPS: usize = 60;
    let (m, n) = a.shape();
    debug_assert!(m >= n);
    let mut w = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let tol = (m as f64).sqrt() * f64::EPSILON;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let col_p = w.column(p);
                let col_q = w.column(q);
                let app = col_p.dot(&col_p);
                let aqq = col_q.dot(&col_q);
                let apq = col_p.dot(&col_q);
                if apq.abs() <= tol * (app * aqq).sqrt() || apq == 0.0 {
                    continue;
                }
                rotated = true;
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for i in 0..m {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    w[(i, p)] = c * wp - s * wq;
                    w[(i, q)] = s * wp + c * wq;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdFailed {
            max_iterations: MAX_SWEEPS,
        });
    }

    let mut sigma = vec![0.0; n];
    for j in 0..n {
        let norm = w.column(j).norm();
        sigma[j] = norm;
        if norm > 0.0 {
            w.column_mut(j).scale_mut(1.0 / norm);
        }
    }
    Ok((w, sigma, v))
}

/// Symmetric PSD square root `L` with `L·L = K`. Eigenvalues in
/// `[-clamp_tol·λ_max, 0)` are clamped to zero; anything below that band is
/// reported as a not-PSD error.
pub fn sym_sqrt_psd(k: &DMatrix<f64>, clamp_tol: f64) -> Result<DMatrix<f64>> {
    check_finite(k, "sym_sqrt_psd input")?;
    if !k.is_square() {
        return Err(Error::DimensionMismatch {
            context: "sym_sqrt_psd expects a square matrix",
            expected: k.nrows(),
            got: k.ncols(),
        });
    }
    let scale = k.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..k.nrows() {
        for j in (i + 1)..k.ncols() {
            let dev = (k[(i, j)] - k[(j, i)]).abs();
            if dev > 1e-10 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::NotSymmetric {
                    deviation: dev,
                    tol: 1e-10 * scale,
                    row: i,
                    col: j,
                });
            }
        }
    }
    let eig = nalgebra::SymmetricEigen::try_new(k.clone(), f64::EPSILON, MAX_ITER).ok_or(
        Error::EigFailed {
            max_iterations: MAX_ITER,
        },
    )?;
    let lambda_max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let floor = -clamp_tol * lambda_max;
    let mut roots = eig.eigenvalues.clone();
    for v in roots.iter_mut() {
        if *v < floor {
            return Err(Error::NotPsd {
                eigenvalue: *v,
                tol: -floor,
                clamp_tol,
            });
        }
        *v = v.max(0.0).sqrt();
    }
    let scaled = {
        let mut q = eig.eigenvectors.clone();
        for (c, r) in roots.iter().enumerate() {
            q.column_mut(c).scale_mut(*r);
        }
        q
    };
    let l = scaled * eig.eigenvectors.transpose();
    // kill rounding asymmetry so the result is reusable as a symmetric input
    Ok(0.5 * (&l + l.transpose()))
}

/// Minimum-norm least-squares solution of the vertically stacked system
/// `min_x Σ_k ‖A_k x - b_k‖²`, solved as `(stack A)⁺ (stack b)`.
pub fn stacked_min_norm_lstsq(blocks: &[(DMatrix<f64>, DVector<f64>)]) -> Result<DVector<f64>> {
    if blocks.is_empty() {
        return Err(Error::EmptyInput("stacked_min_norm_lstsq blocks"));
    }
    let cols = blocks[0].0.ncols();
    let mut rows = 0;
    for (a, b) in blocks {
        if a.ncols() != cols {
            return Err(Error::DimensionMismatch {
                context: "stacked blocks must share a column count",
                expected: cols,
                got: a.ncols(),
            });
        }
        if a.nrows() != b.len() {
            return Err(Error::DimensionMismatch {
                context: "block right-hand side length must match block rows",
                expected: a.nrows(),
                got: b.len(),
            });
        }
        rows += a.nrows();
    }
    let mut stacked = DMatrix::zeros(rows, cols);
    let mut rhs = DVector::zeros(rows);
    let mut offset = 0;
    for (a, b) in blocks {
        stacked.rows_mut(offset, a.nrows()).copy_from(a);
        rhs.rows_mut(offset, b.len()).copy_from(b);
        offset += a.nrows();
    }
    let (pseudo, _) = pinv(&stacked, default_rtol(rows, cols))?;
    Ok(pseudo * rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn spectral_norm(a: &DMatrix<f64>) -> f64 {
        a.clone()
            .try_svd(false, false, f64::EPSILON, MAX_ITER)
            .unwrap()
            .singular_values
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }

    fn assert_penrose(a: &DMatrix<f64>, ap: &DMatrix<f64>) {
        // conditions on A are measured relative to ‖A‖, the condition on A+
        // relative to ‖A+‖ (its own natural scale), projector symmetry on
        // the absolute scale since projectors have unit norm
        let norm_a = spectral_norm(a).max(1e-300);
        let norm_ap = spectral_norm(ap).max(1e-300);
        let aapa = a * ap * a;
        let apaap = ap * a * ap;
        assert!(
            (&aapa - a).abs().max() <= 1e-8 * norm_a,
            "A A+ A = A violated"
        );
        assert!(
            (&apaap - ap).abs().max() <= 1e-8 * norm_ap,
            "A+ A A+ = A+ violated"
        );
        let aap = a * ap;
        let apa = ap * a;
        assert!(
            (&aap - aap.transpose()).abs().max() <= 1e-8,
            "AA+ not symmetric"
        );
        assert!(
            (&apa - apa.transpose()).abs().max() <= 1e-8,
            "A+A not symmetric"
        );
    }

    #[test]
    fn identity_pinv() {
        let a = DMatrix::<f64>::identity(3, 3);
        let (p, report) = pinv(&a, 0.0).unwrap();
        assert_abs_diff_eq!((p - DMatrix::identity(3, 3)).abs().max(), 0.0, epsilon = 1e-14);
        assert_eq!(report.rank, 3);
    }

    #[test]
    fn all_ones_rank_one() {
        let a = DMatrix::from_element(2, 2, 1.0);
        let (p, report) = pinv(&a, default_rtol(2, 2)).unwrap();
        for v in p.iter() {
            assert_abs_diff_eq!(*v, 0.25, epsilon = 1e-14);
        }
        assert_eq!(report.rank, 1);
        assert_abs_diff_eq!(report.singular_values[0], 2.0, epsilon = 1e-14);
        assert!(report.singular_values[1] <= 1e-14);
    }

    #[test]
    fn rank_three_rectangular() {
        // deterministic pseudo-random rank-3 6×4 matrix as B(6×3)·C(3×4)
        let mut s = 0xabcd_1234_5678_9def_u64;
        let mut next = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let b = DMatrix::from_fn(6, 3, |_, _| next());
        let c = DMatrix::from_fn(3, 4, |_, _| next());
        let a = b * c;
        let (p, report) = pinv(&a, default_rtol(6, 4)).unwrap();
        assert_eq!(report.rank, 3);
        let err = (&a * &p * &a - &a).abs().max();
        assert!(err <= 1e-10, "reconstruction error {err}");
        assert_penrose(&a, &p);
    }

    #[test]
    fn pinv_rejects_bad_inputs() {
        let a = DMatrix::from_element(2, 2, f64::NAN);
        assert!(matches!(pinv(&a, 0.0), Err(Error::NonFinite(_))));
        let a = DMatrix::<f64>::identity(2, 2);
        assert!(pinv(&a, 1.0).is_err());
        assert!(pinv(&a, -0.1).is_err());
    }

    #[test]
    fn report_sorted_nonincreasing() {
        let a = DMatrix::from_fn(5, 5, |i, j| ((i * 5 + j) as f64).sin());
        let (_, report) = pinv(&a, 0.0).unwrap();
        for w in report.singular_values.windows(2) {
            assert!(w[0] >= w[1]);
        }
        assert!(report.rank <= 5);
    }

    #[test]
    fn sqrt_of_diagonal() {
        let k = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 9.0]));
        let l = sym_sqrt_psd(&k, DEFAULT_CLAMP_TOL).unwrap();
        assert_abs_diff_eq!(l[(0, 0)], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(l[(1, 1)], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(l[(0, 1)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn sqrt_of_zero_matrix() {
        let k = DMatrix::<f64>::zeros(4, 4);
        let l = sym_sqrt_psd(&k, DEFAULT_CLAMP_TOL).unwrap();
        assert_eq!(l.abs().max(), 0.0);
    }

    #[test]
    fn sqrt_reconstructs_kernel_gram() {
        let model = crate::kernels::KernelModel::gaussian_heat(1.0).unwrap();
        let xs = [0.0, 0.5, 1.1, 1.7, 2.4];
        let rows: Vec<(f64, f64)> = xs.iter().map(|&x| (x, 0.5)).collect();
        let k = model.gram(&rows, &xs).unwrap();
        let l = sym_sqrt_psd(&k, DEFAULT_CLAMP_TOL).unwrap();
        let err = (&l * &l - &k).abs().max();
        assert!(err <= 1e-10, "L·L - K error {err}");
    }

    #[test]
    fn sqrt_rejects_asymmetric_and_indefinite() {
        let mut k = DMatrix::<f64>::identity(2, 2);
        k[(0, 1)] = 0.5;
        assert!(matches!(
            sym_sqrt_psd(&k, DEFAULT_CLAMP_TOL),
            Err(Error::NotSymmetric { .. })
        ));
        let k = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -0.5]));
        match sym_sqrt_psd(&k, DEFAULT_CLAMP_TOL) {
            Err(Error::NotPsd { eigenvalue, .. }) => assert_abs_diff_eq!(eigenvalue, -0.5),
            other => panic!("expected NotPsd, got {other:?}"),
        }
    }

    #[test]
    fn sqrt_clamps_tiny_negative_band() {
        let k = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1e-12]));
        let l = sym_sqrt_psd(&k, DEFAULT_CLAMP_TOL).unwrap();
        assert_abs_diff_eq!(l[(1, 1)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn single_invertible_block() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 3.0]);
        let b = DVector::from_vec(vec![5.0, 6.0]);
        let x = stacked_min_norm_lstsq(&[(a.clone(), b.clone())]).unwrap();
        let direct = a.lu().solve(&b).unwrap();
        assert!((x - direct).abs().max() <= 1e-12);
    }

    #[test]
    fn duplicated_blocks_preserve_solution() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.5, 0.2, 2.0, -0.3, 1.1]);
        let b = DVector::from_vec(vec![1.0, -0.4, 0.7]);
        let single = stacked_min_norm_lstsq(&[(a.clone(), b.clone())]).unwrap();
        let double = stacked_min_norm_lstsq(&[(a.clone(), b.clone()), (a, b)]).unwrap();
        assert!((single - double).abs().max() <= 1e-10);
    }

    #[test]
    fn stacked_matches_ridge_limit_oracle() {
        let a1 = DMatrix::from_fn(4, 3, |i, j| ((i + j) as f64 * 0.83).sin());
        let a2 = DMatrix::from_fn(4, 3, |i, j| ((2 * i + j) as f64 * 0.41).cos());
        let b1 = DVector::from_fn(4, |i, _| (i as f64 * 0.9).sin());
        let b2 = DVector::from_fn(4, |i, _| (i as f64 * 1.7).cos());
        let x = stacked_min_norm_lstsq(&[(a1.clone(), b1.clone()), (a2.clone(), b2.clone())])
            .unwrap();
        // tiny-ridge normal equations over the stacked system
        let mut stacked = DMatrix::zeros(8, 3);
        stacked.rows_mut(0, 4).copy_from(&a1);
        stacked.rows_mut(4, 4).copy_from(&a2);
        let mut rhs = DVector::zeros(8);
        rhs.rows_mut(0, 4).copy_from(&b1);
        rhs.rows_mut(4, 4).copy_from(&b2);
        let gram = stacked.transpose() * &stacked + DMatrix::identity(3, 3) * 1e-12;
        let ridge = gram.lu().solve(&(stacked.transpose() * &rhs)).unwrap();
        let objective = |v: &DVector<f64>| (&stacked * v - &rhs).norm_squared();
        assert_abs_diff_eq!(objective(&x), objective(&ridge), epsilon = 1e-8);
    }

    #[test]
    fn stacked_dimension_errors() {
        let a = DMatrix::<f64>::identity(2, 2);
        let b = DVector::from_vec(vec![1.0, 2.0]);
        let a3 = DMatrix::<f64>::identity(3, 3);
        let b3 = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        assert!(stacked_min_norm_lstsq(&[]).is_err());
        assert!(stacked_min_norm_lstsq(&[(a.clone(), b3.clone())]).is_err());
        assert!(stacked_min_norm_lstsq(&[(a, b), (a3, b3)]).is_err());
    }

    #[test]
    fn min_norm_among_consistent_solutions() {
        // underdetermined consistent system: any null-space shift grows the norm
        let a = DMatrix::from_fn(3, 6, |i, j| ((i * 6 + j) as f64 * 0.29).sin());
        let x0 = DVector::from_fn(6, |i, _| (i as f64 * 0.13).cos());
        let b = &a * &x0;
        let (p, _) = pinv(&a, default_rtol(3, 6)).unwrap();
        let xstar = &p * &b;
        let proj = &p * &a; // A+A projects onto the row space
        for k in 0..10 {
            let w = DVector::from_fn(6, |i, _| ((i + 7 * k) as f64 * 0.57).sin());
            let null_part = &w - &proj * &w;
            let shifted = &xstar + null_part;
            assert!(
                xstar.norm() <= shifted.norm() + 1e-12,
                "min-norm violated at k = {k}"
            );
        }
    }

    proptest! {
        #[test]
        fn penrose_conditions_hold(rows in 1usize..20, cols in 1usize..20,
                                   rank_seed in 1usize..20, seed in 0u64..200) {
            // controlled spectrum: A = Q1 diag(σ) Q2ᵀ with orthonormal
            // factors, σ log-spaced down to 1e-5 plus exact zeros, so the
            // kept-rank conditioning stays testable at the 1e-8 level
            let rank = rank_seed.min(rows).min(cols);
            let mut s = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
            let mut next = move || {
                s ^= s << 13; s ^= s >> 7; s ^= s << 17;
                (s >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
            };
            let q1 = DMatrix::from_fn(rows, rows, |_, _| next()).qr().q();
            let q2 = DMatrix::from_fn(cols, cols, |_, _| next()).qr().q();
            let mut sigma = DMatrix::zeros(rows, cols);
            for i in 0..rank {
                sigma[(i, i)] = 10f64.powf(-5.0 * i as f64 / rank.max(1) as f64);
            }
            let a = &q1 * sigma * q2.transpose();
            let (p, report) = pinv(&a, default_rtol(rows, cols)).unwrap();
            prop_assert!(report.rank <= rank.max(1));
            assert_penrose(&a, &p);
        }

        #[test]
        fn sqrt_composition_recovers_square(dim in 1usize..8, seed in 0u64..100) {
            // L0 PSD by construction; sym_sqrt(L0·L0) must square back to L0·L0
            let mut s = seed.wrapping_mul(0x2545f4914f6cdd1d).wrapping_add(3);
            let mut next = move || {
                s ^= s << 13; s ^= s >> 7; s ^= s << 17;
                (s >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
            };
            let g = DMatrix::from_fn(dim, dim, |_, _| next());
            let l0 = &g * g.transpose(); // PSD
            let k = &l0 * &l0;
            let l = sym_sqrt_psd(&k, DEFAULT_CLAMP_TOL).unwrap();
            let err = (&l * &l - &k).abs().max();
            let scale = k.abs().max().max(1.0);
            prop_assert!(err <= 1e-8 * scale, "err {err} scale {scale}");
        }
    }
}

