#ifndef FPKERN_H
#define FPKERN_H

/* Generated by cbindgen from the fpkern-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible call.
typedef enum {
  FPK_STATUS_OK = 0,
  FPK_STATUS_NULL_POINTER = 1,
  FPK_STATUS_INVALID_ARGUMENT = 2,
  FPK_STATUS_DOMAIN_ERROR = 3,
  FPK_STATUS_NUMERICAL_ERROR = 4,
} FpkStatus;

// Opaque snapshot container. Regression snapshots carry targets; density
// snapshots do not. The two kinds cannot be mixed in one dataset.
typedef struct FpkDataset FpkDataset;

// Opaque density-estimate handle.
typedef struct FpkDensity FpkDensity;

// Opaque fitted-regression handle.
typedef struct FpkFit FpkFit;

// Opaque kernel model handle.
typedef struct FpkModel FpkModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copy the last error message of this thread into `buf` (NUL-terminated,
// truncated to `cap` bytes). Returns the number of bytes copied, excluding
// the terminator; zero when no error has occurred or `buf` is NULL/empty.
size_t fpk_last_error_message(char *buf, size_t cap);

// Heat kernel on the line with diffusion coefficient `d > 0`.
FpkStatus fpk_model_gaussian_heat(double d, FpkModel **out);

// Heat kernel on [0,1] with zero boundary values.
FpkStatus fpk_model_dirichlet_heat(FpkModel **out);

// Heat kernel on [0,1] with zero boundary flux.
FpkStatus fpk_model_neumann_heat(FpkModel **out);

// Ornstein-Uhlenbeck kernel with mean-reversion `theta > 0` and noise
// `sigma > 0`.
FpkStatus fpk_model_ornstein_uhlenbeck(double theta, double sigma, FpkModel **out);

void fpk_model_free(FpkModel *model);

// Kernel value K_t(x, x').
FpkStatus fpk_model_eval(const FpkModel *model, double t, double x, double xp, double *out_value);

// Truncation mode number used at time t.
FpkStatus fpk_model_truncation_order(const FpkModel *model, double t, size_t *out_order);

// Symmetrized finite-difference residual |∂_t K - L K| at (t, x, x').
FpkStatus fpk_model_pde_residual(const FpkModel *model,
                                 double t,
                                 double x,
                                 double xp,
                                 double h_t,
                                 double h_x,
                                 double *out_value);

// New empty dataset.
FpkStatus fpk_dataset_new(FpkDataset **out);

// Append one snapshot. `xs` must point to `len` positions; `ys` either
// points to `len` targets (regression data) or is NULL (density samples).
// Snapshots must be appended in strictly increasing time order and keep one
// kind throughout.
FpkStatus fpk_dataset_add_snapshot(FpkDataset *dataset,
                                   double t,
                                   const double *xs,
                                   const double *ys,
                                   size_t len);

void fpk_dataset_free(FpkDataset *dataset);

// Minimum-norm least-squares fit over all snapshots. A negative `rtol`
// selects the default max(rows, cols)·ε rank cutoff.
FpkStatus fpk_fit(const FpkModel *model, const FpkDataset *dataset, double rtol, FpkFit **out);

// Fit with a soft initial condition at `t0` (see the library docs):
// the initial block is evaluated at max(t0, t_epsilon) and weighted by
// `weight` relative to the data blocks.
FpkStatus fpk_fit_with_initial(const FpkModel *model,
                               const FpkDataset *dataset,
                               double t0,
                               const double *xs,
                               const double *ys,
                               size_t len,
                               double t_epsilon,
                               double weight,
                               double rtol,
                               FpkFit **out);

// Evaluate the fitted expansion at (x, t).
FpkStatus fpk_fit_predict(const FpkFit *fit, double x, double t, double *out_value);

size_t fpk_fit_coefficient_count(const FpkFit *fit);

// Copy the coefficient vector into `buf` (must hold `fpk_fit_coefficient_count`
// entries).
FpkStatus fpk_fit_coefficients(const FpkFit *fit, double *buf, size_t len);

FpkStatus fpk_fit_residual_norm(const FpkFit *fit, double *out_value);

void fpk_fit_free(FpkFit *fit);

// Equal-weight kernel density estimator of one sample at time t.
FpkStatus fpk_kde_snapshot(const FpkModel *model,
                           const double *xs,
                           size_t len,
                           double t,
                           FpkDensity **out);

// Simultaneous kernel-mean estimator over all snapshots of a density
// dataset (snapshots added with `ys = NULL`).
FpkStatus fpk_kme_combined(const FpkModel *model, const FpkDataset *dataset, FpkDensity **out);

// Evaluate a density estimate at (x, t).
FpkStatus fpk_density_evaluate(const FpkDensity *density, double x, double t, double *out_value);

size_t fpk_density_coefficient_count(const FpkDensity *density);

FpkStatus fpk_density_coefficients(const FpkDensity *density, double *buf, size_t len);

void fpk_density_free(FpkDensity *density);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FPKERN_H */
