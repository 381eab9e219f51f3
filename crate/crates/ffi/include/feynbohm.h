#ifndef FEYNBOHM_H
#define FEYNBOHM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum FbStatus {
  FB_STATUS_OK = 0,
  FB_STATUS_NULL_POINTER = 1,
  FB_STATUS_INVALID_ARGUMENT = 2,
  FB_STATUS_NOT_NORMALIZED = 3,
  FB_STATUS_SPACE_MISMATCH = 4,
  FB_STATUS_NOT_HERMITIAN = 5,
  FB_STATUS_NOT_UNITARY = 6,
  FB_STATUS_ENUMERATION_CAP_EXCEEDED = 7,
  FB_STATUS_DEGENERATE_MEASURE = 8,
  FB_STATUS_NUMERICAL_FAILURE = 9,
  FB_STATUS_NOT_CONVERGED = 10,
  FB_STATUS_CONFIG_ERROR = 11,
  FB_STATUS_IO_ERROR = 12,
  FB_STATUS_BUFFER_TOO_SMALL = 13,
  FB_STATUS_INVALID_UTF8 = 14,
  FB_STATUS_PANIC = 15,
} FbStatus;

typedef enum FbBoundary {
  FB_BOUNDARY_PERIODIC = 0,
  FB_BOUNDARY_DIRICHLET = 1,
} FbBoundary;

// Order of the per-variant arrays filled by [`fb_measure_report`].
typedef enum FbMeasureVariant {
  FB_MEASURE_VARIANT_POSITIVE_REAL = 0,
  FB_MEASURE_VARIANT_POSITIVE_IMAG = 1,
  FB_MEASURE_VARIANT_MODULUS = 2,
} FbMeasureVariant;

typedef struct FbGrid FbGrid;

typedef struct FbHamiltonian FbHamiltonian;

typedef struct FbUnitary FbUnitary;

typedef struct FbWaveFunction FbWaveFunction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Description of the last failure on this thread, or null after a success.
//
// The pointer stays valid until the next call on the same thread.
const char *fb_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *fb_version(void);

// `boundary` takes an [`FbBoundary`] value.
//
// # Safety
// `out` must be valid for writes.
enum FbStatus fb_grid_new(double x_min,
                          double x_max,
                          size_t n_points,
                          int32_t boundary,
                          struct FbGrid **out);

// # Safety
// `grid` must be a live handle; `out` valid for writes.
enum FbStatus fb_grid_points(const struct FbGrid *grid, size_t *out);

// # Safety
// `grid` must be a live handle; `out` valid for writes.
enum FbStatus fb_grid_dx(const struct FbGrid *grid, double *out);

// # Safety
// `grid` must come from [`fb_grid_new`] or be null.
void fb_grid_free(struct FbGrid *grid);

// Finite-difference Hamiltonian with `potential` sampled on every grid point.
//
// # Safety
// `potential` must hold `len` doubles; `out` valid for writes.
enum FbStatus fb_hamiltonian_new(const struct FbGrid *grid,
                                 const double *potential,
                                 size_t len,
                                 double hbar,
                                 double mass,
                                 struct FbHamiltonian **out);

// Lowest eigenvalue from the dense eigendecomposition.
//
// # Safety
// `h` must be a live handle; `out` valid for writes.
enum FbStatus fb_hamiltonian_min_eigenvalue(const struct FbHamiltonian *h, double *out);

// # Safety
// `h` must come from [`fb_hamiltonian_new`] or be null.
void fb_hamiltonian_free(struct FbHamiltonian *h);

// Normalized Gaussian packet; `width` is the standard deviation of `|psi|^2`.
//
// # Safety
// `grid` must be a live handle; `out` valid for writes.
enum FbStatus fb_wavefunction_gaussian(const struct FbGrid *grid,
                                       double center,
                                       double width,
                                       double wavenumber,
                                       struct FbWaveFunction **out);

// State on a grid (`grid` non-null) or on a finite space of size `len`.
// Amplitudes are taken as given; see [`fb_wavefunction_normalize`].
//
// # Safety
// `re` and `im` must hold `len` doubles; `grid` is a live handle or null.
enum FbStatus fb_wavefunction_new(const struct FbGrid *grid,
                                  const double *re,
                                  const double *im,
                                  size_t len,
                                  struct FbWaveFunction **out);

// # Safety
// `psi` must be a live handle; `out` valid for writes.
enum FbStatus fb_wavefunction_normalize(const struct FbWaveFunction *psi,
                                        struct FbWaveFunction **out);

// # Safety
// `psi` must be a live handle; `out` valid for writes.
enum FbStatus fb_wavefunction_len(const struct FbWaveFunction *psi, size_t *out);

// Copies the amplitudes into `re` and `im`, each of capacity `cap`.
//
// # Safety
// `re` and `im` must be valid for `cap` writes.
enum FbStatus fb_wavefunction_amplitudes(const struct FbWaveFunction *psi,
                                         double *re,
                                         double *im,
                                         size_t cap);

// Born probabilities per configuration into `out` (capacity `cap`).
//
// # Safety
// `out` must be valid for `cap` writes.
enum FbStatus fb_wavefunction_born(const struct FbWaveFunction *psi, double *out, size_t cap);

// # Safety
// `psi` must come from this library or be null.
void fb_wavefunction_free(struct FbWaveFunction *psi);

// `exp(-i dt H / hbar)`.
//
// # Safety
// `h` must be a live handle; `out` valid for writes.
enum FbStatus fb_unitary_from_hamiltonian(const struct FbHamiltonian *h,
                                          double dt,
                                          struct FbUnitary **out);

// Unitary step on a finite space of size `n` from row-major parts.
//
// # Safety
// `re` and `im` must hold `n * n` doubles.
enum FbStatus fb_unitary_from_matrix(size_t n,
                                     const double *re,
                                     const double *im,
                                     double dt,
                                     struct FbUnitary **out);

// # Safety
// `u` must come from this library or be null.
void fb_unitary_free(struct FbUnitary *u);

// Applies the step `steps` times by matrix products.
//
// # Safety
// Handles must be live; `out` valid for writes.
enum FbStatus fb_evolve(const struct FbUnitary *u,
                        const struct FbWaveFunction *psi,
                        size_t steps,
                        struct FbWaveFunction **out);

// Same result as [`fb_evolve`] by summing over every discrete path.
//
// # Safety
// Handles must be live; `out` valid for writes.
enum FbStatus fb_path_sum_evolve(const struct FbUnitary *u,
                                 const struct FbWaveFunction *psi,
                                 size_t steps,
                                 struct FbWaveFunction **out);

// Endpoint TV distance from the Born distribution for each
// [`FbMeasureVariant`]. Degenerate variants get `NaN` in `tv` and `0` in
// `ok`; the call itself still succeeds.
//
// # Safety
// `tv` and `ok` must be valid for 3 writes each.
enum FbStatus fb_measure_report(const struct FbUnitary *u,
                                const struct FbWaveFunction *psi,
                                size_t steps,
                                double *tv,
                                uint8_t *ok);

// Smallest entry of `exp(-dtau H)`.
//
// # Safety
// `h` must be a live handle; `out` valid for writes.
enum FbStatus fb_euclidean_kernel_min_entry(const struct FbHamiltonian *h,
                                            double dtau,
                                            double *out);

// Imaginary-time ground-energy estimate from a nonnegative start vector.
//
// # Safety
// `rho0` must hold `len` doubles; `out` valid for writes.
enum FbStatus fb_ground_energy(const struct FbHamiltonian *h,
                               const double *rho0,
                               size_t len,
                               double dtau,
                               size_t steps,
                               double tol,
                               double *out);

// Largest KS statistic over the initial sample and three checkpoints of a
// Bohmian ensemble of `count` particles.
//
// # Safety
// Handles must be live; `out` valid for writes.
enum FbStatus fb_equivariance_max_ks(const struct FbHamiltonian *h,
                                     const struct FbWaveFunction *psi0,
                                     size_t count,
                                     double t_span,
                                     double ode_dt,
                                     uint64_t seed,
                                     double *out);

// Parses a TOML scenario config and writes its results into `out_dir`.
//
// `seed` replaces every configured seed when `override_seed` is nonzero.
//
// # Safety
// Both strings must be NUL-terminated.
enum FbStatus fb_run_scenario(const char *config_toml,
                              const char *out_dir,
                              uint8_t override_seed,
                              uint64_t seed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FEYNBOHM_H */
