#ifndef TORUS_VREP_H
#define TORUS_VREP_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Status codes returned by fallible calls.
typedef enum TvStatus {
  TV_STATUS_OK = 0,
  TV_STATUS_NULL_POINTER = 1,
  TV_STATUS_INVALID_ARGUMENT = 2,
  TV_STATUS_BUFFER_TOO_SMALL = 3,
  TV_STATUS_NOT_CONVERGED = 4,
  TV_STATUS_NUMERICAL_FAILURE = 5,
  TV_STATUS_PANIC = 6,
} TvStatus;

typedef struct TvBasis TvBasis;

typedef struct TvEnsemble TvEnsemble;

typedef struct TvInteraction TvInteraction;

typedef struct TvInversion TvInversion;

typedef struct TvPotential TvPotential;

// Scalar thermodynamics of a Gibbs ensemble.
typedef struct TvThermodynamics {
  double beta;
  double log_z;
  double omega;
  double entropy;
  double internal_energy;
  double kinetic_energy;
  double min_density;
} TvThermodynamics;

// Solver settings for [`tv_invert`]. Zero fields take the library defaults.
typedef struct TvInversionOptions {
  double tol_rho;
  double tol_grad;
  uintptr_t max_iter;
  uintptr_t potential_cutoff;
} TvInversionOptions;

// Summary of an inversion run.
typedef struct TvInversionSummary {
  bool converged;
  uintptr_t iterations;
  double f_value;
  double density_residual;
  double gradient_norm;
  uintptr_t potential_cutoff;
} TvInversionSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Last error message on this thread, or null if none. The pointer stays
// valid until the next failing call on the same thread.
const char *tv_last_error_message(void);

// Library version as a static nul-terminated string.
const char *tv_version(void);

// Fock basis for `particles` fermions in plane waves `|p| <= cutoff` with spin.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum TvStatus tv_basis_new(uintptr_t cutoff, uintptr_t particles, struct TvBasis **out);

// Number of determinants, or 0 for a null handle.
//
// # Safety
// `basis` must be null or a live handle from [`tv_basis_new`].
uintptr_t tv_basis_dimension(const struct TvBasis *basis);

// # Safety
// `basis` must be null or a live handle from [`tv_basis_new`], not used afterwards.
void tv_basis_free(struct TvBasis *basis);

// Potential with `v̂_k = re[k-1] + i·im[k-1]` for `k = 1..=count`
// (`v̂_{-k}` is the conjugate, `v̂_0 = 0`). `im` may be null for a real
// cosine series.
//
// # Safety
// `re` (and `im` if non-null) must point to `count` readable doubles; `out`
// must be writable.
enum TvStatus tv_potential_new(const double *re,
                               const double *im,
                               uintptr_t count,
                               struct TvPotential **out);

// Distributional potential `f + g'` from the Fourier coefficients of `f`
// and `g` for `k = 1..=count`.
//
// # Safety
// Each non-null array must hold `count` doubles; `out` must be writable.
enum TvStatus tv_potential_from_parts(const double *f_re,
                                      const double *f_im,
                                      const double *g_re,
                                      const double *g_im,
                                      uintptr_t count,
                                      struct TvPotential **out);

// Largest stored mode of the potential, or 0 for a null handle.
//
// # Safety
// `potential` must be null or a live handle.
uintptr_t tv_potential_cutoff(const struct TvPotential *potential);

// Writes `v̂_k` for any integer `k` (zero outside the stored range).
//
// # Safety
// `potential` must be a live handle; `re` and `im` must be writable.
enum TvStatus tv_potential_coefficient(const struct TvPotential *potential,
                                       int32_t k,
                                       double *re,
                                       double *im);

// # Safety
// `potential` must be null or a live handle, not used afterwards.
void tv_potential_free(struct TvPotential *potential);

// Pair interaction `2·strength·cos(2π(x-y))`; `strength = 0` gives no interaction.
//
// # Safety
// `out` must be writable.
enum TvStatus tv_interaction_cosine(double strength, struct TvInteraction **out);

// Pair interaction with real even Fourier coefficients `ŵ_k = w[k]`, `k = 0..count-1`.
//
// # Safety
// `w` must point to `count` doubles; `out` must be writable.
enum TvStatus tv_interaction_new(const double *w, uintptr_t count, struct TvInteraction **out);

// # Safety
// `interaction` must be null or a live handle, not used afterwards.
void tv_interaction_free(struct TvInteraction *interaction);

// Gibbs ensemble of `H_v` at inverse temperature `beta`. A null
// `interaction` means non-interacting; `grid_points = 0` uses `8K` points.
//
// # Safety
// Handles must be live (or null where allowed); `out` must be writable.
enum TvStatus tv_forward(const struct TvBasis *basis,
                         const struct TvPotential *potential,
                         const struct TvInteraction *interaction,
                         double beta,
                         uintptr_t grid_points,
                         struct TvEnsemble **out);

// # Safety
// `ensemble` must be a live handle; `out` must be writable.
enum TvStatus tv_ensemble_thermodynamics(const struct TvEnsemble *ensemble,
                                         struct TvThermodynamics *out);

// Density on the uniform grid `x_m = m/M`. Pass a null buffer with
// `len = 0` to query `M` through `written`.
//
// # Safety
// `ensemble` must be live; `buf` must hold `len` doubles; `written` may be null.
enum TvStatus tv_ensemble_density(const struct TvEnsemble *ensemble,
                                  double *buf,
                                  uintptr_t len,
                                  uintptr_t *written);

// Density Fourier coefficients `ρ̂_k` for `k = 0..=2K`, split into real and
// imaginary buffers of equal length.
//
// # Safety
// `ensemble` must be live; `re` and `im` must each hold `len` doubles.
enum TvStatus tv_ensemble_fourier(const struct TvEnsemble *ensemble,
                                  double *re,
                                  double *im,
                                  uintptr_t len,
                                  uintptr_t *written);

// # Safety
// `ensemble` must be null or a live handle, not used afterwards.
void tv_ensemble_free(struct TvEnsemble *ensemble);

// Potential whose Gibbs density matches the target `ρ̂_k = re[k] + i·im[k]`,
// `k = 0..count-1`, with `ρ̂_0 = N`. A run that stops without meeting the
// tolerances still produces a handle and returns `NotConverged`.
//
// # Safety
// Handles must be live (interaction and options may be null); `re` and `im`
// must hold `count` doubles; `out` must be writable.
enum TvStatus tv_invert(const struct TvBasis *basis,
                        const struct TvInteraction *interaction,
                        double beta,
                        const double *re,
                        const double *im,
                        uintptr_t count,
                        const struct TvInversionOptions *options,
                        struct TvInversion **out);

// # Safety
// `inversion` must be a live handle; `out` must be writable.
enum TvStatus tv_inversion_summary(const struct TvInversion *inversion,
                                   struct TvInversionSummary *out);

// Copies the recovered potential into a new handle (gauge `v̂_0 = 0`).
//
// # Safety
// `inversion` must be a live handle; `out` must be writable.
enum TvStatus tv_inversion_potential(const struct TvInversion *inversion, struct TvPotential **out);

// # Safety
// `inversion` must be null or a live handle, not used afterwards.
void tv_inversion_free(struct TvInversion *inversion);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TORUS_VREP_H */
