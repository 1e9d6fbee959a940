#ifndef PATCHRAD_H
#define PATCHRAD_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result code of every fallible call.
typedef enum PatchradStatus {
  PATCHRAD_STATUS_OK = 0,
  PATCHRAD_STATUS_INVALID_ARGUMENT = 1,
  PATCHRAD_STATUS_NULL_POINTER = 2,
  PATCHRAD_STATUS_NON_FINITE = 3,
  PATCHRAD_STATUS_NON_CONVERGENCE = 4,
  PATCHRAD_STATUS_TAIL_NOT_REACHED = 5,
  PATCHRAD_STATUS_IO = 6,
  PATCHRAD_STATUS_PANIC = 7,
} PatchradStatus;

// Taper for sampled trajectories.
typedef enum PatchradWindow {
  PATCHRAD_WINDOW_HANN = 0,
  // Uses the `alpha` argument as the tapered fraction.
  PATCHRAD_WINDOW_TUKEY = 1,
  PATCHRAD_WINDOW_RECTANGULAR = 2,
} PatchradWindow;

// Opaque correlation-model handle.
typedef struct PatchradCorrelation PatchradCorrelation;

// Opaque trajectory handle.
typedef struct PatchradTrajectory PatchradTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or NULL if none.
// Valid until the next failing call on the same thread.
const char *patchrad_last_error(void);

// Library version as a static NUL-terminated string.
const char *patchrad_version(void);

// Dawson function F(x).
enum PatchradStatus patchrad_dawson(double x, double *out);

// Dimensionless shape factor of the Gaussian-correlated spectrum.
enum PatchradStatus patchrad_f_gaussian(double x, double *out);

// ξ for rms potential `v_rms` (statvolt) and correlation length `ell` (cm).
enum PatchradStatus patchrad_xi(double v_rms, double ell, double *out);

// q(t) = q0 exp(-t²/2τ²).
enum PatchradStatus patchrad_trajectory_gaussian_pulse(double q0,
                                                       double tau,
                                                       struct PatchradTrajectory **out);

// q(t) = q0 cos(ω0 t) exp(-t²/2τ²).
enum PatchradStatus patchrad_trajectory_enveloped_harmonic(double q0,
                                                           double omega0,
                                                           double tau,
                                                           struct PatchradTrajectory **out);

// Uniformly sampled motion; `t` and `q` hold `n` values in s and cm.
//
// # Safety
// `t` and `q` must point to `n` readable doubles.
enum PatchradStatus patchrad_trajectory_sampled(const double *t,
                                                const double *q,
                                                size_t n,
                                                enum PatchradWindow window,
                                                double alpha,
                                                struct PatchradTrajectory **out);

// # Safety
// `traj` must come from a `patchrad_trajectory_*` constructor and not be
// freed twice. NULL is ignored.
void patchrad_trajectory_free(struct PatchradTrajectory *traj);

// q̃(ω) = ∫ q(t) e^{iωt} dt.
//
// # Safety
// `traj` must be a live handle or NULL.
enum PatchradStatus patchrad_trajectory_fourier(const struct PatchradTrajectory *traj,
                                                double omega,
                                                double *re,
                                                double *im);

// d^order q / dt^order at `t`.
//
// # Safety
// `traj` must be a live handle or NULL.
enum PatchradStatus patchrad_trajectory_derivative(const struct PatchradTrajectory *traj,
                                                   uint32_t order,
                                                   double t,
                                                   double *out);

// Gaussian-correlated patches with rms potential `v_rms` and length `ell`.
enum PatchradStatus patchrad_correlation_gaussian(double v_rms,
                                                  double ell,
                                                  bool image_factor,
                                                  struct PatchradCorrelation **out);

// Flat spectrum on k_min ≤ k ≤ k_max.
enum PatchradStatus patchrad_correlation_sharp_cutoff(double v_rms,
                                                      double k_min,
                                                      double k_max,
                                                      bool image_factor,
                                                      struct PatchradCorrelation **out);

// Wavenumber-independent spectrum Ω̃(k) = omega0.
enum PatchradStatus patchrad_correlation_constant(double omega0,
                                                  bool image_factor,
                                                  struct PatchradCorrelation **out);

// Monotone interpolation through `n` nodes (k in 1/cm, Ω̃ in erg cm).
//
// # Safety
// `k` and `values` must point to `n` readable doubles.
enum PatchradStatus patchrad_correlation_tabulated(const double *k,
                                                   const double *values,
                                                   size_t n,
                                                   bool image_factor,
                                                   struct PatchradCorrelation **out);

// # Safety
// `model` must come from a `patchrad_correlation_*` constructor and not be
// freed twice. NULL is ignored.
void patchrad_correlation_free(struct PatchradCorrelation *model);

// Ω̃(k), image factor included.
//
// # Safety
// `model` must be a live handle or NULL.
enum PatchradStatus patchrad_correlation_omega_tilde(const struct PatchradCorrelation *model,
                                                     double k,
                                                     double *out);

// Trajectory-independent kernel K(ω), so that P(ω) = K(ω)|q̃(ω)|².
//
// # Safety
// `model` must be a live handle or NULL.
enum PatchradStatus patchrad_kernel(const struct PatchradCorrelation *model,
                                    double omega,
                                    double *out);

// Radiated energy per unit area per unit angular frequency, erg s / cm².
//
// # Safety
// Both handles must be live or NULL.
enum PatchradStatus patchrad_spectral_density(const struct PatchradCorrelation *model,
                                              const struct PatchradTrajectory *traj,
                                              double omega,
                                              double *out);

// Total radiated energy per unit area, erg / cm². `rel_tol` ≤ 0 selects
// the default of 1e-10.
//
// # Safety
// Both handles must be live or NULL.
enum PatchradStatus patchrad_total_energy(const struct PatchradCorrelation *model,
                                          const struct PatchradTrajectory *traj,
                                          double rel_tol,
                                          double *out);

// Vacuum-fluctuation (dynamical Casimir) spectrum of the same motion.
//
// # Safety
// `traj` must be a live handle or NULL.
enum PatchradStatus patchrad_dce_spectral_density(const struct PatchradTrajectory *traj,
                                                  double omega,
                                                  double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PATCHRAD_H */
