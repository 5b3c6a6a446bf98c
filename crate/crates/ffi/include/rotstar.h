#ifndef ROTSTAR_H
#define ROTSTAR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes.
 */
typedef enum RsStatus {
  RS_STATUS_OK = 0,
  RS_STATUS_NULL_POINTER = 1,
  RS_STATUS_INVALID_PARAMETER = 2,
  RS_STATUS_DOMAIN = 3,
  RS_STATUS_NO_ZERO_FOUND = 4,
  RS_STATUS_STEP_FAILURE = 5,
  RS_STATUS_SINGULAR_POINT = 6,
  RS_STATUS_NO_SIGN_CHANGE = 7,
  RS_STATUS_DIVERGENT_AXIS_INTEGRAL = 8,
  RS_STATUS_NO_CONVERGENCE = 9,
  RS_STATUS_SINGULAR_LINEARIZATION = 10,
  RS_STATUS_MODE_NON_CONVERGENCE = 11,
  RS_STATUS_NO_BRACKET = 12,
  RS_STATUS_GAMMA_FOUR_THIRDS = 13,
  RS_STATUS_STATIONARY_MASS = 14,
  RS_STATUS_CONTINUATION = 15,
  RS_STATUS_PANIC = 99,
} RsStatus;

/*
 Spherical solution for a polytrope of index `nu`.
 */
typedef struct RsProfile RsProfile;

/*
 A converged rotating equilibrium.
 */
typedef struct RsSolution RsSolution;

/*
 Scalar diagnostics of a solution.
 */
typedef struct RsSummary {
  double equatorial_radius;
  double polar_radius;
  /*
   `(R_eq − R_pole)/ξ₁`.
   */
  double oblateness;
  double residual;
  double hl_sigma_min;
  /*
   Nonzero when every admissibility flag holds.
   */
  int32_t admissible;
} RsSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failure on this thread, or null. Valid until the next call.
 */
const char *rs_last_error(void);

/*
 Library version as a static nul-terminated string.
 */
const char *rs_version(void);

/*
 Solve the Lane-Emden problem for `P = A ρ^{1+1/nu}` with central enthalpy `u_o`.

 # Safety
 `out` must be valid for a pointer write.
 */
enum RsStatus rs_lane_emden(double nu,
                            double a_const,
                            double u_o,
                            double tol,
                            struct RsProfile **out);

/*
 # Safety
 `p` must be null or a handle from [`rs_lane_emden`] not yet freed.
 */
void rs_profile_free(struct RsProfile *p);

/*
 First zero `ξ₁` and `μ₁ = −ξ₁²θ′(ξ₁)`.

 # Safety
 `p` must be a live handle; `xi1` and `mu1` valid for writes.
 */
enum RsStatus rs_profile_zero(const struct RsProfile *p, double *xi1, double *mu1);

/*
 `θ(r)` including the harmonic extension beyond `ξ₁`.

 # Safety
 `p` must be a live handle; `value` valid for a write.
 */
enum RsStatus rs_profile_theta(const struct RsProfile *p, double r, double *value);

/*
 Uniformly rotating equilibrium at rotation parameter `beta`, started from the profile.

 # Safety
 `p` must be a live handle; `out` valid for a pointer write.
 */
enum RsStatus rs_solve_rigid(const struct RsProfile *p,
                             double beta,
                             size_t n_r,
                             size_t n_zeta,
                             size_t l_max,
                             double tol,
                             struct RsSolution **out);

/*
 # Safety
 `s` must be null or a handle from [`rs_solve_rigid`] not yet freed.
 */
void rs_solution_free(struct RsSolution *s);

/*
 # Safety
 `s` must be a live handle; `out` valid for a write.
 */
enum RsStatus rs_solution_summary(const struct RsSolution *s, struct RsSummary *out);

/*
 Boundary radius at each solver `ζ` node. Writes `min(len, n_zeta)` values and
 stores the node count in `count`.

 # Safety
 `s` must be a live handle; `zeta` and `radius` valid for `len` writes; `count` valid for a write.
 */
enum RsStatus rs_solution_boundary(const struct RsSolution *s,
                                   double *zeta,
                                   double *radius,
                                   size_t len,
                                   size_t *count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROTSTAR_H */
