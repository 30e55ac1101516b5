#ifndef VORTEXSPEC_H
#define VORTEXSPEC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum VsStatus {
  VsOk = 0,
  VsNullPointer = 1,
  VsInvalidInput = 2,
  VsOutOfDomain = 3,
  VsSolverFailure = 4,
  VsUncertified = 5,
  VsInternalPanic = 6,
} VsStatus;

/**
 * Opaque handle to a solved vortex profile.
 */
typedef struct VsProfile VsProfile;

/**
 * Inner-product table entries for one operator family.
 */
typedef struct VsTable {
  double v1;
  double v2;
  double v3;
  double det;
  double trace;
} VsTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Solve the vortex profile with winding number `m` on [0, r_max] and store
 * an owned handle in `*out`. The handle must be released with
 * `vs_profile_free`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum VsStatus vs_profile_solve(uint32_t m, double r_max, double tol, struct VsProfile **out);

/**
 * Release a profile handle. A null pointer is a no-op.
 *
 * # Safety
 * `profile` must have been returned by `vs_profile_solve` and not freed.
 */
void vs_profile_free(struct VsProfile *profile);

/**
 * Mass 2π∫|Q|² r dr of the solved profile; NaN on a null handle.
 *
 * # Safety
 * `profile` must be a live handle or null.
 */
double vs_profile_mass(const struct VsProfile *profile);

/**
 * Energy ∫|∇Q|² − ½∫|Q|⁴ of the solved profile; NaN on a null handle.
 *
 * # Safety
 * `profile` must be a live handle or null.
 */
double vs_profile_energy(const struct VsProfile *profile);

/**
 * Evaluate the physical profile R(r) and its transformed derivative R̃'(r).
 *
 * # Safety
 * All pointers must be valid; `profile` must be a live handle.
 */
enum VsStatus vs_profile_eval(const struct VsProfile *profile,
                              double r,
                              double *value,
                              double *derivative);

/**
 * Certified Sturm index of the linearized operator (`operator` = 1 or 2)
 * with perturbation strength `delta`; written to `*count`.
 *
 * # Safety
 * `profile` must be a live handle and `count` a valid pointer.
 */
enum VsStatus vs_index_count(const struct VsProfile *profile,
                             uint32_t operator_,
                             double delta,
                             uintptr_t *count);

/**
 * Inner-product table (`family` = 0 for K, 1 for J) at perturbation
 * strength `delta`, solved to tolerance `tol`; written to `*table`.
 *
 * # Safety
 * `profile` must be a live handle and `table` a valid pointer.
 */
enum VsStatus vs_inner_products(const struct VsProfile *profile,
                                uint32_t family,
                                double delta,
                                double tol,
                                struct VsTable *table);

/**
 * Static description of a status code.
 */
const char *vs_status_message(enum VsStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VORTEXSPEC_H */
