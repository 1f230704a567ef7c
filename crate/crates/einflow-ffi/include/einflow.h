#ifndef EINFLOW_H
#define EINFLOW_H

/* Generated by cbindgen from the einflow-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every entry point.
typedef enum EfStatus {
  EF_STATUS_OK = 0,
  EF_STATUS_INVALID_ARGUMENT = 1,
  EF_STATUS_NUMERICAL_FAILURE = 2,
  EF_STATUS_UNRESOLVED = 3,
} EfStatus;

// Termination kinds reported for a trajectory.
typedef enum EfTermination {
  EF_TERMINATION_CONVERGED = 0,
  EF_TERMINATION_EXITED_REGION = 1,
  EF_TERMINATION_BUDGET_EXHAUSTED = 2,
  EF_TERMINATION_STEP_UNDERFLOW = 3,
} EfTermination;

// Opaque model handle.
typedef struct EfModel EfModel;

// Opaque trajectory handle.
typedef struct EfTrajectory EfTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copy the last error message (thread-local) into `buf`; returns the number
// of bytes written, not counting the terminator.
//
// # Safety
// `buf` must point to at least `len` writable bytes (or be null, in which
// case the required length is returned).
size_t ef_last_error(char *buf, size_t len);

// Static version string of the underlying crate.
const char *ef_version(void);

// Create a model handle. `negative_mode = false` restricts the flow to the
// Ricci-flat boundary subsystem.
//
// # Safety
// `out` must be a valid pointer.
enum EfStatus ef_model_new(uint32_t m, bool negative_mode, struct EfModel **out);

// # Safety
// `model` must come from [`ef_model_new`] and not be freed twice.
void ef_model_free(struct EfModel *model);

// Evaluate the flow derivative at a 6-component state.
//
// # Safety
// `state` points to 6 readable doubles, `out` to 6 writable doubles.
enum EfStatus ef_vector_field(const struct EfModel *model, const double *state, double *out);

// Analytic Jacobian, written row-major into a 36-element buffer.
//
// # Safety
// `state` points to 6 readable doubles, `out` to 36 writable doubles.
enum EfStatus ef_jacobian(const struct EfModel *model, const double *state, double *out);

// Curvature scalars (R1, R2, R3, Rs, G, Wsq).
//
// # Safety
// `state` points to 6 readable doubles, `out` to 6 writable doubles.
enum EfStatus ef_curvature_terms(const struct EfModel *model, const double *state, double *out);

// Hyperplane and conservation defects.
//
// # Safety
// `state` points to 6 readable doubles; the out-pointers are writable.
enum EfStatus ef_constraint_defects(const struct EfModel *model,
                                    const double *state,
                                    double *h_out,
                                    double *rf_out);

// Labeled defects of a named invariant set. Writes at most `eq_cap` /
// `ineq_cap` values and stores the true counts.
//
// # Safety
// Buffers must match their stated capacities; `set_name` is a C string.
enum EfStatus ef_set_defect(const struct EfModel *model,
                            const char *set_name,
                            const double *state,
                            double *eq_out,
                            size_t eq_cap,
                            size_t *eq_len,
                            double *ineq_out,
                            size_t ineq_cap,
                            size_t *ineq_len);

// Number of catalog critical points for this model (family entries counted
// through a 5-point lattice).
//
// # Safety
// `model` must be valid.
size_t ef_catalog_len(const struct EfModel *model);

// Coordinates and residual of the `idx`-th catalog point. `coords_out`
// receives 6 doubles; `residual_out` one.
//
// # Safety
// Buffers must be writable as stated; `name_out` takes up to `name_cap`
// bytes including the terminator.
enum EfStatus ef_catalog_point(const struct EfModel *model,
                               size_t idx,
                               double *coords_out,
                               double *residual_out,
                               char *name_out,
                               size_t name_cap);

// Full 6x6 spectrum at a named critical point: 6 (re, im) pairs plus
// per-vector tangency flags against the two constraint normals.
//
// # Safety
// `values_out` holds 12 doubles; the flag buffers 6 bytes each.
enum EfStatus ef_eigen(const struct EfModel *model,
                       const char *point_name,
                       double *values_out,
                       uint8_t *tangent_e_out,
                       uint8_t *tangent_boundary_out);

// Integrate one shooting spec. `family`: 0 = zeta, 1 = gamma,
// 2 = gamma-singular. Pass `eta_budget <= 0` or `rtol <= 0` for defaults.
//
// # Safety
// `s` points to 3 readable doubles; `out` receives an owned handle.
enum EfStatus ef_shoot(const struct EfModel *model,
                       int family,
                       const double *s,
                       double epsilon,
                       double eta_budget,
                       double rtol,
                       struct EfTrajectory **out);

// # Safety
// `traj` must come from [`ef_shoot`] and not be freed twice.
void ef_trajectory_free(struct EfTrajectory *traj);

// # Safety
// `traj` must be valid.
size_t ef_trajectory_len(const struct EfTrajectory *traj);

// Copy sample `idx` as (eta, X1, X2, X3, Y1, Y2, Y3, Wsq, h_defect,
// rf_defect) into a 10-double buffer.
//
// # Safety
// `out` points to 10 writable doubles.
enum EfStatus ef_trajectory_sample(const struct EfTrajectory *traj, size_t idx, double *out);

// Termination record of a trajectory: kind code, eta, the limit-point name
// (empty unless converged), and y1 (NaN unless the hyperbolic line).
//
// # Safety
// Out-pointers must be writable as stated; `point_out` takes up to
// `point_cap` bytes including the terminator.
enum EfStatus ef_trajectory_termination(const struct EfTrajectory *traj,
                                        enum EfTermination *kind_out,
                                        double *eta_out,
                                        double *y1_out,
                                        char *point_out,
                                        size_t point_cap);

// Reconstruct the metric profile and report the asymptotic class:
// 0 = AC, 1 = ALC, 2 = AH, 3 = unresolved. `beta_out` and `a_inf_out`
// receive NaN when not applicable.
//
// # Safety
// Out-pointers must be writable.
enum EfStatus ef_asymptotics(const struct EfTrajectory *traj,
                             int *kind_out,
                             double *beta_out,
                             double *a_inf_out);

// Run a flow-invariance audit; `verdict_out` is 1 on pass, 0 on fail.
// `min_face_out` receives NaN when the set has no audited faces.
//
// # Safety
// `set_name` is a C string; out-pointers must be writable.
enum EfStatus ef_audit(const struct EfModel *model,
                       const char *set_name,
                       size_t samples,
                       uint64_t seed,
                       double *max_eq_out,
                       double *min_face_out,
                       int *verdict_out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* EINFLOW_H */
