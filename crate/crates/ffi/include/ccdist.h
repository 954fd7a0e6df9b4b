#ifndef CCDIST_H
#define CCDIST_H

#include <stdbool.h>
#include <stddef.h>

/*
 Result code of every call.
 */
typedef enum CcdStatus {
  CCD_STATUS_OK = 0,
  /*
   Newton iteration failed or the linear system was singular.
   */
  CCD_STATUS_NON_CONVERGENCE = 1,
  /*
   Converged point outside the admissible region or a failed check.
   */
  CCD_STATUS_INVALID_REGION = 2,
  /*
   Bad masses, ordering or distances.
   */
  CCD_STATUS_INVALID_INPUT = 3,
  CCD_STATUS_NULL_POINTER = 4,
  /*
   Output buffer shorter than required; the required length is still written.
   */
  CCD_STATUS_BUFFER_TOO_SMALL = 5,
  CCD_STATUS_INTERNAL = 6,
} CcdStatus;

/*
 Collinear central configuration for one ordering.
 */
typedef struct CcdCollinear CcdCollinear;

/*
 Positive body masses.
 */
typedef struct CcdMasses CcdMasses;

/*
 Five-body trapezoid critical point with its multipliers and checks.
 */
typedef struct CcdTrapezoid CcdTrapezoid;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or NULL. Valid until the
 next call on the same thread.
 */
const char *ccd_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *ccd_version(void);

/*
 Releases a string returned by this library.

 # Safety
 `s` must come from this library and not be freed twice.
 */
void ccd_string_free(char *s);

/*
 Creates a mass vector from `n` positive values.

 # Safety
 `data` must point to `n` doubles and `out` must be writable.
 */
enum CcdStatus ccd_masses_new(const double *data, size_t n, struct CcdMasses **out);

/*
 # Safety
 `m` must come from [`ccd_masses_new`] and not be freed twice.
 */
void ccd_masses_free(struct CcdMasses *m);

/*
 Solves the five-body trapezoid system from the built-in starting guesses.

 A converged critical point is returned in `out` even when it is not a
 realizable configuration; the status is then `InvalidRegion`.

 # Safety
 `masses` must be a live handle and `out` writable.
 */
enum CcdStatus ccd_trapezoid_solve(const struct CcdMasses *masses,
                                   double tol,
                                   size_t max_iter,
                                   struct CcdTrapezoid **out);

/*
 # Safety
 `t` must come from [`ccd_trapezoid_solve`] and not be freed twice.
 */
void ccd_trapezoid_free(struct CcdTrapezoid *t);

/*
 Ten mutual distances in the order r12, r13, r14, r15, r23, ..., r45.

 # Safety
 `t` must be live, `out` writable for `cap` doubles, `len_out` NULL or writable.
 */
enum CcdStatus ccd_trapezoid_distances(const struct CcdTrapezoid *t,
                                       double *out,
                                       size_t cap,
                                       size_t *len_out);

/*
 Multipliers δ, ω, θ.

 # Safety
 `t` must be live and the three outputs writable.
 */
enum CcdStatus ccd_trapezoid_multipliers(const struct CcdTrapezoid *t,
                                         double *delta,
                                         double *omega,
                                         double *theta);

/*
 Whether the point is realizable and all classification checks pass.

 # Safety
 `t` must be live and `out` writable.
 */
enum CcdStatus ccd_trapezoid_is_valid(const struct CcdTrapezoid *t, bool *out);

/*
 JSON report of the solution, same schema as `ccdist solve-trapezoid`.

 # Safety
 `t` must be live and `out` writable; free the string with [`ccd_string_free`].
 */
enum CcdStatus ccd_trapezoid_report_json(const struct CcdTrapezoid *t, char **out);

/*
 Solves the collinear configuration for a body ordering given as 1-based
 labels, left to right. A NULL `ordering` means 1, 2, ..., n.

 # Safety
 `masses` must be live, `ordering` NULL or `n` readable values, `out` writable.
 */
enum CcdStatus ccd_collinear_solve(const struct CcdMasses *masses,
                                   const size_t *ordering,
                                   double tol,
                                   size_t max_iter,
                                   struct CcdCollinear **out);

/*
 # Safety
 `c` must come from [`ccd_collinear_solve`] and not be freed twice.
 */
void ccd_collinear_free(struct CcdCollinear *c);

/*
 Consecutive gaps along the line, n - 1 values.

 # Safety
 `c` must be live, `out` writable for `cap` doubles, `len_out` NULL or writable.
 */
enum CcdStatus ccd_collinear_gaps(const struct CcdCollinear *c,
                                  double *out,
                                  size_t cap,
                                  size_t *len_out);

/*
 Positions along the line with the centre of mass at the origin.

 # Safety
 `c` must be live, `out` writable for `cap` doubles, `len_out` NULL or writable.
 */
enum CcdStatus ccd_collinear_positions(const struct CcdCollinear *c,
                                       double *out,
                                       size_t cap,
                                       size_t *len_out);

/*
 Multiplier δ of the collinear solution.

 # Safety
 `c` must be live and `delta` writable.
 */
enum CcdStatus ccd_collinear_delta(const struct CcdCollinear *c, double *delta);

/*
 JSON form of the collinear solution.

 # Safety
 `c` must be live and `out` writable; free the string with [`ccd_string_free`].
 */
enum CcdStatus ccd_collinear_solution_json(const struct CcdCollinear *c, char **out);

/*
 Number of distinct collinear configurations found over all orderings.

 # Safety
 `masses` must be live and `count` writable.
 */
enum CcdStatus ccd_moulton_count(const struct CcdMasses *masses,
                                 double tol,
                                 size_t max_iter,
                                 size_t *count);

/*
 Re-solves `r` (n(n-1)/2 packed distances) in position space and writes
 the largest relative distance discrepancy. Returns `InvalidRegion` when it
 exceeds the cross-validation tolerance.

 # Safety
 `masses` must be live, `r` readable for `len` doubles, `max_error` writable.
 */
enum CcdStatus ccd_cross_validate(const struct CcdMasses *masses,
                                  const double *r,
                                  size_t len,
                                  double *max_error);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CCDIST_H */
