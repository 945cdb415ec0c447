#ifndef LIOUVILLE_Q_H
#define LIOUVILLE_Q_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define LQ_OK 0

/**
 * A required pointer argument was null.
 */
#define LQ_ERR_NULL -1

/**
 * An argument was out of range for the interface (not a numerical failure).
 */
#define LQ_ERR_ARGUMENT -2

/**
 * The library panicked; this is a bug and the message says where.
 */
#define LQ_ERR_PANIC -3

/**
 * Precision and truncation settings shared by all evaluations.
 */
typedef struct LqContext LqContext;

/**
 * A perturbative solution of the Liouville equation for one state.
 */
typedef struct LqSolution LqSolution;

/**
 * A complex number laid out as two consecutive doubles, matching C99
 * `double _Complex`.
 */
typedef struct LqComplex {
  double re;
  double im;
} LqComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if none failed yet.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *lq_last_error(void);

/**
 * Double-precision context with the default truncation policy. Never null.
 */
struct LqContext *lq_context_new(void);

/**
 * Context working with `bits` bits of mantissa (53 selects plain doubles).
 *
 * # Safety
 * `out` must be null or valid for a pointer write.
 */
int32_t lq_context_with_bits(uint32_t bits, struct LqContext **out);

/**
 * # Safety
 * `ctx` must be null or a handle from this library not yet freed.
 */
void lq_context_free(struct LqContext *ctx);

/**
 * Jacobi θ₁(x | τ).
 *
 * # Safety
 * `ctx` must be a live context and `out` valid for writing.
 */
int32_t lq_theta1(const struct LqContext *ctx,
                  struct LqComplex x,
                  struct LqComplex tau,
                  struct LqComplex *out);

/**
 * Elliptic gamma function Γ(u; p, q).
 *
 * # Safety
 * `ctx` must be a live context and `out` valid for writing.
 */
int32_t lq_ell_gamma(const struct LqContext *ctx,
                     struct LqComplex u,
                     struct LqComplex p,
                     struct LqComplex q,
                     struct LqComplex *out);

/**
 * Ground state of the N-site chain through total degree `degree`.
 *
 * # Safety
 * `ctx` must be a live context and `out` valid for a pointer write. On
 * failure `*out` is left untouched.
 */
int32_t lq_solve_ground(const struct LqContext *ctx,
                        size_t n_sites,
                        struct LqComplex v,
                        int32_t degree,
                        struct LqSolution **out);

/**
 * State `index` of the catalogue with `m` excitations.
 *
 * # Safety
 * As for [`lq_solve_ground`].
 */
int32_t lq_solve_excited(const struct LqContext *ctx,
                         size_t n_sites,
                         size_t m,
                         struct LqComplex v,
                         size_t index,
                         int32_t degree,
                         struct LqSolution **out);

/**
 * Coefficient of p^a q^b in R₀.
 *
 * # Safety
 * `sol` must be a live solution and `out` valid for writing.
 */
int32_t lq_solution_r0_coefficient(const struct LqSolution *sol,
                                   int32_t a,
                                   int32_t b,
                                   struct LqComplex *out);

/**
 * Largest relative Liouville residual over all solved degrees.
 *
 * # Safety
 * `sol` must be a live solution and `out` valid for writing.
 */
int32_t lq_solution_certificate(const struct LqSolution *sol, double *out);

/**
 * Serialises the solution to a freshly allocated JSON string.
 *
 * # Safety
 * `sol` must be a live solution and `out` valid for a pointer write. Release
 * the string with [`lq_string_free`].
 */
int32_t lq_solution_to_json(const struct LqSolution *sol, char **out);

/**
 * # Safety
 * `sol` must be null or a handle from this library not yet freed.
 */
void lq_solution_free(struct LqSolution *sol);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void lq_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LIOUVILLE_Q_H */
