#ifndef RESROUTE_H
#define RESROUTE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every fallible call.
 */
typedef enum RrStatus {
  RR_STATUS_OK = 0,
  RR_STATUS_NULL_POINTER = 1,
  RR_STATUS_INVALID_UTF8 = 2,
  RR_STATUS_PARSE = 3,
  RR_STATUS_INVALID_TOPOLOGY = 4,
  RR_STATUS_UNKNOWN_VERTEX = 5,
  RR_STATUS_NOT_SECONDARY = 6,
  RR_STATUS_INVALID_ARGUMENT = 7,
  RR_STATUS_TOO_MANY_VARIABLES = 8,
  /**
   * No vertex-disjoint pair exists; the out handle is set to NULL.
   */
  RR_STATUS_INFEASIBLE = 9,
  /**
   * The assignment does not decode to a pair of disjoint paths.
   */
  RR_STATUS_INVALID_ASSIGNMENT = 10,
  RR_STATUS_INTERNAL = 11,
  RR_STATUS_PANIC = 12,
} RrStatus;

/**
 * Per-link and joint failure probabilities for one topology.
 */
typedef struct RrFailureModel RrFailureModel;

/**
 * A QUBO model for one source, with what is needed to decode it.
 */
typedef struct RrQubo RrQubo;

/**
 * A routing solution: two paths, their latency and resiliency.
 */
typedef struct RrSolution RrSolution;

/**
 * A validated network topology.
 */
typedef struct RrTopology RrTopology;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL after a
 * success. Valid until the next `rr_*` call on the same thread.
 */
const char *rr_last_error_message(void);

/**
 * Static name of a status code, e.g. `"NotSecondary"`.
 */
const char *rr_status_name(enum RrStatus status);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void rr_string_free(char *s);

/**
 * Parses a topology document (JSON).
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
enum RrStatus rr_topology_from_json(const char *json, struct RrTopology **out);

/**
 * Built-in instance: `kind` 0 is the five-vertex example network, 1 the
 * four-vertex reduced network.
 *
 * # Safety
 * `out` must be writable.
 */
enum RrStatus rr_topology_builtin(int kind, struct RrTopology **out);

/**
 * # Safety
 * `t` must be NULL or a handle from this library, freed at most once.
 */
void rr_topology_free(struct RrTopology *t);

/**
 * # Safety
 * Pointers must be valid.
 */
enum RrStatus rr_topology_counts(const struct RrTopology *t, size_t *vertices, size_t *edges);

/**
 * Serializes the topology (and its embedded scenario, if any) to JSON.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RrStatus rr_topology_to_json(const struct RrTopology *t, char **out);

/**
 * Failure model from a scenario name (`"uncorrelated"`, `"correlated"`, or
 * the name of the scenario embedded in the topology document). NULL
 * selects the embedded scenario, else independent failures at 0.1.
 *
 * # Safety
 * `scenario` must be NULL or nul-terminated; other pointers valid.
 */
enum RrStatus rr_failure_model_new(const struct RrTopology *t,
                                   const char *scenario,
                                   struct RrFailureModel **out);

/**
 * Failure model from a scenario JSON object
 * (`{"default_marginal": .., "overrides": [..]}`).
 *
 * # Safety
 * `json` must be nul-terminated; other pointers valid.
 */
enum RrStatus rr_failure_model_from_json(const struct RrTopology *t,
                                         const char *json,
                                         struct RrFailureModel **out);

/**
 * # Safety
 * `f` must be NULL or a handle from this library, freed at most once.
 */
void rr_failure_model_free(struct RrFailureModel *f);

/**
 * Joint failure probability of two edges (indices in document order).
 *
 * # Safety
 * Pointers must be valid.
 */
enum RrStatus rr_failure_model_joint(const struct RrFailureModel *f,
                                     size_t a,
                                     size_t b,
                                     double *out);

/**
 * Exact optimum of `latency + B * resiliency` for `source`. Returns
 * `Infeasible` (and a NULL handle) when no disjoint pair exists.
 *
 * # Safety
 * Pointers must be valid; `source` nul-terminated.
 */
enum RrStatus rr_solve(const struct RrTopology *t,
                       const struct RrFailureModel *f,
                       const char *source,
                       double trade_off,
                       double demand,
                       struct RrSolution **out);

/**
 * Minimum total latency disjoint pair (ignores failures).
 *
 * # Safety
 * Pointers must be valid; `source` nul-terminated.
 */
enum RrStatus rr_min_sum_baseline(const struct RrTopology *t,
                                  const char *source,
                                  struct RrSolution **out);

/**
 * # Safety
 * `s` must be NULL or a handle from this library, freed at most once.
 */
void rr_solution_free(struct RrSolution *s);

/**
 * Latency, resiliency and objective; any out pointer may be NULL.
 *
 * # Safety
 * `s` must be valid; non-NULL outs writable.
 */
enum RrStatus rr_solution_values(const struct RrSolution *s,
                                 double *latency,
                                 double *resiliency,
                                 double *objective);

/**
 * Comma-separated vertex ids of path `which` (1 or 2).
 *
 * # Safety
 * Pointers must be valid.
 */
enum RrStatus rr_solution_path(const struct RrSolution *s, int which, char **out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum RrStatus rr_solution_to_json(const struct RrSolution *s, char **out);

/**
 * Builds the penalized QUBO for `source`. `alpha <= 0` selects the default
 * (twice the total latency).
 *
 * # Safety
 * Pointers must be valid; `source` nul-terminated.
 */
enum RrStatus rr_qubo_build(const struct RrTopology *t,
                            const struct RrFailureModel *f,
                            const char *source,
                            double trade_off,
                            double alpha,
                            double demand,
                            struct RrQubo **out);

/**
 * # Safety
 * `q` must be NULL or a handle from this library, freed at most once.
 */
void rr_qubo_free(struct RrQubo *q);

/**
 * # Safety
 * Pointers must be valid.
 */
enum RrStatus rr_qubo_num_variables(const struct RrQubo *q, size_t *out);

/**
 * Energy of an assignment given as `len` bytes (0 or nonzero).
 *
 * # Safety
 * `bits` must point to `len` readable bytes; other pointers valid.
 */
enum RrStatus rr_qubo_energy(const struct RrQubo *q, const uint8_t *bits, size_t len, double *out);

/**
 * Exhaustive minimum (up to 26 variables). Bit `i` of the index is
 * variable `i`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RrStatus rr_qubo_minimize(const struct RrQubo *q, uint64_t *index, double *energy);

/**
 * Decodes a basis index into a solution, or `InvalidAssignment`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RrStatus rr_qubo_decode(const struct RrQubo *q, uint64_t index, struct RrSolution **out);

/**
 * Sparse coefficient text (`i j value` rows, constant in a comment).
 *
 * # Safety
 * Pointers must be valid.
 */
enum RrStatus rr_qubo_to_text(const struct RrQubo *q, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RESROUTE_H */
