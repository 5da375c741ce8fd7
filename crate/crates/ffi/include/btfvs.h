#ifndef BTFVS_H
#define BTFVS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BtfvsStatus {
  BTFVS_STATUS_OK = 0,
  /**
   * No FVS within the budget.
   */
  BTFVS_STATUS_NO_SOLUTION = 1,
  BTFVS_STATUS_INVALID_ARGUMENT = 2,
  BTFVS_STATUS_PARSE_ERROR = 3,
  /**
   * A panic or a failed internal check.
   */
  BTFVS_STATUS_INTERNAL = 4,
  BTFVS_STATUS_NULL_POINTER = 5,
} BtfvsStatus;

typedef struct BtfvsSolution BtfvsSolution;

typedef struct BtfvsTournament BtfvsTournament;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *btfvs_last_error(void);

/**
 * Builds a tournament from a row-major `m * n` array where a nonzero
 * `orient[i * n + j]` means `a_i -> b_j`.
 *
 * # Safety
 * `orient` must point to `m * n` readable bytes and `out` must be writable.
 */
enum BtfvsStatus btfvs_tournament_new(uintptr_t m,
                                      uintptr_t n,
                                      const uint8_t *orient,
                                      struct BtfvsTournament **out);

/**
 * Parses an instance document. Only the tournament is kept.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` must be writable.
 */
enum BtfvsStatus btfvs_tournament_from_json(const char *json, struct BtfvsTournament **out);

/**
 * # Safety
 * `t` must come from this library and not be freed twice. NULL is ignored.
 */
void btfvs_tournament_free(struct BtfvsTournament *t);

/**
 * # Safety
 * `t` must be a live handle; `m` and `n` must be writable.
 */
enum BtfvsStatus btfvs_tournament_size(const struct BtfvsTournament *t, uintptr_t *m, uintptr_t *n);

/**
 * # Safety
 * `t` must be a live handle and `out` writable.
 */
enum BtfvsStatus btfvs_is_acyclic(const struct BtfvsTournament *t, bool *out);

/**
 * Searches for an FVS of at most `k` vertices with the branching solver.
 * Returns `NoSolution` when none exists; `*out` is set only on `Ok`.
 *
 * # Safety
 * `t` must be a live handle and `out` writable.
 */
enum BtfvsStatus btfvs_solve(const struct BtfvsTournament *t,
                             uintptr_t k,
                             uintptr_t workers,
                             struct BtfvsSolution **out);

/**
 * Minimum FVS.
 *
 * # Safety
 * `t` must be a live handle and `out` writable.
 */
enum BtfvsStatus btfvs_min_fvs(const struct BtfvsTournament *t,
                               uintptr_t workers,
                               struct BtfvsSolution **out);

/**
 * Decides FVS <= k through the constrained-FVS reduction. `profile` is
 * "paper", "toy" or "file:<path>"; NULL means "toy".
 *
 * # Safety
 * `t` must be a live handle, `profile` NULL or NUL-terminated, `out` writable.
 */
enum BtfvsStatus btfvs_pipeline_solve(const struct BtfvsTournament *t,
                                      uintptr_t k,
                                      const char *profile,
                                      uintptr_t workers,
                                      struct BtfvsSolution **out);

/**
 * # Safety
 * `s` must be a live handle.
 */
uintptr_t btfvs_solution_len(const struct BtfvsSolution *s);

/**
 * Writes the `i`-th vertex: `side` is 0 for A and 1 for B.
 *
 * # Safety
 * `s` must be a live handle; `side` and `index` writable.
 */
enum BtfvsStatus btfvs_solution_get(const struct BtfvsSolution *s,
                                    uintptr_t i,
                                    uint8_t *side,
                                    uintptr_t *index);

/**
 * # Safety
 * `s` must come from this library and not be freed twice. NULL is ignored.
 */
void btfvs_solution_free(struct BtfvsSolution *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BTFVS_H */
