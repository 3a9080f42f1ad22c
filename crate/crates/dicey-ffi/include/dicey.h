/* C interface to the dicey solver. Strings returned through out
   parameters are owned by the caller; release them with dicey_string_free. */

#ifndef DICEY_H
#define DICEY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible entry point.
 */
typedef enum DiceyStatus {
  DiceyStatus_Ok = 0,
  /**
   * A required pointer argument was null.
   */
  DiceyStatus_NullArgument = 1,
  /**
   * An input string was not valid UTF-8.
   */
  DiceyStatus_Utf8 = 2,
  /**
   * Malformed document (JSON syntax, bad number format, ...).
   */
  DiceyStatus_Syntax = 3,
  /**
   * Well-formed document that violates a model invariant.
   */
  DiceyStatus_Semantic = 4,
  /**
   * Validation failed; the message lists one violation per line.
   */
  DiceyStatus_Invalid = 5,
  /**
   * The requested search exceeds the configured budget.
   */
  DiceyStatus_BudgetExceeded = 6,
  /**
   * An external process failed.
   */
  DiceyStatus_External = 7,
  /**
   * An internal panic was caught at the boundary.
   */
  DiceyStatus_Panic = 8,
} DiceyStatus;

/**
 * Opaque handle to a parsed, validated game document.
 */
typedef struct DiceyGameHandle DiceyGameHandle;

/**
 * Opaque handle to a grid strategy, validated against its game at parse time.
 */
typedef struct DiceyStrategyHandle DiceyStrategyHandle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string; never freed.
 */
const char *dicey_version(void);

/**
 * Message for the most recent failure on this thread, empty when none.
 * The pointer stays valid until the next failing dicey call on the same
 * thread; copy it if you need it longer.
 */
const char *dicey_last_error(void);

/**
 * Releases a string returned by this library. Null is a no-op.
 *
 * # Safety
 * `s` must be a pointer previously handed out by a dicey call and not yet
 * freed; anything else is undefined behavior.
 */
void dicey_string_free(char *s);

/**
 * Parses and validates a game document.
 *
 * # Safety
 * `json` must be a NUL-terminated string. On `Ok`, `*out` owns the handle
 * until `dicey_game_free`.
 */
enum DiceyStatus dicey_game_parse(const char *json, struct DiceyGameHandle **out);

/**
 * Releases a game handle. Null is a no-op.
 *
 * # Safety
 * `game` must come from `dicey_game_parse` and not be freed twice.
 */
void dicey_game_free(struct DiceyGameHandle *game);

/**
 * Writes the canonical JSON form of a game.
 */
enum DiceyStatus dicey_game_to_json(const struct DiceyGameHandle *game, char **out);

/**
 * Parses a strategy document and validates it against `game`.
 *
 * The strategy handle does not borrow the game; freeing the game first is
 * fine.
 */
enum DiceyStatus dicey_strategy_parse(const struct DiceyGameHandle *game,
                                      const char *json,
                                      struct DiceyStrategyHandle **out);

/**
 * Releases a strategy handle. Null is a no-op.
 *
 * # Safety
 * `strategy` must come from a dicey call and not be freed twice.
 */
void dicey_strategy_free(struct DiceyStrategyHandle *strategy);

/**
 * Writes the canonical JSON form of a strategy.
 */
enum DiceyStatus dicey_strategy_to_json(const struct DiceyStrategyHandle *strategy, char **out);

/**
 * Evaluates a strategy. The result document carries per-Devil-action
 * expectations and their minimum; exact mode renders rationals as "p/q"
 * strings, floating mode as numbers.
 */
enum DiceyStatus dicey_evaluate(const struct DiceyGameHandle *game,
                                const struct DiceyStrategyHandle *strategy,
                                bool exact,
                                char **out);

/**
 * Monte Carlo estimate of the per-action expectations; deterministic for a
 * given seed. The result document carries mean, standard error and sample
 * count per Devil action.
 */
enum DiceyStatus dicey_monte_carlo(const struct DiceyGameHandle *game,
                                   const struct DiceyStrategyHandle *strategy,
                                   uint64_t samples,
                                   uint64_t seed,
                                   char **out);

/**
 * Rewrites a strategy onto at most k pieces per die (k = Devil action
 * count) without losing value against any Devil action.
 */
enum DiceyStatus dicey_normalize(const struct DiceyGameHandle *game,
                                 const struct DiceyStrategyHandle *strategy,
                                 struct DiceyStrategyHandle **out);

/**
 * Searches scheme space for the best grid strategy.
 *
 * `options_json` may be null or `"{}"`; recognized fields are `mode`
 * ("exhaustive" or "hybrid"), `k`, `budget`, `starts`, `iters`, `seed`,
 * `force`, `samples` and `moves`. Either out parameter may be null to skip
 * that output: `out_strategy` receives the witness strategy,
 * `out_summary` a JSON document with the solved value and search counters.
 */
enum DiceyStatus dicey_solve(const struct DiceyGameHandle *game,
                             const char *options_json,
                             struct DiceyStrategyHandle **out_strategy,
                             char **out_summary);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* DICEY_H */
