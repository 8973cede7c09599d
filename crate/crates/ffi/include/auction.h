#ifndef AUCTION_H
#define AUCTION_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Values 0 to 6 match the exit codes of the `auction` tool.
 */
enum AuctionCode
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  AUCTION_CODE_SUCCESS = 0,
  AUCTION_CODE_INFEASIBLE = 1,
  AUCTION_CODE_BUDGET_EXCEEDED = 2,
  AUCTION_CODE_VALIDATION_ERROR = 3,
  AUCTION_CODE_IO_ERROR = 4,
  AUCTION_CODE_MONOPOLY_PROVIDER = 5,
  AUCTION_CODE_VERIFICATION_FAILED = 6,
  /**
   * A bug inside the library; the message names the panic.
   */
  AUCTION_CODE_INTERNAL_ERROR = 7,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum AuctionCode AuctionCode;
#else
typedef int32_t AuctionCode;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Opaque validated scenario.
 */
typedef struct AuctionScenario AuctionScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses and validates a scenario document.
 *
 * # Safety
 * `json` must be NULL or a NUL-terminated string. `out` must be NULL or
 * point to writable storage for one pointer.
 */
AuctionCode auction_scenario_from_json(const char *json, struct AuctionScenario **out);

/**
 * Releases a handle. NULL is ignored.
 *
 * # Safety
 * `scenario` must be NULL or a handle from this library not yet freed.
 */
void auction_scenario_free(struct AuctionScenario *scenario);

/**
 * Writes the 64-character hex digest of the canonical scenario.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must point to writable storage.
 */
AuctionCode auction_scenario_digest(const struct AuctionScenario *scenario, char **out);

/**
 * Writes the scenario as pretty JSON.
 *
 * # Safety
 * As for [`auction_scenario_digest`].
 */
AuctionCode auction_scenario_to_json(const struct AuctionScenario *scenario, char **out);

/**
 * Runs one auction. `mechanism` is `vcg`, `first-price` or `posted:<bp>`.
 * The outcome JSON is written for every auction status, and the return
 * value is that status's code.
 *
 * # Safety
 * `scenario` must be a live handle, `mechanism` a NUL-terminated string and
 * `out_json` writable.
 */
AuctionCode auction_run(const struct AuctionScenario *scenario,
                        const char *mechanism,
                        char **out_json);

/**
 * Sweeps `provider`'s cost report over `grid` (basis points). A NULL grid
 * with `grid_len == 0` selects the default 12-point grid. Returns
 * `VerificationFailed` when some deviation beats truthful reporting; the
 * report is written either way.
 *
 * # Safety
 * `grid` must be NULL or point to `grid_len` readable values; other
 * pointers as for [`auction_run`].
 */
AuctionCode auction_sweep(const struct AuctionScenario *scenario,
                          const char *provider,
                          const char *mechanism,
                          const uint32_t *grid,
                          size_t grid_len,
                          char **out_json);

/**
 * Runs all three payment rules on the truthful scenario and writes the
 * comparison rows.
 *
 * # Safety
 * As for [`auction_run`].
 */
AuctionCode auction_compare(const struct AuctionScenario *scenario,
                            uint32_t markup_bp,
                            char **out_json);

/**
 * Generates `count` scenarios from seeds `first_seed..first_seed + count`
 * and sweeps every provider. `params_json` may be NULL for the defaults.
 *
 * # Safety
 * `params_json` must be NULL or NUL-terminated; other pointers as for
 * [`auction_sweep`].
 */
AuctionCode auction_verify(const char *params_json,
                           uint64_t first_seed,
                           uint64_t count,
                           const char *mechanism,
                           const uint32_t *grid,
                           size_t grid_len,
                           char **out_json);

/**
 * Generates a scenario. `params_json` may be NULL for the defaults.
 *
 * # Safety
 * `params_json` must be NULL or NUL-terminated; `out` must be writable.
 */
AuctionCode auction_generate(const char *params_json, uint64_t seed, struct AuctionScenario **out);

/**
 * One smoothing step: `round_half_up(((10000 - alpha) * score + alpha * observed) / 10000)`.
 *
 * # Safety
 * `out_score` must point to writable storage.
 */
AuctionCode auction_reputation_update(uint64_t score,
                                      uint32_t alpha_bp,
                                      uint64_t observed,
                                      uint64_t *out_score);

/**
 * Appends an outcome (as produced by [`auction_run`]) to the ledger at
 * `path` and writes the new record. Timestamps follow `FIXED_CLOCK` when
 * set.
 *
 * # Safety
 * `path` and `outcome_json` must be NUL-terminated; `out_json` writable.
 */
AuctionCode auction_ledger_append(const char *path, const char *outcome_json, char **out_json);

/**
 * Records settlement of a successful pending record.
 *
 * # Safety
 * As for [`auction_ledger_append`].
 */
AuctionCode auction_ledger_settle(const char *path,
                                  uint64_t record_id,
                                  const char *reference,
                                  char **out_json);

/**
 * Summarizes the ledger at `path`.
 *
 * # Safety
 * As for [`auction_ledger_append`].
 */
AuctionCode auction_ledger_report(const char *path, char **out_json);

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *auction_last_error(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must be NULL or a string from this library not yet freed.
 */
void auction_string_free(char *s);

/**
 * Static name of a code, e.g. `"BudgetExceeded"`.
 */
const char *auction_code_name(int32_t code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AUCTION_H */
