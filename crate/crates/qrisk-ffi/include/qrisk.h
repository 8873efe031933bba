#ifndef QRISK_H
#define QRISK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum QriskStatus {
  /**
   * Success.
   */
  QriskOk = 0,
  /**
   * A required pointer argument was NULL.
   */
  QriskNullArgument = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  QriskInvalidUtf8 = 2,
  /**
   * The knowledge base failed to load or validate.
   */
  QriskKbInvalid = 3,
  /**
   * The inventory document failed to parse or validate.
   */
  QriskInventoryInvalid = 4,
  /**
   * The assessment itself failed (unknown horizon, unknown subject
   * with fail-on-unknown, ...).
   */
  QriskAssessmentFailed = 5,
} QriskStatus;

/**
 * Opaque handle to a loaded knowledge base.
 */
typedef struct QriskKb QriskKb;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Returns the error message of the most recent failure on this thread.
 *
 * The pointer stays valid until the next failing call on the same
 * thread. Never free it.
 */
const char *qrisk_last_error(void);

/**
 * Loads and validates a knowledge base from a directory of KB documents.
 *
 * On success writes a handle to `out_kb` and returns `QriskOk`. The
 * handle must be released with `qrisk_kb_free`.
 *
 * # Safety
 * `kb_dir` must be a valid NUL-terminated string and `out_kb` a valid
 * pointer.
 */
enum QriskStatus qrisk_kb_load(const char *kb_dir, bool strict, struct QriskKb **out_kb);

/**
 * Releases a knowledge base handle. NULL is ignored.
 *
 * # Safety
 * `kb` must have been returned by `qrisk_kb_load` and not freed before.
 */
void qrisk_kb_free(struct QriskKb *kb);

/**
 * Returns the KB version string. Free with `qrisk_string_free`.
 *
 * # Safety
 * `kb` must be a live handle from `qrisk_kb_load`.
 */
char *qrisk_kb_version(const struct QriskKb *kb);

/**
 * Assesses an inventory JSON document and writes the canonical JSON
 * report to `out_report_json` (free with `qrisk_string_free`).
 *
 * `horizon_years` must match one of the KB poll horizons.
 *
 * # Safety
 * `kb` must be a live handle; `inventory_json` a valid NUL-terminated
 * string; `out_report_json` a valid pointer.
 */
enum QriskStatus qrisk_assess(const struct QriskKb *kb,
                              const char *inventory_json,
                              uint32_t horizon_years,
                              char **out_report_json);

/**
 * Looks up one KB record by id and writes it as JSON.
 *
 * Returns `QriskAssessmentFailed` with a suggestion list in the error
 * message when the id is unknown.
 *
 * # Safety
 * Same contract as `qrisk_assess`.
 */
enum QriskStatus qrisk_kb_show(const struct QriskKb *kb, const char *id, char **out_record_json);

/**
 * Frees a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must have been returned by a qrisk function and not freed before.
 */
void qrisk_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QRISK_H */
