#ifndef DEHNLAB_H
#define DEHNLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DlStatus {
  DL_STATUS_OK = 0,
  DL_STATUS_NULL_POINTER = 1,
  DL_STATUS_INVALID_ARGUMENT = 2,
  DL_STATUS_UNKNOWN_GROUP = 3,
  DL_STATUS_INVALID_WORD = 4,
  DL_STATUS_NOT_A_LOOP = 5,
  DL_STATUS_UNSUPPORTED = 6,
  DL_STATUS_BUDGET_EXCEEDED = 7,
  DL_STATUS_BUFFER_TOO_SMALL = 8,
  DL_STATUS_INTERNAL = 9,
} DlStatus;

/**
 * A filling certificate bound to the loop it fills.
 */
typedef struct DlCertificate DlCertificate;

/**
 * A group from the catalog.
 */
typedef struct DlGroup DlGroup;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call on the same thread.
 */
const char *dl_last_error_message(void);

/**
 * Creates a group from a catalog id such as `"z2"` or `"heis3"`.
 *
 * # Safety
 * `id` must be a NUL-terminated string and `out` a valid pointer.
 */
enum DlStatus dl_group_new(const char *id, struct DlGroup **out);

/**
 * # Safety
 * `group` must come from [`dl_group_new`] and not be used afterwards.
 */
void dl_group_free(struct DlGroup *group);

/**
 * Number of normal-form coordinates of the group's elements.
 *
 * # Safety
 * `group` and `out` must be valid pointers.
 */
enum DlStatus dl_group_arity(const struct DlGroup *group, size_t *out);

/**
 * Evaluates a word into normal-form coordinates. `*len` receives the arity;
 * fails with `BufferTooSmall` if `cap` is less than that.
 *
 * # Safety
 * `coords` must point to at least `cap` writable values.
 */
enum DlStatus dl_eval_word(const struct DlGroup *group,
                           const char *word,
                           int64_t *coords,
                           size_t cap,
                           size_t *len);

/**
 * Word-metric distance from the identity to the element a word represents.
 *
 * # Safety
 * Pointers must be valid; `word` NUL-terminated.
 */
enum DlStatus dl_word_metric(const struct DlGroup *group, const char *word, uint32_t *out);

/**
 * Samples a closed lazy word of length `n`, reproducibly from
 * `(seed, index)`. The result is freed with [`dl_string_free`].
 *
 * # Safety
 * Pointers must be valid.
 */
enum DlStatus dl_sample_loop(const struct DlGroup *group,
                             size_t n,
                             uint64_t seed,
                             uint32_t index,
                             char **out);

/**
 * Relator-counting lower bound on the filling area of a loop.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DlStatus dl_centralized_area(const struct DlGroup *group, const char *word, uint64_t *out);

/**
 * Exact filling area of a loop in the plane group `z2`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DlStatus dl_winding_area(const char *word, uint64_t *out);

/**
 * Builds the dyadic filling certificate of a loop.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DlStatus dl_dyadic_fill(const struct DlGroup *group,
                             const char *word,
                             struct DlCertificate **out);

/**
 * Parses a certificate in TSV form for the given loop.
 *
 * # Safety
 * Pointers must be valid; strings NUL-terminated.
 */
enum DlStatus dl_certificate_from_tsv(const char *tsv,
                                      const char *word,
                                      struct DlCertificate **out);

/**
 * # Safety
 * `cert` must come from this library and not be used afterwards.
 */
void dl_certificate_free(struct DlCertificate *cert);

/**
 * Number of relator steps.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DlStatus dl_certificate_area(const struct DlCertificate *cert, size_t *out);

/**
 * Sets `*valid` to whether the certificate's product freely equals its loop.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DlStatus dl_certificate_verify(const struct DlGroup *group,
                                    const struct DlCertificate *cert,
                                    bool *valid);

/**
 * TSV form of a certificate, freed with [`dl_string_free`].
 *
 * # Safety
 * Pointers must be valid.
 */
enum DlStatus dl_certificate_to_tsv(const struct DlCertificate *cert, char **out);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void dl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DEHNLAB_H */
