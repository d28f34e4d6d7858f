#ifndef STC_H
#define STC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes.
 */
typedef enum StcStatus {
  STC_STATUS_OK = 0,
  /*
   A required pointer argument was null.
   */
  STC_STATUS_NULL_ARGUMENT = 1,
  /*
   A string argument was not valid UTF-8.
   */
  STC_STATUS_INVALID_UTF8 = 2,
  /*
   The model file could not be read.
   */
  STC_STATUS_IO = 3,
  /*
   The model file is malformed or inconsistent.
   */
  STC_STATUS_INVALID_MODEL = 4,
  /*
   The text has no sentence to read.
   */
  STC_STATUS_INVALID_INPUT = 5,
  /*
   The output buffer holds fewer entries than the model has categories.
   */
  STC_STATUS_BUFFER_TOO_SMALL = 6,
  /*
   Any other failure, including a caught panic.
   */
  STC_STATUS_INTERNAL = 7,
} StcStatus;

/*
 A loaded model. Create with [`stc_model_load`], release with
 [`stc_model_free`].
 */
typedef struct StcModel StcModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null. Valid until the
 next failing call on the same thread.
 */
const char *stc_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *stc_version(void);

/*
 Loads the model file at `path` and stores a new handle in `*out`.

 # Safety
 `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum StcStatus stc_model_load(const char *path, struct StcModel **out);

/*
 Releases a handle. Null is ignored.

 # Safety
 `model` must come from [`stc_model_load`] and not be used afterwards.
 */
void stc_model_free(struct StcModel *model);

/*
 Number of categories, 0 for a null handle.

 # Safety
 `model` must be null or a live handle.
 */
size_t stc_model_n_categories(const struct StcModel *model);

/*
 Name of category `k`, or null when out of range. Owned by the handle.

 # Safety
 `model` must be null or a live handle.
 */
const char *stc_model_category_name(const struct StcModel *model, size_t k);

/*
 1 for a reading-agent model, 0 for a baseline, -1 for a null handle.

 # Safety
 `model` must be null or a live handle.
 */
int32_t stc_model_is_sequential(const struct StcModel *model);

/*
 Classifies the NUL-terminated UTF-8 `text`. `labels[k]` is set to 1 for
 every assigned category and 0 otherwise; `labels_len` must be at least
 the number of categories. `read` and `n_sentences`, when not null,
 receive the number of sentences read and in the text.

 # Safety
 `model` must be a live handle, `text` a NUL-terminated string and
 `labels` valid for `labels_len` writes.
 */
enum StcStatus stc_classify(const struct StcModel *model,
                            const char *text,
                            uint8_t *labels,
                            size_t labels_len,
                            size_t *read,
                            size_t *n_sentences);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STC_H */
