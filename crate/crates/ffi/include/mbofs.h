/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef MBOFS_H
#define MBOFS_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

#define MBOFS_ABI_VERSION 1

typedef enum MbofsStatus {
  MBOFS_STATUS_OK = 0,
  MBOFS_STATUS_NULL_ARGUMENT = 1,
  MBOFS_STATUS_INVALID_UTF8 = 2,
  MBOFS_STATUS_IO = 3,
  MBOFS_STATUS_FORMAT = 4,
  MBOFS_STATUS_CONFIG = 5,
  MBOFS_STATUS_EMPTY_MASK = 6,
  MBOFS_STATUS_MASK_LENGTH = 7,
  MBOFS_STATUS_OUT_OF_RANGE = 8,
  MBOFS_STATUS_NO_INFORMATIVE_FEATURES = 9,
  MBOFS_STATUS_CHECKPOINT = 10,
  MBOFS_STATUS_CORPUS = 11,
  MBOFS_STATUS_BUFFER_TOO_SMALL = 12,
  MBOFS_STATUS_PANIC = 98,
  MBOFS_STATUS_INTERNAL = 99,
} MbofsStatus;

typedef enum MbofsClassifier {
  MBOFS_CLASSIFIER_NAIVE_BAYES = 0,
  MBOFS_CLASSIFIER_DECISION_TREE = 1,
} MbofsClassifier;

typedef enum MbofsTermination {
  MBOFS_TERMINATION_STAGNATION = 0,
  MBOFS_TERMINATION_MAX_TOURS = 1,
  MBOFS_TERMINATION_MAX_ITERATIONS = 2,
  MBOFS_TERMINATION_BUDGET = 3,
  MBOFS_TERMINATION_HALTED = 4,
} MbofsTermination;

/*
 A loaded, vectorized corpus.
 */
typedef struct MbofsCorpus MbofsCorpus;

typedef struct MbofsMask MbofsMask;

/*
 Migrating-birds parameters. Start from [`mbofs_mbo_params_default`].
 */
typedef struct MbofsMboParams {
  size_t flock_size;
  size_t neighbors;
  double change_fraction;
  double budget_seconds;
  uint64_t seed;
  size_t folds;
} MbofsMboParams;

/*
 Binary PSO parameters. Start from [`mbofs_pso_params_default`].
 */
typedef struct MbofsPsoParams {
  size_t swarm_size;
  double w_start;
  double w_end;
  double c1;
  double c2;
  double v_max;
  size_t max_iterations;
  double budget_seconds;
  uint64_t seed;
  size_t folds;
} MbofsPsoParams;

/*
 Result of a search: the selected mask over the full vocabulary.
 */
typedef struct MbofsSelection {
  struct MbofsMask *mask;
  double fitness;
  double input_fitness;
  enum MbofsTermination termination;
} MbofsSelection;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

uint32_t mbofs_abi_version(void);

/*
 Message for the last failed call on this thread, or NULL. The pointer
 stays valid until the next call into this library from the same thread.
 */
const char *mbofs_last_error(void);

/*
 # Safety
 `s` must be NULL or a string returned by this library, freed once.
 */
void mbofs_string_free(char *s);

/*
 Loads a corpus (`format` is "tsv" or "dirs") and builds its TF-IDF
 matrix. `stopwords` may be NULL for the built-in English list.

 # Safety
 String arguments must be NULL-terminated; `out` must be writable.
 */
enum MbofsStatus mbofs_corpus_load(const char *path,
                                   const char *format,
                                   const char *stopwords,
                                   struct MbofsCorpus **out);

/*
 # Safety
 `corpus` must be NULL or a handle from [`mbofs_corpus_load`], freed once.
 */
void mbofs_corpus_free(struct MbofsCorpus *corpus);

/*
 # Safety
 `corpus` must be a live handle; output pointers must be writable.
 */
enum MbofsStatus mbofs_corpus_dims(const struct MbofsCorpus *corpus,
                                   size_t *n_docs,
                                   size_t *n_features,
                                   size_t *n_classes);

/*
 The vocabulary term for feature `index`, as a new string.

 # Safety
 `corpus` must be a live handle; `out` must be writable.
 */
enum MbofsStatus mbofs_corpus_term(const struct MbofsCorpus *corpus, size_t index, char **out);

/*
 An all-zero mask of length `len`.

 # Safety
 `out` must be writable.
 */
enum MbofsStatus mbofs_mask_new(size_t len, struct MbofsMask **out);

/*
 Parses a string of '0' and '1' characters.

 # Safety
 `bits` must be NULL-terminated; `out` must be writable.
 */
enum MbofsStatus mbofs_mask_from_bits(const char *bits, struct MbofsMask **out);

/*
 # Safety
 `mask` must be NULL or a mask handle, freed once.
 */
void mbofs_mask_free(struct MbofsMask *mask);

/*
 Length of the mask, or 0 for NULL.

 # Safety
 `mask` must be NULL or a live handle.
 */
size_t mbofs_mask_len(const struct MbofsMask *mask);

/*
 Number of selected features, or 0 for NULL.

 # Safety
 `mask` must be NULL or a live handle.
 */
size_t mbofs_mask_count(const struct MbofsMask *mask);

/*
 # Safety
 `mask` must be a live handle.
 */
enum MbofsStatus mbofs_mask_set(struct MbofsMask *mask, size_t index, bool value);

/*
 # Safety
 `mask` must be a live handle; `out` must be writable.
 */
enum MbofsStatus mbofs_mask_get(const struct MbofsMask *mask, size_t index, bool *out);

/*
 Writes one byte (0 or 1) per position into `buf`, which must hold at
 least `mbofs_mask_len(mask)` bytes.

 # Safety
 `buf` must be writable for `buf_len` bytes.
 */
enum MbofsStatus mbofs_mask_copy_bits(const struct MbofsMask *mask, uint8_t *buf, size_t buf_len);

/*
 Features with positive information gain, capped at `cap`.

 # Safety
 `corpus` must be a live handle; `out` must be writable.
 */
enum MbofsStatus mbofs_ig_filter(const struct MbofsCorpus *corpus,
                                 size_t cap,
                                 struct MbofsMask **out);

/*
 Mean stratified `folds`-fold accuracy of the classifier on the masked features.

 # Safety
 Handles must be live; `out` must be writable.
 */
enum MbofsStatus mbofs_cross_val_accuracy(const struct MbofsCorpus *corpus,
                                          const struct MbofsMask *mask,
                                          enum MbofsClassifier kind,
                                          size_t folds,
                                          uint64_t seed,
                                          double *out);

struct MbofsMboParams mbofs_mbo_params_default(void);

struct MbofsPsoParams mbofs_pso_params_default(void);

/*
 Migrating-birds search seeded with `input`. `params` may be NULL for
 defaults. On success `out->mask` is a new handle owned by the caller.

 # Safety
 Handles must be live; `out` must be writable.
 */
enum MbofsStatus mbofs_mbo_select(const struct MbofsCorpus *corpus,
                                  const struct MbofsMask *input,
                                  const struct MbofsMboParams *params,
                                  struct MbofsSelection *out);

/*
 Binary PSO seeded with `input`. `params` may be NULL for defaults.

 # Safety
 Handles must be live; `out` must be writable.
 */
enum MbofsStatus mbofs_pso_select(const struct MbofsCorpus *corpus,
                                  const struct MbofsMask *input,
                                  const struct MbofsPsoParams *params,
                                  struct MbofsSelection *out);

/*
 Runs a full experiment from `key = value` configuration text and returns
 the report as JSON. Relative paths resolve against `base_dir` (may be NULL).

 # Safety
 String arguments must be NULL-terminated; `out_json` must be writable.
 */
enum MbofsStatus mbofs_run_experiment(const char *config_text,
                                      const char *base_dir,
                                      char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MBOFS_H */
