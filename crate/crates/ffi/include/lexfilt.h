#ifndef LEXFILT_H
#define LEXFILT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LexfiltStatus {
  LEXFILT_STATUS_OK = 0,
  LEXFILT_STATUS_NULL_POINTER = 1,
  LEXFILT_STATUS_INVALID_UTF8 = 2,
  LEXFILT_STATUS_INVALID_ARGUMENT = 3,
  LEXFILT_STATUS_IO = 4,
  LEXFILT_STATUS_DATA = 5,
  LEXFILT_STATUS_INVARIANT = 6,
  LEXFILT_STATUS_NOT_FOUND = 7,
  LEXFILT_STATUS_BUFFER_TOO_SMALL = 8,
  LEXFILT_STATUS_PANIC = 9,
} LexfiltStatus;

// A fitted IDF table, including its preprocessing settings.
typedef struct LexfiltIdfTable LexfiltIdfTable;

// A WordPiece vocabulary.
typedef struct LexfiltVocab LexfiltVocab;

typedef struct LexfiltMetrics {
  double accuracy;
  // Indexed by label: 0 neither, 1 hateful or offensive.
  double precision[2];
  double recall[2];
  double f1[2];
  uint64_t support[2];
  double macro_f1;
  double weighted_f1;
} LexfiltMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// Valid until the next call into the library from the same thread.
const char *lexfilt_last_error(void);

// Library version, static storage.
const char *lexfilt_version(void);

// Loads a `vocab.txt` (one token per line, id = line number).
//
// # Safety
// `path` must be a valid C string and `out` a valid pointer.
enum LexfiltStatus lexfilt_vocab_load(const char *path, struct LexfiltVocab **out);

// Reloads a vocabulary written by [`lexfilt_vocab_save`] after augmentation:
// ids at or above `base_len` are treated as whole-word added tokens.
//
// # Safety
// `path` must be a valid C string and `out` a valid pointer.
enum LexfiltStatus lexfilt_vocab_load_augmented(const char *path,
                                                size_t base_len,
                                                struct LexfiltVocab **out);

// # Safety
// `vocab` must be NULL or a handle from this library not yet freed.
void lexfilt_vocab_free(struct LexfiltVocab *vocab);

// # Safety
// `vocab` must be a valid handle and `path` a valid C string.
enum LexfiltStatus lexfilt_vocab_save(const struct LexfiltVocab *vocab, const char *path);

// Number of tokens; 0 for NULL.
//
// # Safety
// `vocab` must be NULL or a valid handle.
size_t lexfilt_vocab_len(const struct LexfiltVocab *vocab);

// Number of tokens before augmentation; 0 for NULL.
//
// # Safety
// `vocab` must be NULL or a valid handle.
size_t lexfilt_vocab_base_len(const struct LexfiltVocab *vocab);

// # Safety
// `vocab` must be a valid handle, `token` a valid C string, `out_id` a valid pointer.
enum LexfiltStatus lexfilt_vocab_token_id(const struct LexfiltVocab *vocab,
                                          const char *token,
                                          uint32_t *out_id);

// Tokenizes `text` into ids.
//
// # Safety
// `ids` must have room for `capacity` values (may be NULL when 0);
// `out_len` must be a valid pointer.
enum LexfiltStatus lexfilt_vocab_tokenize(const struct LexfiltVocab *vocab,
                                          const char *text,
                                          uint32_t *ids,
                                          size_t capacity,
                                          size_t *out_len);

// Number of pieces `word` splits into (an unknown word counts as one).
//
// # Safety
// `vocab` must be a valid handle, `word` a valid C string, `out` a valid pointer.
enum LexfiltStatus lexfilt_vocab_fragment_count(const struct LexfiltVocab *vocab,
                                                const char *word,
                                                size_t *out);

// Appends `terms` as whole-word tokens, returning a new handle. Terms that
// are already present, duplicated or unusable are skipped; `out_added`
// receives how many were appended.
//
// # Safety
// `terms` must point to `n_terms` valid C strings; `out` and `out_added`
// must be valid pointers.
enum LexfiltStatus lexfilt_vocab_augment(const struct LexfiltVocab *vocab,
                                         const char *const *terms,
                                         size_t n_terms,
                                         struct LexfiltVocab **out,
                                         size_t *out_added);

// Fits IDF on `texts` with the default preprocessing (lowercase, URLs and
// @mentions stripped, no stopwords).
//
// # Safety
// `texts` must point to `n_texts` valid C strings; `out` must be valid.
enum LexfiltStatus lexfilt_idf_fit(const char *const *texts,
                                   size_t n_texts,
                                   struct LexfiltIdfTable **out);

// # Safety
// `path` must be a valid C string and `out` a valid pointer.
enum LexfiltStatus lexfilt_idf_load(const char *path, struct LexfiltIdfTable **out);

// # Safety
// `table` must be a valid handle and `path` a valid C string.
enum LexfiltStatus lexfilt_idf_save(const struct LexfiltIdfTable *table, const char *path);

// # Safety
// `table` must be NULL or a handle from this library not yet freed.
void lexfilt_idf_free(struct LexfiltIdfTable *table);

// Number of distinct terms; 0 for NULL.
//
// # Safety
// `table` must be NULL or a valid handle.
size_t lexfilt_idf_len(const struct LexfiltIdfTable *table);

// IDF of `term`, `LEXFILT_STATUS_NOT_FOUND` when the term was never seen.
//
// # Safety
// `table` must be a valid handle, `term` a valid C string, `out` a valid pointer.
enum LexfiltStatus lexfilt_idf_get(const struct LexfiltIdfTable *table,
                                   const char *term,
                                   double *out);

// Aggregate TF-IDF score of one text, preprocessed like the fitted corpus.
//
// # Safety
// `table` must be a valid handle, `text` a valid C string, `out` a valid pointer.
enum LexfiltStatus lexfilt_idf_score(const struct LexfiltIdfTable *table,
                                     const char *text,
                                     double *out);

// Keeps the top `max(1, floor(retain * n))` documents by descending score,
// ties broken by ascending id, and writes their ids in rank order.
//
// # Safety
// `doc_ids` and `scores` must each hold `n` values; `out_ids` must have
// room for `capacity` values; `out_len` must be valid.
enum LexfiltStatus lexfilt_rank_filter(const uint64_t *doc_ids,
                                       const double *scores,
                                       size_t n,
                                       double retain,
                                       uint64_t *out_ids,
                                       size_t capacity,
                                       size_t *out_len);

// Binary metrics with label 1 as the positive class. Labels must be 0 or 1.
//
// # Safety
// `predictions` and `labels` must each hold `n` values; `out` must be valid.
enum LexfiltStatus lexfilt_metrics(const uint8_t *predictions,
                                   const uint8_t *labels,
                                   size_t n,
                                   struct LexfiltMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LEXFILT_H */
