#ifndef TERMMINER_H
#define TERMMINER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

#define TM_TRACEBACK_LAST_ROW 0

#define TM_TRACEBACK_GLOBAL 1

#define TM_SCAN_FREQUENCY 0

#define TM_SCAN_LENGTH 1

/**
 * Result code of every fallible call.
 */
typedef enum TmStatus {
  TM_STATUS_OK = 0,
  TM_STATUS_INVALID_PARAMETER = 1,
  TM_STATUS_INVALID_INPUT = 2,
  TM_STATUS_IO = 3,
  TM_STATUS_NULL_POINTER = 4,
  TM_STATUS_BUFFER_TOO_SMALL = 5,
  TM_STATUS_INDEX_OUT_OF_RANGE = 6,
  TM_STATUS_INTERNAL = 7,
  TM_STATUS_PANIC = 8,
} TmStatus;

/**
 * Deduplicated subsequences mined from utterance pairs.
 */
typedef struct TmBag TmBag;

/**
 * Keyword clusters over a bag.
 */
typedef struct TmClustering TmClustering;

/**
 * Collection of pseudo transcriptions.
 */
typedef struct TmCorpus TmCorpus;

typedef struct TmMiningParams {
  double match_score;
  double mismatch_score;
  double gap_score;
  /**
   * `TM_TRACEBACK_LAST_ROW` or `TM_TRACEBACK_GLOBAL`.
   */
  uint32_t traceback;
  size_t min_length;
  /**
   * Worker threads; 0 uses the global pool.
   */
  size_t jobs;
} TmMiningParams;

typedef struct TmClusterConfig {
  double radius_t;
  double sep_a;
  double norm_b;
  size_t max_rounds;
  /**
   * `TM_SCAN_FREQUENCY` or `TM_SCAN_LENGTH`.
   */
  uint32_t scan_order;
} TmClusterConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call into the library from the same thread.
 */
const char *tm_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tm_version(void);

/**
 * Edit distance between two unit sequences.
 *
 * # Safety
 * `x` and `y` must point to `x_len` and `y_len` units; `out` must be
 * writable.
 */
enum TmStatus tm_levenshtein(const uint32_t *x,
                             size_t x_len,
                             const uint32_t *y,
                             size_t y_len,
                             size_t *out);

/**
 * Length-normalized edit distance `b*L/sqrt(|x|^2+|y|^2)`.
 *
 * # Safety
 * As [`tm_levenshtein`].
 */
enum TmStatus tm_normalized_levenshtein(const uint32_t *x,
                                        size_t x_len,
                                        const uint32_t *y,
                                        size_t y_len,
                                        double b,
                                        double *out);

/**
 * Merges pooled boundary times (ms, any order): times no more than
 * `window_ms` apart are chained and replaced by their mean.
 *
 * `*out_len` receives the number of merged boundaries. When it exceeds
 * `out_cap` nothing is written to `out` and `BufferTooSmall` is returned.
 *
 * # Safety
 * `times` must point to `len` values, `out` to `out_cap` writable values,
 * `out_len` must be writable.
 */
enum TmStatus tm_merge_boundaries(const double *times,
                                  size_t len,
                                  double window_ms,
                                  double *out,
                                  size_t out_cap,
                                  size_t *out_len);

struct TmCorpus *tm_corpus_new(void);

/**
 * Appends one utterance.
 *
 * # Safety
 * `corpus` must be a live handle, `utt_id` a NUL-terminated string and
 * `units` must point to `len` units.
 */
enum TmStatus tm_corpus_push(struct TmCorpus *corpus,
                             const char *utt_id,
                             const uint32_t *units,
                             size_t len);

/**
 * Loads pseudo transcriptions from a JSON lines file.
 *
 * # Safety
 * `path` must be NUL-terminated; `out` must be writable.
 */
enum TmStatus tm_corpus_load_jsonl(const char *path, struct TmCorpus **out);

/**
 * # Safety
 * `corpus` must be a live handle or null.
 */
size_t tm_corpus_len(const struct TmCorpus *corpus);

/**
 * # Safety
 * `corpus` must have come from this library and not been freed; null is
 * ignored.
 */
void tm_corpus_free(struct TmCorpus *corpus);

struct TmMiningParams tm_mining_params_default(void);

/**
 * Aligns every pair of utterances and collects the subsequence bag.
 *
 * # Safety
 * `corpus` must be a live handle, `params` readable, `out` writable.
 */
enum TmStatus tm_mine_pairs(const struct TmCorpus *corpus,
                            const struct TmMiningParams *params,
                            struct TmBag **out);

/**
 * Loads a bag written by `tm_bag_write_jsonl` or the CLI.
 *
 * # Safety
 * `path` must be NUL-terminated; `out` must be writable.
 */
enum TmStatus tm_bag_load_jsonl(const char *path, struct TmBag **out);

/**
 * # Safety
 * `bag` must be a live handle or null.
 */
size_t tm_bag_len(const struct TmBag *bag);

/**
 * Borrows the units of entry `index`.
 *
 * # Safety
 * `bag` must be a live handle; `units` and `len` must be writable.
 */
enum TmStatus tm_bag_entry_units(const struct TmBag *bag,
                                 size_t index,
                                 const uint32_t **units,
                                 size_t *len);

/**
 * # Safety
 * `bag` must be a live handle; `path` NUL-terminated.
 */
enum TmStatus tm_bag_write_jsonl(const struct TmBag *bag, const char *path);

/**
 * # Safety
 * As [`tm_corpus_free`].
 */
void tm_bag_free(struct TmBag *bag);

struct TmClusterConfig tm_cluster_config_default(void);

/**
 * Leader clustering of `bag`.
 *
 * # Safety
 * `bag` must be a live handle, `config` readable, `out` writable.
 */
enum TmStatus tm_leader_cluster(const struct TmBag *bag,
                                const struct TmClusterConfig *config,
                                struct TmClustering **out);

/**
 * Number of clusters.
 *
 * # Safety
 * `cl` must be a live handle or null.
 */
size_t tm_clustering_len(const struct TmClustering *cl);

/**
 * # Safety
 * `cl` must be a live handle or null.
 */
size_t tm_clustering_rounds(const struct TmClustering *cl);

/**
 * Number of bag entries outside every cluster.
 *
 * # Safety
 * `cl` must be a live handle or null.
 */
size_t tm_clustering_unassigned_len(const struct TmClustering *cl);

/**
 * Borrows the centroid (medoid) units of cluster `index`.
 *
 * # Safety
 * `cl` must be a live handle; `units` and `len` must be writable.
 */
enum TmStatus tm_clustering_centroid(const struct TmClustering *cl,
                                     size_t index,
                                     const uint32_t **units,
                                     size_t *len);

/**
 * Borrows the bag indices of the members of cluster `index`, ascending.
 *
 * # Safety
 * `cl` must be a live handle; `members` and `len` must be writable.
 */
enum TmStatus tm_clustering_members(const struct TmClustering *cl,
                                    size_t index,
                                    const size_t **members,
                                    size_t *len);

/**
 * Writes the clusters in the CLI's `clusters.json` format.
 *
 * # Safety
 * `cl` must be a live handle; `path` NUL-terminated.
 */
enum TmStatus tm_clustering_write_json(const struct TmClustering *cl, const char *path);

/**
 * # Safety
 * As [`tm_corpus_free`].
 */
void tm_clustering_free(struct TmClustering *cl);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TERMMINER_H */
