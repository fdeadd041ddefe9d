/* C interface to the raterkit library. Every call returns an rk_status; on
 * failure rk_last_error() holds a message for the calling thread. Strings
 * returned through char** are owned by the caller and released with
 * rk_string_free. */
#ifndef RATERKIT_H
#define RATERKIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(RK_BUILDING)
#define RK_API __attribute__((visibility("default")))
#else
#define RK_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rk_status {
  RK_OK = 0,
  RK_ERR_INVALID_ARGUMENT = 1,
  RK_ERR_PARSE = 2,
  RK_ERR_IO = 3,
  RK_ERR_DEGENERATE = 4,
  RK_ERR_INFEASIBLE = 5,
  RK_ERR_NOT_FOUND = 6,
  RK_ERR_INTERNAL = 99
} rk_status;

typedef struct rk_corpus rk_corpus;
typedef struct rk_vectors rk_vectors;

RK_API const char* rk_version(void);
RK_API const char* rk_last_error(void);
RK_API const char* rk_status_name(rk_status status);
RK_API void rk_string_free(char* s);

/* Agreement statistics on plain arrays. Labels are 0..k-1; matrices are
 * k x k row-major with rows taken from the first rater. */
RK_API rk_status rk_confusion_matrix(const int* labels_a, const int* labels_b, size_t n, int k, int64_t* out);
RK_API rk_status rk_cohen_kappa(const int64_t* matrix, int k, double* out);
RK_API rk_status rk_quadratic_weighted_kappa(const int64_t* matrix, int k, double* out);
/* table is items x k counts; every row must sum to the same rater count. */
RK_API rk_status rk_fleiss_kappa(const int64_t* table, size_t items, int k, double* out);
/* band_label receives a static string such as "substantial". */
RK_API rk_status rk_interpret_kappa(double value, const char** band_label);
/* Rand index between two cluster assignments of the same n points. */
RK_API rk_status rk_consistency(const int* assignment_a, const int* assignment_b, size_t n, double* out);

/* Corpus: responses (JSONL) plus optional scores (CSV, may be NULL). */
RK_API rk_status rk_corpus_load(const char* responses_path, const char* scores_path, rk_corpus** out);
RK_API void rk_corpus_free(rk_corpus* corpus);
RK_API rk_status rk_corpus_counts(const rk_corpus* corpus, size_t* responses, size_t* scores);
RK_API rk_status rk_corpus_filter(const rk_corpus* corpus, size_t min_tokens, rk_corpus** out, size_t* removed);
/* Either path may be NULL to skip that file. */
RK_API rk_status rk_corpus_write(const rk_corpus* corpus, const char* responses_path, const char* scores_path);
/* Splits scored items (all items when unscored) into train/dev/test/reserve. */
RK_API rk_status rk_split_write(const rk_corpus* corpus, const double ratios[4], uint64_t seed, const char* out_csv,
                                size_t sizes[4]);
/* comparisons like "A:C;A@2015:A;A,C,D"; names like "A=Rater A;C=Rater C"
 * (may be NULL). Either output may be NULL. */
RK_API rk_status rk_reliability_table(const rk_corpus* corpus, const char* comparisons, const char* names,
                                      char** json_out, char** markdown_out);

/* design_json: {"raters": [...], "pool": [...], "pair_size": n,
 * "consensus_size": n, "extend": [...], "pinned": {"rater": id,
 * "required": [...], "min_overlap": n}}. Writes rater_id,student_id CSV. */
RK_API rk_status rk_allocation_run(const char* design_json, uint64_t seed, const char* out_csv,
                                   char** verification_json_out);

/* Vector sets. expected_dim 0 accepts any dimension. */
RK_API rk_status rk_vectors_load(const char* path, size_t expected_dim, rk_vectors** out);
RK_API rk_status rk_vectors_tfidf(const rk_corpus* corpus, size_t min_df, rk_vectors** out);
/* options_json keys: dim, lambda, w_missing, sweeps, min_df, pooled. */
RK_API rk_status rk_vectors_wtmf(const rk_corpus* corpus, const char* options_json, uint64_t seed, rk_vectors** out);
RK_API rk_status rk_vectors_save(const rk_vectors* vectors, const char* path);
RK_API rk_status rk_vectors_info(const rk_vectors* vectors, size_t* count, size_t* dim);
RK_API void rk_vectors_free(rk_vectors* vectors);

/* Runs the stages described by a config file (TOML subset or JSON). A stage
 * failure returns its status; the report is written either way and its path
 * stored in report_path_out (may be NULL). */
RK_API rk_status rk_pipeline_run(const char* config_path, char** report_path_out);
/* Same, with the config given as JSON text; relative paths resolve against
 * base_dir. */
RK_API rk_status rk_pipeline_run_json(const char* config_json, const char* base_dir, char** report_path_out);
/* Parses a config file and returns it as JSON text. */
RK_API rk_status rk_config_load(const char* config_path, char** json_out);

#ifdef __cplusplus
}
#endif

#endif
