/*
 * C interface to the claim verifier.
 *
 * All objects are opaque handles created and destroyed through this API.
 * Functions that can fail return an emulate_status; on failure a
 * human-readable message is available from emulate_last_error() on the same
 * thread until the next failing call. Strings returned by accessors are owned
 * by the handle they came from and stay valid until it is destroyed.
 */
#ifndef EMULATE_EMULATE_H
#define EMULATE_EMULATE_H

#include <stddef.h>

#if defined(_WIN32)
#  define EMULATE_API __declspec(dllexport)
#else
#  define EMULATE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum emulate_status {
  EMULATE_OK = 0,
  EMULATE_E_INVALID_ARGUMENT = 1,
  EMULATE_E_CONFIG = 2,
  EMULATE_E_AUTH = 3,
  EMULATE_E_TRANSPORT = 4,
  EMULATE_E_FIXTURE_MISS = 5,
  EMULATE_E_STORAGE = 6,
  EMULATE_E_SCHEMA = 7,
  EMULATE_E_EMPTY_DATASET = 8,
  EMULATE_E_IO = 9,
  EMULATE_E_INTERNAL = 10
} emulate_status;

typedef enum emulate_verdict {
  EMULATE_VERDICT_FALSE = 0,
  EMULATE_VERDICT_TRUE = 1
} emulate_verdict;

typedef struct emulate_engine emulate_engine;
typedef struct emulate_report emulate_report;
typedef struct emulate_bench emulate_bench;

EMULATE_API const char* emulate_version(void);
EMULATE_API const char* emulate_status_string(emulate_status status);
EMULATE_API const char* emulate_last_error(void);

/* Engine. config_json follows the engine configuration schema (see README);
 * NULL or "{}" means live mode with defaults. */
EMULATE_API emulate_status emulate_engine_create(const char* config_json, emulate_engine** out);
EMULATE_API void emulate_engine_destroy(emulate_engine* engine);

/* Single claim. options_json may be NULL or an object with any of
 *   "id": string, "ablate": ["rm-sr", "rm-scc"],
 *   "budget": {"max_search_queries", "max_results_per_query", "model", "temperature"} */
EMULATE_API emulate_status emulate_verify(emulate_engine* engine, const char* claim_text, const char* options_json,
                                          emulate_report** out);
EMULATE_API emulate_verdict emulate_report_verdict(const emulate_report* report);
/* 1 when the run stopped on sufficient evidence, 0 when the budget ran out. */
EMULATE_API int emulate_report_sufficient(const emulate_report* report);
EMULATE_API const char* emulate_report_json(const emulate_report* report);
/* Trace as JSON Lines; with normalize_timestamps != 0 every ts_ms is 0. */
EMULATE_API const char* emulate_report_trace_jsonl(emulate_report* report, int normalize_timestamps);
EMULATE_API void emulate_report_destroy(emulate_report* report);

/* Benchmark. dataset_kind is "factool-kbqa", "bingcheck" or "factcheck-bench".
 * options_json may be NULL or an object with any of
 *   "ablate", "budget" (as above), "seed", "limit", "concurrency", "keep_traces",
 *   "bingcheck_supported", "factcheck_sample". */
EMULATE_API emulate_status emulate_bench_run(emulate_engine* engine, const char* dataset_kind, const char* path,
                                             const char* options_json, emulate_bench** out);
EMULATE_API size_t emulate_bench_claim_count(const emulate_bench* bench);
EMULATE_API size_t emulate_bench_error_count(const emulate_bench* bench);
EMULATE_API const char* emulate_bench_claim_id(const emulate_bench* bench, size_t index);
EMULATE_API const char* emulate_bench_claim_trace(const emulate_bench* bench, size_t index);
EMULATE_API const char* emulate_bench_predictions_jsonl(const emulate_bench* bench);
EMULATE_API const char* emulate_bench_report_json(const emulate_bench* bench);
EMULATE_API const char* emulate_bench_table(const emulate_bench* bench);
EMULATE_API void emulate_bench_destroy(emulate_bench* bench);

/* Metric report for n prediction/gold pairs (1 = True, 0 = False). The JSON
 * string is allocated by the library; release it with emulate_string_free. */
EMULATE_API emulate_status emulate_metrics_json(const int* predictions, const int* golds, size_t n, char** out_json);
EMULATE_API void emulate_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* EMULATE_EMULATE_H */
