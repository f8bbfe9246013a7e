#include "emulate/emulate.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "emulate/engine.hpp"

using namespace emulate;

struct emulate_engine {
  std::unique_ptr<Engine> engine;
};

struct emulate_report {
  VerdictReport report;
  std::string json_text;
  std::string trace_text;
};

struct emulate_bench {
  BenchResult result;
  std::string predictions;
  std::string report_json;
  std::string table;
};

namespace {

thread_local std::string g_last_error;

emulate_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::LengthMismatch: return EMULATE_E_INVALID_ARGUMENT;
    case ErrorCode::Config: return EMULATE_E_CONFIG;
    case ErrorCode::Auth: return EMULATE_E_AUTH;
    case ErrorCode::Transport:
    case ErrorCode::Quota:
    case ErrorCode::Fetch: return EMULATE_E_TRANSPORT;
    case ErrorCode::FixtureMiss: return EMULATE_E_FIXTURE_MISS;
    case ErrorCode::Storage: return EMULATE_E_STORAGE;
    case ErrorCode::Schema: return EMULATE_E_SCHEMA;
    case ErrorCode::EmptyDataset: return EMULATE_E_EMPTY_DATASET;
    case ErrorCode::Io: return EMULATE_E_IO;
    case ErrorCode::EmptyExtraction:
    case ErrorCode::Unusable:
    case ErrorCode::Internal: return EMULATE_E_INTERNAL;
  }
  return EMULATE_E_INTERNAL;
}

emulate_status fail(emulate_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename Body>
emulate_status guarded(Body&& body) {
  try {
    body();
    g_last_error.clear();
    return EMULATE_OK;
  } catch (const Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const json::exception& e) {
    return fail(EMULATE_E_INVALID_ARGUMENT, std::string("invalid JSON: ") + e.what());
  } catch (const std::exception& e) {
    return fail(EMULATE_E_INTERNAL, e.what());
  } catch (...) {
    return fail(EMULATE_E_INTERNAL, "unknown error");
  }
}

json parse_options(const char* text) {
  if (!text || !*text) return json::object();
  json j = json::parse(text);
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "options must be a JSON object");
  return j;
}

Ablations ablations_of(const json& options) {
  std::vector<std::string> names;
  if (auto it = options.find("ablate"); it != options.end() && !it->is_null()) names = it->get<std::vector<std::string>>();
  return parse_ablations(names);
}

std::optional<BudgetConfig> budget_of(const json& options, const BudgetConfig& base) {
  auto it = options.find("budget");
  if (it == options.end() || it->is_null()) return std::nullopt;
  BudgetConfig b = base;
  b.max_search_queries = it->value("max_search_queries", b.max_search_queries);
  b.max_results_per_query = it->value("max_results_per_query", b.max_results_per_query);
  b.model_id = it->value("model", b.model_id);
  b.temperature = it->value("temperature", b.temperature);
  b.validate();
  return b;
}

}  // namespace

extern "C" {

const char* emulate_version(void) { return "1.0.0"; }

const char* emulate_status_string(emulate_status status) {
  switch (status) {
    case EMULATE_OK: return "ok";
    case EMULATE_E_INVALID_ARGUMENT: return "invalid argument";
    case EMULATE_E_CONFIG: return "configuration error";
    case EMULATE_E_AUTH: return "authentication error";
    case EMULATE_E_TRANSPORT: return "transport error";
    case EMULATE_E_FIXTURE_MISS: return "fixture miss";
    case EMULATE_E_STORAGE: return "storage error";
    case EMULATE_E_SCHEMA: return "dataset schema error";
    case EMULATE_E_EMPTY_DATASET: return "empty dataset";
    case EMULATE_E_IO: return "I/O error";
    case EMULATE_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* emulate_last_error(void) { return g_last_error.c_str(); }

emulate_status emulate_engine_create(const char* config_json, emulate_engine** out) {
  if (!out) return fail(EMULATE_E_INVALID_ARGUMENT, "out must not be NULL");
  *out = nullptr;
  return guarded([&] {
    json cfg = config_json && *config_json ? json::parse(config_json) : json::object();
    auto handle = std::make_unique<emulate_engine>();
    handle->engine = std::make_unique<Engine>(EngineConfig::from_json(cfg));
    *out = handle.release();
  });
}

void emulate_engine_destroy(emulate_engine* engine) { delete engine; }

emulate_status emulate_verify(emulate_engine* engine, const char* claim_text, const char* options_json,
                              emulate_report** out) {
  if (!engine || !out) return fail(EMULATE_E_INVALID_ARGUMENT, "engine and out must not be NULL");
  *out = nullptr;
  if (!claim_text) return fail(EMULATE_E_INVALID_ARGUMENT, "claim text must not be NULL");
  return guarded([&] {
    auto options = parse_options(options_json);
    auto claim = Claim::make(options.value("id", std::string("claim-0")), claim_text);
    auto report = engine->engine->verify(claim, ablations_of(options),
                                         budget_of(options, engine->engine->config().budget));
    auto handle = std::make_unique<emulate_report>(emulate_report{std::move(report), {}, {}});
    handle->json_text = handle->report.to_json().dump();
    *out = handle.release();
  });
}

emulate_verdict emulate_report_verdict(const emulate_report* report) {
  return report && report->report.verdict == Verdict::True ? EMULATE_VERDICT_TRUE : EMULATE_VERDICT_FALSE;
}

int emulate_report_sufficient(const emulate_report* report) {
  return report && report->report.terminated_by == TerminatedBy::SufficientEvidence ? 1 : 0;
}

const char* emulate_report_json(const emulate_report* report) { return report ? report->json_text.c_str() : ""; }

const char* emulate_report_trace_jsonl(emulate_report* report, int normalize_timestamps) {
  if (!report) return "";
  report->trace_text = report->report.trace.to_jsonl(normalize_timestamps != 0);
  return report->trace_text.c_str();
}

void emulate_report_destroy(emulate_report* report) { delete report; }

emulate_status emulate_bench_run(emulate_engine* engine, const char* dataset_kind, const char* path,
                                 const char* options_json, emulate_bench** out) {
  if (!engine || !out || !dataset_kind || !path)
    return fail(EMULATE_E_INVALID_ARGUMENT, "engine, dataset_kind, path and out must not be NULL");
  *out = nullptr;
  return guarded([&] {
    auto kind = parse_dataset_kind(dataset_kind);
    if (!kind) throw Error(ErrorCode::InvalidArgument, std::string("unknown dataset kind \"") + dataset_kind + "\"");
    auto options = parse_options(options_json);
    BenchOptions bo;
    bo.ablations = ablations_of(options);
    bo.budget = budget_of(options, engine->engine->config().budget);
    bo.load.seed = options.value("seed", bo.load.seed);
    bo.load.bingcheck_supported = options.value("bingcheck_supported", bo.load.bingcheck_supported);
    bo.load.factcheck_sample = options.value("factcheck_sample", bo.load.factcheck_sample);
    bo.limit = options.value("limit", bo.limit);
    bo.concurrency = options.value("concurrency", bo.concurrency);
    bo.keep_traces = options.value("keep_traces", bo.keep_traces);

    auto handle = std::make_unique<emulate_bench>();
    handle->result = engine->engine->bench(*kind, path, bo);
    std::string method = "EMULATE";
    if (bo.ablations.remove_search_rank) method += " RM-SR";
    if (bo.ablations.remove_self_contained) method += " RM-SCC";
    handle->predictions = handle->result.predictions_jsonl();
    handle->report_json = handle->result.report_json(method).dump(2);
    handle->table = handle->result.table(method);
    *out = handle.release();
  });
}

size_t emulate_bench_claim_count(const emulate_bench* bench) { return bench ? bench->result.outcomes.size() : 0; }
size_t emulate_bench_error_count(const emulate_bench* bench) { return bench ? bench->result.errored : 0; }

const char* emulate_bench_claim_id(const emulate_bench* bench, size_t index) {
  if (!bench || index >= bench->result.outcomes.size()) return nullptr;
  return bench->result.outcomes[index].id.c_str();
}

const char* emulate_bench_claim_trace(const emulate_bench* bench, size_t index) {
  if (!bench || index >= bench->result.outcomes.size()) return nullptr;
  return bench->result.outcomes[index].trace_jsonl.c_str();
}

const char* emulate_bench_predictions_jsonl(const emulate_bench* bench) { return bench ? bench->predictions.c_str() : ""; }
const char* emulate_bench_report_json(const emulate_bench* bench) { return bench ? bench->report_json.c_str() : ""; }
const char* emulate_bench_table(const emulate_bench* bench) { return bench ? bench->table.c_str() : ""; }
void emulate_bench_destroy(emulate_bench* bench) { delete bench; }

emulate_status emulate_metrics_json(const int* predictions, const int* golds, size_t n, char** out_json) {
  if (!out_json || (n > 0 && (!predictions || !golds)))
    return fail(EMULATE_E_INVALID_ARGUMENT, "predictions, golds and out_json must not be NULL");
  *out_json = nullptr;
  return guarded([&] {
    std::vector<Verdict> p(n), g(n);
    for (size_t i = 0; i < n; ++i) {
      p[i] = predictions[i] ? Verdict::True : Verdict::False;
      g[i] = golds[i] ? Verdict::True : Verdict::False;
    }
    auto text = report(confusion(p, g)).to_json().dump();
    char* buf = static_cast<char*>(std::malloc(text.size() + 1));
    if (!buf) throw std::bad_alloc();
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *out_json = buf;
  });
}

void emulate_string_free(char* s) { std::free(s); }

}  // extern "C"
