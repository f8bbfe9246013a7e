// emulate: verify single claims or run benchmark datasets through the C API.
//
// Exit codes: 0 success, 1 usage, 2 config/auth/gateway failure,
// 3 too many claims of a benchmark failed.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "emulate/emulate.h"

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitPartial = 3;

struct CommonFlags {
  std::string model = "gpt-4.1-2025-04-14";
  double temperature = 1.0;
  int max_queries = 4;
  int max_results = 2;
  std::string mode;
  std::string fixtures;
  std::vector<std::string> ablate;
  std::string prompts;
  std::string llm_base_url;
  std::string search_endpoint;
  std::string locale;
  int backoff_ms = 1000;
  bool no_robots = false;
  bool sequential_fetch = false;
};

std::string env(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string{};
}

std::string first_non_empty(std::initializer_list<std::string> values) {
  for (const auto& v : values)
    if (!v.empty()) return v;
  return {};
}

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--model", f.model, "Chat model identifier")->capture_default_str();
  cmd->add_option("--temperature", f.temperature, "Sampling temperature for every agent")->capture_default_str();
  cmd->add_option("--max-queries", f.max_queries, "Maximum search queries per claim")->capture_default_str();
  cmd->add_option("--max-results", f.max_results, "Search results requested per query")->capture_default_str();
  cmd->add_option("--mode", f.mode, "Gateway mode: live, record or replay (env EMULATE_MODE)")
      ->check(CLI::IsMember({"live", "record", "replay"}));
  cmd->add_option("--fixtures", f.fixtures, "Fixture directory for record/replay (env EMULATE_FIXTURES)");
  cmd->add_option("--ablate", f.ablate, "Remove an agent: rm-sr and/or rm-scc")
      ->check(CLI::IsMember({"rm-sr", "rm-scc"}));
  cmd->add_option("--prompts", f.prompts, "Directory of prompt overrides");
  cmd->add_option("--llm-base-url", f.llm_base_url, "OpenAI-compatible base URL (env EMULATE_LLM_BASE_URL)");
  cmd->add_option("--search-endpoint", f.search_endpoint, "Serper-style search endpoint (env EMULATE_SEARCH_ENDPOINT)");
  cmd->add_option("--locale", f.locale, "Search locale sent to the provider");
  cmd->add_option("--backoff-ms", f.backoff_ms, "Base retry backoff in milliseconds")->capture_default_str();
  cmd->add_flag("--no-robots", f.no_robots, "Do not consult robots.txt before fetching pages");
  cmd->add_flag("--sequential-fetch", f.sequential_fetch, "Fetch pages one at a time");
}

json engine_config(const CommonFlags& f) {
  json cfg;
  cfg["mode"] = first_non_empty({f.mode, env("EMULATE_MODE"), "live"});
  cfg["fixtures_dir"] = first_non_empty({f.fixtures, env("EMULATE_FIXTURES")});
  if (!f.prompts.empty()) cfg["prompts_dir"] = f.prompts;
  json llm = {{"api_key", first_non_empty({env("EMULATE_LLM_API_KEY"), env("OPENAI_API_KEY")})},
              {"backoff_ms", f.backoff_ms}};
  if (auto base = first_non_empty({f.llm_base_url, env("EMULATE_LLM_BASE_URL"), env("OPENAI_BASE_URL")}); !base.empty())
    llm["base_url"] = base;
  cfg["llm"] = llm;
  json search = {{"api_key", env("SERPER_API_KEY")}, {"backoff_ms", f.backoff_ms}};
  if (auto ep = first_non_empty({f.search_endpoint, env("EMULATE_SEARCH_ENDPOINT")}); !ep.empty())
    search["endpoint"] = ep;
  if (!f.locale.empty()) search["locale"] = f.locale;
  cfg["search"] = search;
  cfg["reader"] = {{"honor_robots", !f.no_robots}};
  cfg["budget"] = {{"max_search_queries", f.max_queries},
                   {"max_results_per_query", f.max_results},
                   {"model", f.model},
                   {"temperature", f.temperature}};
  cfg["parallel_fetch"] = !f.sequential_fetch;
  return cfg;
}

int exit_code_for(emulate_status status) {
  return status == EMULATE_E_INVALID_ARGUMENT ? kExitUsage : kExitConfig;
}

int report_failure(const char* what, emulate_status status) {
  std::cerr << "emulate: " << what << " failed (" << emulate_status_string(status) << "): " << emulate_last_error()
            << '\n';
  return exit_code_for(status);
}

bool write_file(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) {
    std::cerr << "emulate: cannot write " << path << '\n';
    return false;
  }
  return true;
}

struct EngineHandle {
  emulate_engine* ptr = nullptr;
  ~EngineHandle() { emulate_engine_destroy(ptr); }
};

int run_verify(const CommonFlags& flags, const std::string& claim, const std::string& trace_path, bool as_json,
               bool zero_timestamps) {
  if (claim.find_first_not_of(" \t\r\n") == std::string::npos) {
    std::cerr << "emulate verify: the claim must not be empty\n";
    return kExitUsage;
  }
  EngineHandle engine;
  if (auto st = emulate_engine_create(engine_config(flags).dump().c_str(), &engine.ptr); st != EMULATE_OK)
    return report_failure("engine setup", st);

  json options = {{"ablate", flags.ablate}};
  emulate_report* report = nullptr;
  if (auto st = emulate_verify(engine.ptr, claim.c_str(), options.dump().c_str(), &report); st != EMULATE_OK)
    return report_failure("verification", st);
  std::unique_ptr<emulate_report, decltype(&emulate_report_destroy)> guard(report, &emulate_report_destroy);

  json body = json::parse(emulate_report_json(report));
  if (as_json) {
    std::cout << body.dump(2) << '\n';
  } else {
    std::cout << body["verdict"].get<std::string>() << '\n';
    std::cout << "terminated by: " << body["terminated_by"].get<std::string>() << '\n';
    std::cout << "evidence:";
    if (body["evidence"].empty()) std::cout << " none";
    std::cout << '\n';
    int n = 0;
    for (const auto& item : body["evidence"]) {
      std::cout << "  " << ++n << ". " << item["note"].get<std::string>() << "\n     source: "
                << item["source_url"].get<std::string>() << '\n';
    }
  }
  if (!trace_path.empty() && !write_file(trace_path, emulate_report_trace_jsonl(report, zero_timestamps ? 1 : 0)))
    return kExitConfig;
  return kExitOk;
}

int run_bench(const CommonFlags& flags, const std::string& kind, const std::string& path, const std::string& out_dir,
              std::optional<std::uint64_t> seed, std::size_t limit, std::size_t concurrency, bool traces,
              double max_error_rate) {
  EngineHandle engine;
  if (auto st = emulate_engine_create(engine_config(flags).dump().c_str(), &engine.ptr); st != EMULATE_OK)
    return report_failure("engine setup", st);

  json options = {{"ablate", flags.ablate},
                  {"limit", limit},
                  {"concurrency", concurrency},
                  {"keep_traces", traces}};
  if (seed) options["seed"] = *seed;
  emulate_bench* bench = nullptr;
  if (auto st = emulate_bench_run(engine.ptr, kind.c_str(), path.c_str(), options.dump().c_str(), &bench);
      st != EMULATE_OK)
    return report_failure("benchmark", st);
  std::unique_ptr<emulate_bench, decltype(&emulate_bench_destroy)> guard(bench, &emulate_bench_destroy);

  const fs::path out(out_dir);
  bool ok = write_file(out / "predictions.jsonl", emulate_bench_predictions_jsonl(bench)) &&
            write_file(out / "report.json", std::string(emulate_bench_report_json(bench)) + "\n") &&
            write_file(out / "report.txt", emulate_bench_table(bench));
  if (traces) {
    for (std::size_t i = 0; i < emulate_bench_claim_count(bench); ++i) {
      std::string id = emulate_bench_claim_id(bench, i);
      for (char& c : id)
        if (c == '/' || c == '\\') c = '_';
      ok = write_file(out / "traces" / (id + ".jsonl"), emulate_bench_claim_trace(bench, i)) && ok;
    }
  }
  if (!ok) return kExitConfig;

  std::cout << emulate_bench_table(bench);
  const auto total = emulate_bench_claim_count(bench);
  const auto errored = emulate_bench_error_count(bench);
  if (errored > 0) {
    std::cerr << "emulate: " << errored << " of " << total
              << " claim(s) hit a gateway failure and were excluded from the metrics\n";
  }
  std::cout << "wrote " << (out / "predictions.jsonl").string() << ", " << (out / "report.json").string() << ", "
            << (out / "report.txt").string() << '\n';
  if (total > 0 && static_cast<double>(errored) / static_cast<double>(total) > max_error_rate) return kExitPartial;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent claim verification with iterative web evidence retrieval"};
  app.set_version_flag("--version", std::string(emulate_version()));
  app.require_subcommand(1);

  CommonFlags verify_flags;
  std::string claim;
  std::string trace_path;
  bool as_json = false;
  bool zero_timestamps = false;
  auto* verify = app.add_subcommand("verify", "Verify a single atomic claim");
  verify->add_option("claim", claim, "The claim text")->required();
  add_common(verify, verify_flags);
  verify->add_option("--trace", trace_path, "Write the run trace as JSON Lines to this file");
  verify->add_flag("--zero-timestamps", zero_timestamps, "Write 0 for every trace timestamp");
  verify->add_flag("--json", as_json, "Print the report as JSON");

  CommonFlags bench_flags;
  std::string kind, path, out_dir = "bench-out";
  std::optional<std::uint64_t> seed;
  std::size_t limit = 0, concurrency = 4;
  bool traces = false;
  double max_error_rate = 0.1;
  auto* bench = app.add_subcommand("bench", "Run a benchmark dataset and score it");
  bench->add_option("dataset", kind, "factool-kbqa, bingcheck or factcheck-bench")->required();
  bench->add_option("path", path, "Dataset file (JSON array or JSON Lines)")->required();
  add_common(bench, bench_flags);
  bench->add_option("--out", out_dir, "Output directory")->capture_default_str();
  bench->add_option("--seed", seed, "Sampling seed for BingCheck / Factcheck-Bench subsets");
  bench->add_option("--limit", limit, "Only run the first N claims (0 = all)")->capture_default_str();
  bench->add_option("--concurrency", concurrency, "Claims verified in parallel")->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench->add_flag("--trace", traces, "Write one trace file per claim under <out>/traces");
  bench->add_option("--max-error-rate", max_error_rate, "Failed-claim fraction above which the exit code is 3")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (verify->parsed()) return run_verify(verify_flags, claim, trace_path, as_json, zero_timestamps);
  return run_bench(bench_flags, kind, path, out_dir, seed, limit, concurrency, traces, max_error_rate);
}
