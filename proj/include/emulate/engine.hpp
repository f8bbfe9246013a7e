#pragma once

// Wires gateways, agents and the pipeline together from one JSON config, and
// runs whole benchmark datasets over a bounded worker pool.

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "emulate/agents.hpp"
#include "emulate/evalkit.hpp"
#include "emulate/http.hpp"
#include "emulate/llm_gateway.hpp"
#include "emulate/page_reader.hpp"
#include "emulate/pipeline.hpp"
#include "emulate/search_gateway.hpp"

namespace emulate {

enum class GatewayMode { Live, Record, Replay };
std::string_view to_string(GatewayMode mode);
std::optional<GatewayMode> parse_gateway_mode(std::string_view text);

struct EngineConfig {
  GatewayMode mode = GatewayMode::Live;
  std::filesystem::path fixtures_dir;
  LiveChatConfig llm;
  SearchProviderConfig search;
  ReaderConfig reader;
  std::optional<std::filesystem::path> prompts_dir;
  BudgetConfig budget;
  std::size_t evidence_char_budget = 8000;
  bool parallel_fetch = true;

  // Missing keys keep their defaults. Throws Config.
  static EngineConfig from_json(const json& j);
};

// Accepts "rm-sr" / "rm-scc" (case-insensitive, '_' or '-').
Ablations parse_ablations(const std::vector<std::string>& names);

struct BenchOptions {
  Ablations ablations;
  std::optional<BudgetConfig> budget;
  LoadOptions load;
  std::size_t limit = 0;  // 0: all claims
  std::size_t concurrency = 4;
  bool keep_traces = false;
};

struct ClaimOutcome {
  std::string id;
  std::string text;
  Verdict gold = Verdict::True;
  std::optional<Verdict> predicted;
  std::optional<TerminatedBy> terminated_by;
  std::string error;  // set when the run hit a fatal gateway error
  std::string trace_jsonl;
};

struct BenchResult {
  DatasetKind dataset = DatasetKind::FacToolKBQA;
  std::vector<ClaimOutcome> outcomes;  // dataset order
  std::optional<MetricReport> metrics;  // over claims that completed
  std::size_t errored = 0;

  // {"id","gold","predicted","terminated_by"} per line; errored claims carry "error".
  std::string predictions_jsonl() const;
  json report_json(std::string_view method = "EMULATE") const;
  std::string table(std::string_view method = "EMULATE") const;
};

class Engine {
 public:
  explicit Engine(EngineConfig config, std::shared_ptr<HttpTransport> transport = make_http_transport(),
                  Clock clock = system_clock_ms());

  const EngineConfig& config() const noexcept { return config_; }

  VerdictReport verify(const Claim& claim, Ablations ablations = {},
                       const std::optional<BudgetConfig>& budget = std::nullopt) const;
  BenchResult bench(DatasetKind kind, const std::filesystem::path& path, const BenchOptions& options) const;

 private:
  EngineConfig config_;
  std::shared_ptr<FixtureStore> store_;
  std::unique_ptr<Agents> agents_;
  std::unique_ptr<SearchGateway> search_;
  std::unique_ptr<PageReader> reader_;
  std::unique_ptr<Pipeline> pipeline_;
};

}  // namespace emulate
