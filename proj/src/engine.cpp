#include "emulate/engine.hpp"

#include <atomic>
#include <mutex>
#include <sstream>
#include <thread>

namespace emulate {

std::string_view to_string(GatewayMode mode) {
  switch (mode) {
    case GatewayMode::Live: return "live";
    case GatewayMode::Record: return "record";
    case GatewayMode::Replay: return "replay";
  }
  return "unknown";
}

std::optional<GatewayMode> parse_gateway_mode(std::string_view text) {
  auto t = to_lower_ascii(trim(text));
  if (t == "live") return GatewayMode::Live;
  if (t == "record") return GatewayMode::Record;
  if (t == "replay") return GatewayMode::Replay;
  return std::nullopt;
}

namespace {

template <typename T>
void read_opt(const json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end() && !it->is_null()) {
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Config, std::string("config field \"") + key + "\": " + e.what());
    }
  }
}

void read_ms(const json& obj, const char* key, std::chrono::milliseconds& out, bool allow_zero = false) {
  std::int64_t ms = out.count();
  read_opt(obj, key, ms);
  if (ms < 0 || (ms == 0 && !allow_zero)) throw Error(ErrorCode::Config, std::string("config field \"") + key + "\" must be positive");
  out = std::chrono::milliseconds(ms);
}

const json& section(const json& j, const char* key) {
  static const json empty = json::object();
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return empty;
  if (!it->is_object()) throw Error(ErrorCode::Config, std::string("config section \"") + key + "\" must be an object");
  return *it;
}

}  // namespace

EngineConfig EngineConfig::from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Config, "engine config must be a JSON object");
  EngineConfig c;

  std::string mode = std::string(to_string(c.mode));
  read_opt(j, "mode", mode);
  auto parsed_mode = parse_gateway_mode(mode);
  if (!parsed_mode) throw Error(ErrorCode::Config, "mode must be live, record or replay (got \"" + mode + "\")");
  c.mode = *parsed_mode;

  std::string fixtures;
  read_opt(j, "fixtures_dir", fixtures);
  c.fixtures_dir = fixtures;
  std::string prompts;
  read_opt(j, "prompts_dir", prompts);
  if (!prompts.empty()) c.prompts_dir = prompts;

  const auto& llm = section(j, "llm");
  read_opt(llm, "base_url", c.llm.base_url);
  read_opt(llm, "api_key", c.llm.api_key);
  read_ms(llm, "timeout_ms", c.llm.timeout);
  read_opt(llm, "max_retries", c.llm.retry.max_retries);
  read_ms(llm, "backoff_ms", c.llm.retry.base_delay, true);

  const auto& search = section(j, "search");
  read_opt(search, "endpoint", c.search.endpoint);
  read_opt(search, "api_key", c.search.api_key);
  read_opt(search, "locale", c.search.default_locale);
  read_opt(search, "requests_per_second", c.search.requests_per_second);
  read_ms(search, "timeout_ms", c.search.timeout);
  read_opt(search, "max_retries", c.search.retry.max_retries);
  read_ms(search, "backoff_ms", c.search.retry.base_delay, true);

  const auto& reader = section(j, "reader");
  read_ms(reader, "timeout_ms", c.reader.timeout);
  read_opt(reader, "max_redirects", c.reader.max_redirects);
  read_opt(reader, "max_bytes", c.reader.max_bytes);
  read_opt(reader, "body_char_cap", c.reader.body_char_cap);
  read_opt(reader, "min_text_chars", c.reader.min_text_chars);
  read_opt(reader, "user_agent", c.reader.user_agent);
  read_opt(reader, "honor_robots", c.reader.honor_robots);

  const auto& budget = section(j, "budget");
  read_opt(budget, "max_search_queries", c.budget.max_search_queries);
  read_opt(budget, "max_results_per_query", c.budget.max_results_per_query);
  read_opt(budget, "model", c.budget.model_id);
  read_opt(budget, "temperature", c.budget.temperature);

  read_opt(j, "evidence_char_budget", c.evidence_char_budget);
  read_opt(j, "parallel_fetch", c.parallel_fetch);

  try {
    c.budget.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, e.what());
  }
  if (c.llm.retry.max_retries < 0 || c.search.retry.max_retries < 0)
    throw Error(ErrorCode::Config, "max_retries must be >= 0");
  if (c.reader.max_redirects < 0) throw Error(ErrorCode::Config, "max_redirects must be >= 0");
  if (c.reader.body_char_cap == 0) throw Error(ErrorCode::Config, "body_char_cap must be positive");
  if (c.evidence_char_budget == 0) throw Error(ErrorCode::Config, "evidence_char_budget must be positive");
  if (c.mode != GatewayMode::Live && c.fixtures_dir.empty())
    throw Error(ErrorCode::Config, std::string(to_string(c.mode)) + " mode needs a fixtures directory");
  return c;
}

Ablations parse_ablations(const std::vector<std::string>& names) {
  Ablations a;
  for (const auto& n : names) {
    std::string key;
    for (char c : to_lower_ascii(trim(n))) key += c == '_' ? '-' : c;
    if (key == "rm-sr") a.remove_search_rank = true;
    else if (key == "rm-scc") a.remove_self_contained = true;
    else throw Error(ErrorCode::InvalidArgument, "unknown ablation \"" + n + "\" (expected rm-sr or rm-scc)");
  }
  return a;
}

// ---------------------------------------------------------------------------

Engine::Engine(EngineConfig config, std::shared_ptr<HttpTransport> transport, Clock clock)
    : config_(std::move(config)) {
  if (config_.mode == GatewayMode::Replay && !std::filesystem::is_directory(config_.fixtures_dir))
    throw Error(ErrorCode::Config, "fixtures directory does not exist: " + config_.fixtures_dir.string());
  if (config_.mode != GatewayMode::Live) store_ = std::make_shared<FixtureStore>(config_.fixtures_dir);

  std::shared_ptr<ChatBackend> chat;
  std::shared_ptr<SearchBackend> search;
  std::shared_ptr<PageFetcher> fetcher;
  if (config_.mode == GatewayMode::Replay) {
    chat = std::make_shared<ReplayChatBackend>(store_);
    search = std::make_shared<FixtureSearchBackend>(store_);
    fetcher = std::make_shared<FixturePageFetcher>(store_);
  } else {
    auto serper_host = parse_url(config_.search.endpoint);
    if (config_.search.api_key.empty() && serper_host && serper_host->host.find("serper.dev") != std::string::npos)
      throw Error(ErrorCode::Config, "search provider key missing: set SERPER_API_KEY");
    auto llm_host = parse_url(config_.llm.base_url);
    if (config_.llm.api_key.empty() && llm_host && llm_host->host == "api.openai.com")
      throw Error(ErrorCode::Config, "LLM API key missing: set OPENAI_API_KEY");
    chat = std::make_shared<LiveChatBackend>(config_.llm, transport);
    search = std::make_shared<SerperSearchBackend>(config_.search, transport);
    fetcher = std::make_shared<LivePageFetcher>(config_.reader, transport);
    if (config_.mode == GatewayMode::Record) {
      chat = std::make_shared<RecordingChatBackend>(chat, store_);
      search = std::make_shared<RecordingSearchBackend>(search, store_);
      fetcher = std::make_shared<RecordingPageFetcher>(fetcher, store_);
    }
  }

  auto prompts = config_.prompts_dir ? PromptSet::with_overrides(*config_.prompts_dir) : PromptSet::builtin();
  agents_ = std::make_unique<Agents>(chat, std::move(prompts), config_.evidence_char_budget);
  search_ = std::make_unique<SearchGateway>(search);
  reader_ = std::make_unique<PageReader>(fetcher, config_.reader);
  pipeline_ = std::make_unique<Pipeline>(*agents_, *search_, *reader_,
                                         PipelineOptions{config_.parallel_fetch, std::move(clock)});
}

VerdictReport Engine::verify(const Claim& claim, Ablations ablations, const std::optional<BudgetConfig>& budget) const {
  return pipeline_->verify(claim, budget.value_or(config_.budget), ablations);
}

BenchResult Engine::bench(DatasetKind kind, const std::filesystem::path& path, const BenchOptions& options) const {
  auto claims = load_dataset(kind, path, options.load);
  if (options.limit != 0 && claims.size() > options.limit) claims.resize(options.limit);

  BenchResult result;
  result.dataset = kind;
  result.outcomes.resize(claims.size());
  const auto budget = options.budget.value_or(config_.budget);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < claims.size(); i = next++) {
      auto& out = result.outcomes[i];
      out.id = claims[i].claim.id;
      out.text = claims[i].claim.text;
      out.gold = claims[i].gold;
      try {
        auto report = pipeline_->verify(claims[i].claim, budget, options.ablations);
        out.predicted = report.verdict;
        out.terminated_by = report.terminated_by;
        if (options.keep_traces) out.trace_jsonl = report.trace.to_jsonl();
      } catch (const Error& e) {
        out.error = std::string(to_string(e.code())) + ": " + e.what();
      } catch (const std::exception& e) {
        out.error = std::string("Internal: ") + e.what();
      }
    }
  };
  std::size_t threads = std::max<std::size_t>(1, std::min(options.concurrency, claims.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::vector<Verdict> preds, golds;
  for (const auto& o : result.outcomes) {
    if (!o.predicted) {
      ++result.errored;
      continue;
    }
    preds.push_back(*o.predicted);
    golds.push_back(o.gold);
  }
  if (!preds.empty()) result.metrics = report(confusion(preds, golds));
  return result;
}

std::string BenchResult::predictions_jsonl() const {
  std::ostringstream out;
  for (const auto& o : outcomes) {
    json line = {{"id", o.id}, {"gold", to_string(o.gold)}};
    line["predicted"] = o.predicted ? json(to_string(*o.predicted)) : json(nullptr);
    line["terminated_by"] = o.terminated_by ? json(to_string(*o.terminated_by)) : json(nullptr);
    if (!o.error.empty()) line["error"] = o.error;
    out << line.dump() << '\n';
  }
  return out.str();
}

json BenchResult::report_json(std::string_view method) const {
  return {{"dataset", to_string(dataset)},
          {"method", method},
          {"claims", outcomes.size()},
          {"scored", outcomes.size() - errored},
          {"errored", errored},
          {"metrics", metrics ? metrics->to_json() : json(nullptr)}};
}

std::string BenchResult::table(std::string_view method) const {
  if (!metrics) return "no completed claims; nothing to score\n";
  return render_table({TableRow{std::string(to_string(dataset)), std::string(method), *metrics}});
}

}  // namespace emulate
