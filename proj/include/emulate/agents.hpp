#pragma once

// The seven LLM agents. Each one is a prompt asset plus a strict output parser
// with a conservative fallback, so no agent ever fails on a malformed reply.

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "emulate/core.hpp"
#include "emulate/llm_gateway.hpp"

namespace emulate {

enum class AgentKind {
  InitialQueryGen,
  SearchRank,
  SelfContainedCheck,
  DetHelpful,
  SufficientEvidence,
  Classifier,
  AdditionalQueryGen,
};

inline constexpr std::array<AgentKind, 7> kAllAgents{
    AgentKind::InitialQueryGen,    AgentKind::SearchRank, AgentKind::SelfContainedCheck,
    AgentKind::DetHelpful,         AgentKind::SufficientEvidence, AgentKind::Classifier,
    AgentKind::AdditionalQueryGen,
};

// "InitialQueryGen", "SearchRank", ... as they appear in traces.
std::string_view agent_name(AgentKind kind);
// Asset file stem, e.g. "initial_query_gen".
std::string_view agent_asset_stem(AgentKind kind);

struct AgentPrompt {
  std::string agent_name;
  std::string system_text;
  std::string user_template;
  std::string retry_text;  // only the classifier uses one
};

using SlotValues = std::map<std::string, std::string>;

// Replaces every {slot}. Throws InvalidArgument when a referenced slot has
// no value.
std::string render_template(std::string_view tmpl, const SlotValues& slots);
std::vector<std::string> template_slots(std::string_view tmpl);

// Parses an asset file made of [system] / [user] / [retry] sections.
AgentPrompt parse_prompt_asset(std::string_view agent_name, std::string_view text);

class PromptSet {
 public:
  // Prompts compiled into the library from prompts/*.txt.
  static PromptSet builtin();
  // Built-ins overridden by any <stem>.txt present in `dir`.
  static PromptSet with_overrides(const std::filesystem::path& dir);

  const AgentPrompt& get(AgentKind kind) const { return prompts_.at(kind); }
  void set(AgentKind kind, AgentPrompt prompt);

 private:
  std::map<AgentKind, AgentPrompt> prompts_;
};

// ---------------------------------------------------------------------------
// Reply parsers. Exposed for direct testing.

// Numbered or bulleted lines ("1. q", "2) q", "- q", "* q"); also a JSON list
// of strings. Empty when nothing parses.
std::vector<std::string> parse_query_list(std::string_view reply);
// 1-based index list such as "[2, 1]" -> zero-based permutation of size n.
std::optional<std::vector<std::size_t>> parse_permutation(std::string_view reply, std::size_t n);
// Case-insensitive scan of the first 10 tokens; first keyword wins.
std::optional<bool> parse_yes_no(std::string_view reply);
std::optional<Verdict> parse_true_false(std::string_view reply);

struct HelpfulnessJudgment {
  bool helpful = false;
  std::string note;  // non-empty whenever helpful
};

// "HELPFUL: <note>" or "NOT HELPFUL". nullopt when neither form is present.
std::optional<HelpfulnessJudgment> parse_helpfulness(std::string_view reply);

// ---------------------------------------------------------------------------

struct AgentContext {
  const Claim& claim;
  const BudgetConfig& config;
  RunTrace& trace;
};

class Agents {
 public:
  Agents(std::shared_ptr<ChatBackend> backend, PromptSet prompts, std::size_t evidence_char_budget = 8000);

  const PromptSet& prompts() const noexcept { return prompts_; }

  std::vector<SearchQuery> initial_query_gen(const AgentContext& ctx) const;
  std::vector<SearchResultMeta> search_rank(const AgentContext& ctx, const SearchQuery& query,
                                            std::vector<SearchResultMeta> results) const;
  bool self_contained_check(const AgentContext& ctx, const EvidenceSet& evidence, const Document& doc) const;
  HelpfulnessJudgment det_helpful(const AgentContext& ctx, const EvidenceSet& evidence, const Document& doc) const;
  bool sufficient_evidence(const AgentContext& ctx, const EvidenceSet& evidence) const;
  Verdict classify(const AgentContext& ctx, const EvidenceSet& evidence) const;
  // `issued` holds every query text sent so far; repeats (case-insensitive)
  // are dropped and the list is cut to `remaining_budget`.
  std::vector<SearchQuery> additional_query_gen(const AgentContext& ctx, const EvidenceSet& evidence,
                                                const std::vector<std::string>& issued,
                                                int remaining_budget) const;

 private:
  struct Exchange {
    ChatRequest request;
    std::string reply;
  };
  Exchange call(const AgentContext& ctx, AgentKind kind, const SlotValues& slots,
                const std::optional<std::string>& extra_user = std::nullopt) const;
  void log(const AgentContext& ctx, AgentKind kind, const Exchange& ex, std::string_view parse, json output,
           int attempt = 1) const;
  SlotValues base_slots(const AgentContext& ctx, const EvidenceSet* evidence) const;

  std::shared_ptr<ChatBackend> backend_;
  PromptSet prompts_;
  std::size_t evidence_char_budget_;
};

}  // namespace emulate
