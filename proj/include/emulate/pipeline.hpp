#pragma once

// Verification loop: search, rank, read each hit, and decide between the four
// reading outcomes (sufficient / helpful / irrelevant / not self-contained).
// Pages that cannot be understood yet are deferred and re-read once at the
// end, after the memory bank may have grown.

#include <deque>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "emulate/agents.hpp"
#include "emulate/core.hpp"
#include "emulate/page_reader.hpp"
#include "emulate/search_gateway.hpp"

namespace emulate {

struct Ablations {
  bool remove_search_rank = false;    // RM-SR
  bool remove_self_contained = false;  // RM-SCC
};

enum class TerminatedBy { SufficientEvidence, BudgetExhausted };
std::string_view to_string(TerminatedBy t);

struct PipelineState {
  Claim claim;
  EvidenceSet evidence;
  std::deque<SearchQuery> pending_queries;
  std::vector<Document> deferred;
  BudgetLedger ledger;
  std::vector<std::string> issued_query_texts;
  std::set<std::string> read_urls;  // dedupe keys of every hit already opened
  RunTrace trace;
  Ablations ablations;
  bool sufficient = false;
  int step = 0;  // documents read so far
};

struct VerdictReport {
  Verdict verdict = Verdict::False;
  EvidenceSet evidence;
  RunTrace trace;
  TerminatedBy terminated_by = TerminatedBy::BudgetExhausted;

  json to_json() const;
};

struct PipelineOptions {
  // Fetch all hits of one query concurrently; they are still consumed in rank order.
  bool parallel_fetch = true;
  Clock clock = system_clock_ms();
};

class Pipeline {
 public:
  Pipeline(const Agents& agents, const SearchGateway& search, const PageReader& reader,
           PipelineOptions options = {});

  // Throws only for fatal gateway errors (auth, config, fixture miss, LLM
  // transport); every per-query and per-result failure is traced and skipped.
  VerdictReport verify(const Claim& claim, const BudgetConfig& config, Ablations ablations = {}) const;

  PipelineState initial_state(const Claim& claim, const BudgetConfig& config, Ablations ablations) const;
  // Acquires and reads one search hit.
  void process_result(const SearchResultMeta& result, PipelineState& state) const;
  // Reads an already acquired document (the loop path of process_result).
  void process_document(const Document& doc, PipelineState& state) const;
  // One FIFO pass over the deferred documents; failures are dropped.
  void drain_deferred(PipelineState& state) const;

 private:
  struct Acquired {
    std::optional<Document> doc;
    std::string fallback_reason;
    std::string unusable_reason;
  };
  Acquired acquire(const SearchResultMeta& result) const;
  void process_acquired(const SearchResultMeta& result, Acquired acquired, PipelineState& state) const;
  void read_comprehensible(const Document& doc, PipelineState& state, const AgentContext& ctx,
                           std::string_view phase) const;
  VerdictReport finish(PipelineState& state, TerminatedBy by) const;

  const Agents& agents_;
  const SearchGateway& search_;
  const PageReader& reader_;
  PipelineOptions options_;
};

}  // namespace emulate
