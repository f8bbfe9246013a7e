#include "emulate/pipeline.hpp"

#include <future>
#include <set>

namespace emulate {

std::string_view to_string(TerminatedBy t) {
  return t == TerminatedBy::SufficientEvidence ? "SufficientEvidence" : "BudgetExhausted";
}

json VerdictReport::to_json() const {
  json items = json::array();
  for (const auto& it : evidence.items()) {
    items.push_back({{"note", it.note},
                     {"source_url", it.source_url},
                     {"source_title", it.source_title},
                     {"added_at_step", it.added_at_step}});
  }
  return {{"verdict", to_string(verdict)}, {"terminated_by", to_string(terminated_by)}, {"evidence", items}};
}

Pipeline::Pipeline(const Agents& agents, const SearchGateway& search, const PageReader& reader,
                   PipelineOptions options)
    : agents_(agents), search_(search), reader_(reader), options_(std::move(options)) {}

PipelineState Pipeline::initial_state(const Claim& claim, const BudgetConfig& config, Ablations ablations) const {
  if (trim(claim.text).empty()) throw Error(ErrorCode::InvalidArgument, "claim text must not be empty");
  return PipelineState{claim, {}, {}, {}, BudgetLedger(config), {}, {}, RunTrace(options_.clock), ablations};
}

namespace {

AgentContext context_of(PipelineState& state) {
  return AgentContext{state.claim, state.ledger.config(), state.trace};
}

void scenario(PipelineState& state, const Document& doc, std::string_view which, std::string_view phase,
              std::string_view reason = {}) {
  json payload = {{"url", doc.meta.url}, {"scenario", which}, {"phase", phase}};
  if (!reason.empty()) payload["reason"] = reason;
  state.trace.emit(EventKind::ScenarioDecision, std::move(payload));
}

}  // namespace

Pipeline::Acquired Pipeline::acquire(const SearchResultMeta& result) const {
  Acquired out;
  try {
    out.doc = reader_.acquire_document(result, &out.fallback_reason);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Unusable) throw;
    out.unusable_reason = e.what();
  }
  return out;
}

void Pipeline::process_result(const SearchResultMeta& result, PipelineState& state) const {
  if (state.read_urls.count(url_dedupe_key(result.url))) {
    state.trace.emit(EventKind::ScenarioDecision,
                     {{"url", result.url}, {"scenario", "c"}, {"phase", "loop"}, {"reason", "already_read"}});
    return;
  }
  process_acquired(result, acquire(result), state);
}

void Pipeline::process_acquired(const SearchResultMeta& result, Acquired acquired, PipelineState& state) const {
  state.read_urls.insert(url_dedupe_key(result.url));
  if (!acquired.doc) {
    state.trace.emit(EventKind::Fetch, {{"url", result.url}, {"usable", false}, {"reason", acquired.unusable_reason}});
    return;
  }
  json fetch = {{"url", result.url},
                {"usable", true},
                {"acquisition", acquired.doc->acquisition == Acquisition::FetchedPage ? "FetchedPage" : "SnippetFallback"},
                {"chars", utf8_length(acquired.doc->body)}};
  if (!acquired.fallback_reason.empty()) fetch["reason"] = acquired.fallback_reason;
  state.trace.emit(EventKind::Fetch, std::move(fetch));
  process_document(*acquired.doc, state);
}

void Pipeline::process_document(const Document& doc, PipelineState& state) const {
  ++state.step;
  auto ctx = context_of(state);
  if (!state.ablations.remove_self_contained && !agents_.self_contained_check(ctx, state.evidence, doc)) {
    scenario(state, doc, "d", "loop");
    state.deferred.push_back(doc);
    state.trace.emit(EventKind::Deferred, {{"url", doc.meta.url}, {"position", state.deferred.size()}});
    return;
  }
  read_comprehensible(doc, state, ctx, "loop");
}

void Pipeline::read_comprehensible(const Document& doc, PipelineState& state, const AgentContext& ctx,
                                   std::string_view phase) const {
  auto judgment = agents_.det_helpful(ctx, state.evidence, doc);
  if (!judgment.helpful) {
    scenario(state, doc, "c", phase);
    return;
  }
  auto added = evidence_add(state.evidence,
                            EvidenceItem{judgment.note, doc.meta.url, doc.meta.title, state.step});
  if (added.duplicate) {
    scenario(state, doc, "c", phase, "duplicate_source");
    return;
  }
  state.evidence = std::move(added.set);
  state.trace.emit(EventKind::EvidenceAdded, {{"url", doc.meta.url},
                                              {"note", judgment.note},
                                              {"step", state.step},
                                              {"size", state.evidence.size()}});
  if (agents_.sufficient_evidence(ctx, state.evidence)) {
    state.sufficient = true;
    scenario(state, doc, "a", phase);
  } else {
    scenario(state, doc, "b", phase);
  }
}

void Pipeline::drain_deferred(PipelineState& state) const {
  auto deferred = std::move(state.deferred);
  state.deferred.clear();
  for (std::size_t i = 0; i < deferred.size() && !state.sufficient; ++i) {
    const auto& doc = deferred[i];
    ++state.step;
    auto ctx = context_of(state);
    if (!state.ablations.remove_self_contained && !agents_.self_contained_check(ctx, state.evidence, doc)) {
      scenario(state, doc, "d", "drain", "dropped");
      continue;
    }
    read_comprehensible(doc, state, ctx, "drain");
  }
}

VerdictReport Pipeline::finish(PipelineState& state, TerminatedBy by) const {
  auto verdict = agents_.classify(context_of(state), state.evidence);
  state.trace.emit(EventKind::Verdict, {{"verdict", to_string(verdict)},
                                        {"terminated_by", to_string(by)},
                                        {"queries_issued", state.ledger.queries_issued()},
                                        {"evidence_items", state.evidence.size()}});
  return VerdictReport{verdict, state.evidence, std::move(state.trace), by};
}

VerdictReport Pipeline::verify(const Claim& claim, const BudgetConfig& config, Ablations ablations) const {
  auto state = initial_state(claim, config, ablations);
  const int k = config.max_results_per_query;

  for (auto& q : agents_.initial_query_gen(context_of(state))) state.pending_queries.push_back(std::move(q));

  bool exhausted = false;
  while (!exhausted) {
    while (!state.pending_queries.empty()) {
      auto query = std::move(state.pending_queries.front());
      state.pending_queries.pop_front();

      auto consumed = budget_consume(state.ledger);
      if (consumed.status == ConsumeStatus::Exhausted) {
        state.trace.emit(EventKind::ScenarioDecision,
                         {{"decision", "budget_exhausted"}, {"unissued_query", query.text}});
        exhausted = true;
        break;
      }
      state.ledger = consumed.ledger;
      state.issued_query_texts.push_back(query.text);

      std::vector<SearchResultMeta> results;
      json call = {{"query", query.text},
                   {"origin", query.origin == QueryOrigin::Initial ? "Initial" : "Additional"},
                   {"k", k},
                   {"issued", state.ledger.queries_issued()}};
      try {
        auto response = search_.search(query, k);
        results = std::move(response.results);
        call["returned"] = results.size();
        if (!response.dropped_urls.empty()) call["dropped"] = response.dropped_urls;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Transport && e.code() != ErrorCode::Quota) throw;
        call["returned"] = 0;
        call["error"] = {{"code", to_string(e.code())}, {"message", e.what()}};
      }
      state.trace.emit(EventKind::SearchCall, std::move(call));

      if (!state.ablations.remove_search_rank && results.size() > 1)
        results = agents_.search_rank(context_of(state), query, std::move(results));

      // Hits already opened in this run are not read again.
      std::vector<std::future<Acquired>> prefetched(results.size());
      if (options_.parallel_fetch) {
        std::set<std::string> queued;
        for (std::size_t i = 0; i < results.size(); ++i) {
          auto key = url_dedupe_key(results[i].url);
          if (state.read_urls.count(key) || !queued.insert(key).second) continue;
          prefetched[i] = std::async(std::launch::async, [this, &r = results[i]] { return acquire(r); });
        }
      }
      for (std::size_t i = 0; i < results.size(); ++i) {
        if (prefetched[i].valid() && !state.read_urls.count(url_dedupe_key(results[i].url)))
          process_acquired(results[i], prefetched[i].get(), state);
        else
          process_result(results[i], state);
        if (state.sufficient) return finish(state, TerminatedBy::SufficientEvidence);
      }
    }
    if (exhausted || state.ledger.remaining() <= 0) break;

    auto more = agents_.additional_query_gen(context_of(state), state.evidence, state.issued_query_texts,
                                             state.ledger.remaining());
    if (more.empty()) break;
    for (auto& q : more) state.pending_queries.push_back(std::move(q));
  }

  drain_deferred(state);
  if (state.sufficient) return finish(state, TerminatedBy::SufficientEvidence);
  return finish(state, TerminatedBy::BudgetExhausted);
}

}  // namespace emulate
