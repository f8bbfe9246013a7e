#include "emulate/agents.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace emulate {

namespace detail {
// Generated from prompts/*.txt at configure time.
std::string_view builtin_prompt_asset(std::string_view stem);
}  // namespace detail

std::string_view agent_name(AgentKind kind) {
  switch (kind) {
    case AgentKind::InitialQueryGen: return "InitialQueryGen";
    case AgentKind::SearchRank: return "SearchRank";
    case AgentKind::SelfContainedCheck: return "SelfContainedCheck";
    case AgentKind::DetHelpful: return "DetHelpful";
    case AgentKind::SufficientEvidence: return "SufficientEvidence";
    case AgentKind::Classifier: return "Classifier";
    case AgentKind::AdditionalQueryGen: return "AdditionalQueryGen";
  }
  return "Unknown";
}

std::string_view agent_asset_stem(AgentKind kind) {
  switch (kind) {
    case AgentKind::InitialQueryGen: return "initial_query_gen";
    case AgentKind::SearchRank: return "search_rank";
    case AgentKind::SelfContainedCheck: return "self_contained_check";
    case AgentKind::DetHelpful: return "det_helpful";
    case AgentKind::SufficientEvidence: return "sufficient_evidence";
    case AgentKind::Classifier: return "classifier";
    case AgentKind::AdditionalQueryGen: return "additional_query_gen";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Templates

namespace {

bool is_slot_char(char c) { return std::islower(static_cast<unsigned char>(c)) || c == '_'; }

template <typename OnSlot, typename OnText>
void scan_template(std::string_view tmpl, OnSlot on_slot, OnText on_text) {
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      std::size_t j = i + 1;
      while (j < tmpl.size() && is_slot_char(tmpl[j])) ++j;
      if (j > i + 1 && j < tmpl.size() && tmpl[j] == '}') {
        on_slot(tmpl.substr(i + 1, j - i - 1));
        i = j + 1;
        continue;
      }
    }
    on_text(tmpl[i]);
    ++i;
  }
}

// Slots each agent's user template may reference.
SlotValues sample_slots(AgentKind kind) {
  SlotValues s{{"claim", "c"}, {"max_queries", "1"}};
  switch (kind) {
    case AgentKind::SearchRank:
      s["query"] = "q";
      s["results"] = "r";
      break;
    case AgentKind::SelfContainedCheck:
    case AgentKind::DetHelpful:
      s["evidence"] = "e";
      s["document"] = "d";
      break;
    case AgentKind::SufficientEvidence:
    case AgentKind::Classifier:
      s["evidence"] = "e";
      break;
    case AgentKind::AdditionalQueryGen:
      s["evidence"] = "e";
      s["issued_queries"] = "i";
      break;
    case AgentKind::InitialQueryGen:
      break;
  }
  return s;
}

}  // namespace

std::string render_template(std::string_view tmpl, const SlotValues& slots) {
  std::string out;
  out.reserve(tmpl.size());
  scan_template(
      tmpl,
      [&](std::string_view name) {
        auto it = slots.find(std::string(name));
        if (it == slots.end())
          throw Error(ErrorCode::InvalidArgument, "prompt slot {" + std::string(name) + "} has no value");
        out += it->second;
      },
      [&](char c) { out += c; });
  return out;
}

std::vector<std::string> template_slots(std::string_view tmpl) {
  std::vector<std::string> names;
  scan_template(
      tmpl, [&](std::string_view name) { names.emplace_back(name); }, [](char) {});
  return names;
}

AgentPrompt parse_prompt_asset(std::string_view name, std::string_view text) {
  AgentPrompt prompt;
  prompt.agent_name = std::string(name);
  std::string* section = nullptr;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    auto header = trim(line);
    if (header == "[system]") {
      section = &prompt.system_text;
    } else if (header == "[user]") {
      section = &prompt.user_template;
    } else if (header == "[retry]") {
      section = &prompt.retry_text;
    } else if (section) {
      *section += line;
      *section += '\n';
    } else if (!header.empty()) {
      throw Error(ErrorCode::Config, "prompt asset for " + std::string(name) + " has text before the first section");
    }
  }
  prompt.system_text = trim(prompt.system_text);
  prompt.user_template = trim(prompt.user_template);
  prompt.retry_text = trim(prompt.retry_text);
  if (prompt.system_text.empty() || prompt.user_template.empty())
    throw Error(ErrorCode::Config, "prompt asset for " + std::string(name) + " needs [system] and [user] sections");
  return prompt;
}

void PromptSet::set(AgentKind kind, AgentPrompt prompt) {
  try {
    render_template(prompt.user_template, sample_slots(kind));
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, "prompt for " + std::string(agent_name(kind)) + ": " + e.what());
  }
  if (kind == AgentKind::Classifier && prompt.retry_text.empty())
    throw Error(ErrorCode::Config, "classifier prompt needs a [retry] section");
  prompts_[kind] = std::move(prompt);
}

PromptSet PromptSet::builtin() {
  PromptSet set;
  for (auto kind : kAllAgents)
    set.set(kind, parse_prompt_asset(agent_name(kind), detail::builtin_prompt_asset(agent_asset_stem(kind))));
  return set;
}

PromptSet PromptSet::with_overrides(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw Error(ErrorCode::Config, "prompt directory does not exist: " + dir.string());
  PromptSet set = builtin();
  for (auto kind : kAllAgents) {
    auto path = dir / (std::string(agent_asset_stem(kind)) + ".txt");
    std::ifstream in(path, std::ios::binary);
    if (!in) continue;
    std::ostringstream text;
    text << in.rdbuf();
    set.set(kind, parse_prompt_asset(agent_name(kind), text.str()));
  }
  return set;
}

// ---------------------------------------------------------------------------
// Parsers

namespace {

std::vector<std::string> leading_tokens(std::string_view reply, std::size_t limit) {
  std::vector<std::string> tokens;
  std::istringstream in{std::string(reply)};
  std::string raw;
  while (tokens.size() < limit && in >> raw) {
    std::size_t b = 0, e = raw.size();
    while (b < e && !std::isalnum(static_cast<unsigned char>(raw[b]))) ++b;
    while (e > b && !std::isalnum(static_cast<unsigned char>(raw[e - 1]))) --e;
    tokens.push_back(to_lower_ascii(std::string_view(raw).substr(b, e - b)));
  }
  return tokens;
}

std::string strip_list_item(std::string_view line) {
  std::string s = trim(line);
  // Markdown emphasis around the whole item.
  while (s.size() >= 4 && s.rfind("**", 0) == 0 && s.substr(s.size() - 2) == "**") s = trim(s.substr(2, s.size() - 4));
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'') ||
                        (s.front() == '`' && s.back() == '`')))
    s = trim(s.substr(1, s.size() - 2));
  return s;
}

std::string query_key(std::string_view text) { return to_lower_ascii(trim(text)); }

}  // namespace

std::vector<std::string> parse_query_list(std::string_view reply) {
  std::vector<std::string> out;
  auto trimmed = trim(reply);
  if (!trimmed.empty() && trimmed.front() == '[') {
    json parsed = json::parse(trimmed, nullptr, false);
    if (!parsed.is_discarded() && parsed.is_array()) {
      for (const auto& item : parsed) {
        if (item.is_string() && !trim(item.get<std::string>()).empty()) out.push_back(trim(item.get<std::string>()));
      }
      if (!out.empty()) return out;
    }
  }

  std::istringstream in{std::string(reply)};
  std::string line;
  while (std::getline(in, line)) {
    std::string s = trim(line);
    std::size_t i = 0;
    if (!s.empty() && std::isdigit(static_cast<unsigned char>(s[0]))) {
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      if (i >= s.size() || (s[i] != '.' && s[i] != ')')) continue;
      ++i;
    } else if (!s.empty() && (s[0] == '-' || s[0] == '*')) {
      i = 1;
    } else if (s.rfind("\xE2\x80\xA2", 0) == 0) {  // bullet
      i = 3;
    } else {
      continue;
    }
    if (i < s.size() && s[i] != ' ' && s[i] != '\t') continue;
    auto item = strip_list_item(std::string_view(s).substr(i));
    if (!item.empty()) out.push_back(std::move(item));
  }
  return out;
}

std::optional<std::vector<std::size_t>> parse_permutation(std::string_view reply, std::size_t n) {
  std::string_view body = reply;
  auto open = reply.find('[');
  if (open != std::string_view::npos) {
    auto close = reply.find(']', open);
    if (close == std::string_view::npos) return std::nullopt;
    body = reply.substr(open + 1, close - open - 1);
  }
  std::vector<std::size_t> indices;
  std::size_t i = 0;
  while (i < body.size()) {
    if (std::isdigit(static_cast<unsigned char>(body[i]))) {
      std::size_t j = i;
      while (j < body.size() && std::isdigit(static_cast<unsigned char>(body[j]))) ++j;
      if (j - i > 6) return std::nullopt;
      indices.push_back(std::stoul(std::string(body.substr(i, j - i))));
      i = j;
    } else {
      ++i;
    }
  }
  if (indices.size() != n) return std::nullopt;
  std::vector<bool> seen(n, false);
  for (auto& idx : indices) {
    if (idx < 1 || idx > n || seen[idx - 1]) return std::nullopt;
    seen[idx - 1] = true;
    --idx;
  }
  return indices;
}

std::optional<bool> parse_yes_no(std::string_view reply) {
  for (const auto& t : leading_tokens(reply, 10)) {
    if (t == "yes") return true;
    if (t == "no") return false;
  }
  return std::nullopt;
}

std::optional<Verdict> parse_true_false(std::string_view reply) {
  for (const auto& t : leading_tokens(reply, 10)) {
    if (t == "true") return Verdict::True;
    if (t == "false") return Verdict::False;
  }
  return std::nullopt;
}

std::optional<HelpfulnessJudgment> parse_helpfulness(std::string_view reply) {
  std::string text = trim(reply);
  // Leading markdown decoration such as "**" or "#".
  std::size_t start = text.find_first_not_of("*#> \t");
  if (start == std::string::npos) return std::nullopt;
  std::string_view rest = std::string_view(text).substr(start);
  std::string upper = rest.size() > 16 ? std::string(rest.substr(0, 16)) : std::string(rest);
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });

  if (upper.rfind("NOT HELPFUL", 0) == 0 || upper.rfind("NOT_HELPFUL", 0) == 0 || upper.rfind("UNHELPFUL", 0) == 0)
    return HelpfulnessJudgment{false, {}};
  if (upper.rfind("HELPFUL", 0) != 0) return std::nullopt;
  std::string note = trim(rest.substr(7));
  std::size_t skip = note.find_first_not_of("*:-\xE2\x80\x93 \t");
  note = skip == std::string::npos ? std::string{} : trim(std::string_view(note).substr(skip));
  if (note.empty()) return HelpfulnessJudgment{false, {}};
  return HelpfulnessJudgment{true, note};
}

// ---------------------------------------------------------------------------
// Agents

Agents::Agents(std::shared_ptr<ChatBackend> backend, PromptSet prompts, std::size_t evidence_char_budget)
    : backend_(std::move(backend)), prompts_(std::move(prompts)), evidence_char_budget_(evidence_char_budget) {
  if (!backend_) throw Error(ErrorCode::Config, "agents need a chat backend");
}

SlotValues Agents::base_slots(const AgentContext& ctx, const EvidenceSet* evidence) const {
  SlotValues s{{"claim", ctx.claim.text}, {"max_queries", std::to_string(ctx.config.max_search_queries)}};
  if (evidence) s["evidence"] = evidence_render(*evidence, evidence_char_budget_);
  return s;
}

Agents::Exchange Agents::call(const AgentContext& ctx, AgentKind kind, const SlotValues& slots,
                              const std::optional<std::string>& extra_user) const {
  const auto& prompt = prompts_.get(kind);
  ChatRequest req;
  req.model_id = ctx.config.model_id;
  req.temperature = ctx.config.temperature;
  req.messages.push_back({Role::System, prompt.system_text});
  req.messages.push_back({Role::User, render_template(prompt.user_template, slots)});
  if (extra_user) req.messages.push_back({Role::User, *extra_user});
  auto resp = backend_->complete(req);
  return Exchange{std::move(req), std::move(resp.text)};
}

void Agents::log(const AgentContext& ctx, AgentKind kind, const Exchange& ex, std::string_view parse, json output,
                 int attempt) const {
  ctx.trace.emit(EventKind::AgentCall, {{"agent", agent_name(kind)},
                                        {"attempt", attempt},
                                        {"key", replay_key(ex.request).digest},
                                        {"model", ex.request.model_id},
                                        {"temperature", ex.request.temperature},
                                        {"reply", ex.reply},
                                        {"parse", parse},
                                        {"output", std::move(output)}});
}

std::vector<SearchQuery> Agents::initial_query_gen(const AgentContext& ctx) const {
  auto ex = call(ctx, AgentKind::InitialQueryGen, base_slots(ctx, nullptr));
  auto parsed = parse_query_list(ex.reply);
  std::vector<SearchQuery> out;
  std::set<std::string> seen;
  for (auto& text : parsed) {
    if (static_cast<int>(out.size()) == ctx.config.max_search_queries) break;
    if (!seen.insert(query_key(text)).second) continue;
    out.push_back({std::move(text), QueryOrigin::Initial});
  }
  bool fallback = out.empty();
  if (fallback) out.push_back({trim(ctx.claim.text), QueryOrigin::Initial});
  json texts = json::array();
  for (const auto& q : out) texts.push_back(q.text);
  log(ctx, AgentKind::InitialQueryGen, ex, fallback ? "fallback" : "ok", texts);
  return out;
}

std::vector<SearchResultMeta> Agents::search_rank(const AgentContext& ctx, const SearchQuery& query,
                                                  std::vector<SearchResultMeta> results) const {
  if (results.size() <= 1) return results;
  std::string rendered;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (i) rendered += "\n\n";
    rendered += "[" + std::to_string(i + 1) + "] Title: " + results[i].title + "\n    URL: " + results[i].url +
                "\n    Snippet: " + results[i].snippet;
  }
  auto slots = base_slots(ctx, nullptr);
  slots["query"] = query.text;
  slots["results"] = rendered;
  auto ex = call(ctx, AgentKind::SearchRank, slots);
  auto perm = parse_permutation(ex.reply, results.size());
  json order = json::array();
  if (!perm) {
    for (std::size_t i = 0; i < results.size(); ++i) order.push_back(i + 1);
    log(ctx, AgentKind::SearchRank, ex, "fallback", order);
    return results;
  }
  std::vector<SearchResultMeta> ranked;
  ranked.reserve(results.size());
  for (auto idx : *perm) {
    ranked.push_back(std::move(results[idx]));
    order.push_back(idx + 1);
  }
  log(ctx, AgentKind::SearchRank, ex, "ok", order);
  return ranked;
}

namespace {
std::string render_document(const Document& doc) {
  return "Title: " + doc.meta.title + "\nURL: " + doc.meta.url + "\n\n" + doc.body;
}
}  // namespace

bool Agents::self_contained_check(const AgentContext& ctx, const EvidenceSet& evidence, const Document& doc) const {
  auto slots = base_slots(ctx, &evidence);
  slots["document"] = render_document(doc);
  auto ex = call(ctx, AgentKind::SelfContainedCheck, slots);
  auto parsed = parse_yes_no(ex.reply);
  bool result = parsed.value_or(false);
  log(ctx, AgentKind::SelfContainedCheck, ex, parsed ? "ok" : "fallback", result);
  return result;
}

HelpfulnessJudgment Agents::det_helpful(const AgentContext& ctx, const EvidenceSet& evidence,
                                        const Document& doc) const {
  auto slots = base_slots(ctx, &evidence);
  slots["document"] = render_document(doc);
  auto ex = call(ctx, AgentKind::DetHelpful, slots);
  auto parsed = parse_helpfulness(ex.reply);
  auto result = parsed.value_or(HelpfulnessJudgment{});
  log(ctx, AgentKind::DetHelpful, ex, parsed ? "ok" : "fallback",
      {{"helpful", result.helpful}, {"note", result.note}});
  return result;
}

bool Agents::sufficient_evidence(const AgentContext& ctx, const EvidenceSet& evidence) const {
  if (evidence.empty()) return false;
  auto ex = call(ctx, AgentKind::SufficientEvidence, base_slots(ctx, &evidence));
  auto parsed = parse_yes_no(ex.reply);
  bool result = parsed.value_or(false);
  log(ctx, AgentKind::SufficientEvidence, ex, parsed ? "ok" : "fallback", result);
  return result;
}

Verdict Agents::classify(const AgentContext& ctx, const EvidenceSet& evidence) const {
  auto slots = base_slots(ctx, &evidence);
  auto ex = call(ctx, AgentKind::Classifier, slots);
  if (auto v = parse_true_false(ex.reply)) {
    log(ctx, AgentKind::Classifier, ex, "ok", to_string(*v));
    return *v;
  }
  log(ctx, AgentKind::Classifier, ex, "retry", nullptr);
  auto retry = call(ctx, AgentKind::Classifier, slots, prompts_.get(AgentKind::Classifier).retry_text);
  if (auto v = parse_true_false(retry.reply)) {
    log(ctx, AgentKind::Classifier, retry, "ok", to_string(*v), 2);
    return *v;
  }
  log(ctx, AgentKind::Classifier, retry, "forced_default", to_string(Verdict::False), 2);
  return Verdict::False;
}

std::vector<SearchQuery> Agents::additional_query_gen(const AgentContext& ctx, const EvidenceSet& evidence,
                                                      const std::vector<std::string>& issued,
                                                      int remaining_budget) const {
  if (remaining_budget <= 0) return {};
  auto slots = base_slots(ctx, &evidence);
  std::string issued_text;
  for (const auto& q : issued) issued_text += "- " + q + "\n";
  slots["issued_queries"] = issued.empty() ? std::string("(none)") : trim(issued_text);
  slots["max_queries"] = std::to_string(remaining_budget);
  auto ex = call(ctx, AgentKind::AdditionalQueryGen, slots);

  auto parsed = parse_query_list(ex.reply);
  std::set<std::string> seen;
  for (const auto& q : issued) seen.insert(query_key(q));
  std::vector<SearchQuery> out;
  json filtered = json::array();
  for (auto& text : parsed) {
    if (!seen.insert(query_key(text)).second) {
      filtered.push_back(text);
      continue;
    }
    if (static_cast<int>(out.size()) < remaining_budget) out.push_back({std::move(text), QueryOrigin::Additional});
  }
  json texts = json::array();
  for (const auto& q : out) texts.push_back(q.text);
  log(ctx, AgentKind::AdditionalQueryGen, ex, parsed.empty() ? "fallback" : "ok",
      {{"queries", texts}, {"filtered_repeats", filtered}});
  return out;
}

}  // namespace emulate
