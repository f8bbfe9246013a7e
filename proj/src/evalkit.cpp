#include "emulate/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

namespace emulate {

std::string_view to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::FacToolKBQA: return "FacTool-KBQA";
    case DatasetKind::BingCheck: return "BingCheck";
    case DatasetKind::FactcheckBench: return "Factcheck-Bench";
  }
  return "Unknown";
}

std::optional<DatasetKind> parse_dataset_kind(std::string_view text) {
  std::string key;
  for (char c : to_lower_ascii(text)) {
    if (c != '-' && c != '_' && c != ' ') key += c;
  }
  if (key == "factoolkbqa" || key == "kbqa") return DatasetKind::FacToolKBQA;
  if (key == "bingcheck") return DatasetKind::BingCheck;
  if (key == "factcheckbench") return DatasetKind::FactcheckBench;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Loading

namespace {

std::vector<json> read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open dataset file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  std::vector<json> records;
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    json parsed = json::parse(text, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_array())
      throw Error(ErrorCode::Schema, path.string() + ": not a JSON array");
    for (auto& r : parsed) records.push_back(std::move(r));
    return records;
  }
  std::istringstream lines(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json parsed = json::parse(line, nullptr, false);
    if (parsed.is_discarded())
      throw Error(ErrorCode::Schema, path.string() + ":" + std::to_string(lineno) + ": invalid JSON");
    records.push_back(std::move(parsed));
  }
  return records;
}

std::string normalize_label(const json& label) {
  if (label.is_boolean()) return label.get<bool>() ? "true" : "false";
  if (!label.is_string()) return {};
  std::string out;
  for (char c : to_lower_ascii(trim(label.get<std::string>()))) out += (c == '_' || c == '-') ? ' ' : c;
  return out;
}

struct RawRecord {
  std::string id;
  std::string text;
  std::string label;
};

RawRecord read_record(const json& r, std::size_t index, DatasetKind kind, const std::filesystem::path& path) {
  auto where = path.string() + " record " + std::to_string(index);
  if (!r.is_object()) throw Error(ErrorCode::Schema, where + ": not an object");
  auto claim = r.find("claim");
  if (claim == r.end() || !claim->is_string() || trim(claim->get<std::string>()).empty())
    throw Error(ErrorCode::Schema, where + ": missing \"claim\" text");
  auto label = r.find("label");
  if (label == r.end()) throw Error(ErrorCode::Schema, where + ": missing \"label\"");
  RawRecord out;
  out.text = claim->get<std::string>();
  out.label = normalize_label(*label);
  if (auto id = r.find("id"); id != r.end() && (id->is_string() || id->is_number()))
    out.id = id->is_string() ? id->get<std::string>() : id->dump();
  else
    out.id = std::string(to_string(kind)) + "-" + std::to_string(index);
  return out;
}

[[noreturn]] void bad_label(const RawRecord& r, const std::filesystem::path& path) {
  throw Error(ErrorCode::Schema, path.string() + ": unknown label \"" + r.label + "\" for claim " + r.id);
}

}  // namespace

std::vector<std::size_t> seeded_sample(std::size_t n, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  if (count >= n) return idx;
  // Partial Fisher-Yates on raw engine output (distribution objects are not
  // portable across standard libraries).
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<LabeledClaim> load_dataset(DatasetKind kind, const std::filesystem::path& path,
                                       const LoadOptions& options) {
  auto records = read_records(path);
  std::vector<LabeledClaim> trues, falses;
  std::vector<std::size_t> order_true, order_false;  // original positions, to keep file order

  for (std::size_t i = 0; i < records.size(); ++i) {
    auto r = read_record(records[i], i, kind, path);
    std::optional<Verdict> gold;
    switch (kind) {
      case DatasetKind::FacToolKBQA:
        if (r.label == "true") gold = Verdict::True;
        else if (r.label == "false") gold = Verdict::False;
        else bad_label(r, path);
        break;
      case DatasetKind::BingCheck:
        if (r.label == "supported") gold = Verdict::True;
        else if (r.label == "refuted") gold = Verdict::False;
        else if (r.label != "partially supported" && r.label != "not supported") bad_label(r, path);
        break;
      case DatasetKind::FactcheckBench:
        if (r.label == "true") gold = Verdict::True;
        else if (r.label == "false") gold = Verdict::False;
        else if (r.label != "unknown") bad_label(r, path);
        break;
    }
    if (!gold) continue;
    LabeledClaim lc{Claim::make(r.id, r.text, gold), *gold, kind};
    (*gold == Verdict::True ? trues : falses).push_back(std::move(lc));
    (*gold == Verdict::True ? order_true : order_false).push_back(i);
  }

  // Merge the two classes back into file order.
  auto merge = [](std::vector<LabeledClaim>& a, std::vector<std::size_t>& oa, std::vector<LabeledClaim>& b,
                  std::vector<std::size_t>& ob) {
    std::vector<std::pair<std::size_t, LabeledClaim>> all;
    for (std::size_t i = 0; i < a.size(); ++i) all.emplace_back(oa[i], std::move(a[i]));
    for (std::size_t i = 0; i < b.size(); ++i) all.emplace_back(ob[i], std::move(b[i]));
    std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<LabeledClaim> out;
    for (auto& [_, c] : all) out.push_back(std::move(c));
    return out;
  };

  std::vector<LabeledClaim> out;
  if (kind == DatasetKind::BingCheck) {
    auto keep = seeded_sample(trues.size(), options.bingcheck_supported, options.seed);
    std::vector<LabeledClaim> kept;
    std::vector<std::size_t> kept_order;
    for (auto i : keep) {
      kept.push_back(std::move(trues[i]));
      kept_order.push_back(order_true[i]);
    }
    out = merge(kept, kept_order, falses, order_false);
  } else {
    out = merge(trues, order_true, falses, order_false);
    if (kind == DatasetKind::FactcheckBench) {
      auto keep = seeded_sample(out.size(), options.factcheck_sample, options.seed);
      std::vector<LabeledClaim> sampled;
      for (auto i : keep) sampled.push_back(std::move(out[i]));
      out = std::move(sampled);
    }
  }
  if (out.empty()) throw Error(ErrorCode::EmptyDataset, path.string() + ": no usable claims");
  return out;
}

// ---------------------------------------------------------------------------
// Metrics

ConfusionCounts confusion(std::span<const Verdict> preds, std::span<const Verdict> golds) {
  if (preds.size() != golds.size())
    throw Error(ErrorCode::LengthMismatch, "predictions (" + std::to_string(preds.size()) + ") and golds (" +
                                               std::to_string(golds.size()) + ") differ in length");
  if (preds.empty()) throw Error(ErrorCode::InvalidArgument, "confusion needs at least one prediction");
  ConfusionCounts c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    auto& predicted = preds[i] == Verdict::True ? c.true_class : c.false_class;
    auto& actual = golds[i] == Verdict::True ? c.true_class : c.false_class;
    if (preds[i] == golds[i]) {
      ++predicted.tp;
    } else {
      ++predicted.fp;
      ++actual.fn;
    }
  }
  return c;
}

PRF1 prf1(const ClassCounts& c) {
  PRF1 out;
  out.precision = c.tp + c.fp == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  out.recall = c.tp + c.fn == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  double denom = out.precision + out.recall;
  out.f1 = denom == 0.0 ? 0.0 : 2.0 * out.precision * out.recall / denom;
  return out;
}

PRF1 prf1(const ConfusionCounts& counts, Verdict cls) { return prf1(counts.of(cls)); }

double macro_f1(double f1_true, double f1_false) { return (f1_true + f1_false) / 2.0; }

double weighted_f1(double f1_true, double f1_false, std::size_t support_true, std::size_t support_false) {
  auto total = support_true + support_false;
  if (total == 0) return 0.0;
  return (static_cast<double>(support_true) * f1_true + static_cast<double>(support_false) * f1_false) /
         static_cast<double>(total);
}

MetricReport report(const ConfusionCounts& counts) {
  MetricReport r;
  r.true_class = prf1(counts, Verdict::True);
  r.false_class = prf1(counts, Verdict::False);
  r.support_true = counts.true_class.support();
  r.support_false = counts.false_class.support();
  r.macro_f1 = macro_f1(r.true_class.f1, r.false_class.f1);
  r.weighted_f1 = weighted_f1(r.true_class.f1, r.false_class.f1, r.support_true, r.support_false);
  return r;
}

std::string format_metric(double value) {
  // The epsilon keeps values like 0.795 (stored as 0.79499999...) rounding up.
  double rounded = std::floor(value * 100.0 + 0.5 + 1e-9) / 100.0;
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << rounded;
  std::string s = out.str();
  if (s.size() >= 2 && s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
  return s;
}

json MetricReport::to_json() const {
  auto cls = [](const PRF1& m, std::size_t support) {
    return json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", support}};
  };
  return {{"True", cls(true_class, support_true)},
          {"False", cls(false_class, support_false)},
          {"macro_f1", macro_f1},
          {"weighted_f1", weighted_f1}};
}

std::vector<std::string> MetricReport::row_cells() const {
  return {format_metric(true_class.precision),  format_metric(true_class.recall),  format_metric(true_class.f1),
          format_metric(false_class.precision), format_metric(false_class.recall), format_metric(false_class.f1),
          format_metric(macro_f1),              format_metric(weighted_f1)};
}

std::string render_table(const std::vector<TableRow>& rows) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"Dataset", "Method", "True P", "True R", "True F1", "False P", "False R", "False F1", "M-F1", "W-F1"});
  for (const auto& row : rows) {
    std::vector<std::string> line{row.dataset, row.method};
    for (auto& c : row.metrics.row_cells()) line.push_back(std::move(c));
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& line : cells)
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());

  std::ostringstream out;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t i = 0; i < cells[r].size(); ++i) {
      if (i) out << " | ";
      out << std::left << std::setw(static_cast<int>(width[i])) << cells[r][i];
    }
    out << '\n';
    if (r == 0) {
      for (std::size_t i = 0; i < width.size(); ++i) {
        if (i) out << "-+-";
        out << std::string(width[i], '-');
      }
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace emulate
