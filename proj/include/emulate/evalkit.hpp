#pragma once

// Benchmark datasets, confusion tallies and the per-class / macro / weighted
// metric report.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emulate/core.hpp"

namespace emulate {

enum class DatasetKind { FacToolKBQA, BingCheck, FactcheckBench };
std::string_view to_string(DatasetKind kind);
// Accepts "factool-kbqa", "bingcheck", "factcheck-bench" (case-insensitive,
// '-' / '_' interchangeable).
std::optional<DatasetKind> parse_dataset_kind(std::string_view text);

struct LabeledClaim {
  Claim claim;
  Verdict gold = Verdict::True;
  DatasetKind dataset = DatasetKind::FacToolKBQA;
};

struct LoadOptions {
  std::uint64_t seed = 2025;
  // BingCheck: supported examples kept after sampling.
  std::size_t bingcheck_supported = 160;
  // Factcheck-Bench: claims kept after dropping Unknown.
  std::size_t factcheck_sample = 631;
};

// Input is a JSON array or JSON Lines of objects with "claim" (text), "label"
// and optional "id". Label vocabularies:
//   FacTool-KBQA     true/false (boolean or string)
//   BingCheck        supported | refuted | partially supported | not supported
//   Factcheck-Bench  true | false | unknown (boolean or string)
// Throws Schema, EmptyDataset or Io.
std::vector<LabeledClaim> load_dataset(DatasetKind kind, const std::filesystem::path& path,
                                       const LoadOptions& options = {});

// Deterministic choice of `count` indices out of [0, n), returned ascending.
std::vector<std::size_t> seeded_sample(std::size_t n, std::size_t count, std::uint64_t seed);

struct ClassCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t support() const noexcept { return tp + fn; }
  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

struct ConfusionCounts {
  ClassCounts true_class;
  ClassCounts false_class;

  const ClassCounts& of(Verdict v) const noexcept { return v == Verdict::True ? true_class : false_class; }
  std::size_t total() const noexcept { return true_class.support() + false_class.support(); }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// Throws LengthMismatch for unequal lengths, InvalidArgument for empty input.
ConfusionCounts confusion(std::span<const Verdict> preds, std::span<const Verdict> golds);

struct PRF1 {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

// Zero denominators yield 0.
PRF1 prf1(const ClassCounts& counts);
PRF1 prf1(const ConfusionCounts& counts, Verdict cls);

struct MetricReport {
  PRF1 true_class;
  PRF1 false_class;
  double macro_f1 = 0;
  double weighted_f1 = 0;
  std::size_t support_true = 0;
  std::size_t support_false = 0;

  json to_json() const;
  // P/R/F1 (True), P/R/F1 (False), M-F1, W-F1 as display strings.
  std::vector<std::string> row_cells() const;
};

MetricReport report(const ConfusionCounts& counts);
// Same arithmetic over already known per-class F1 values and supports.
double macro_f1(double f1_true, double f1_false);
double weighted_f1(double f1_true, double f1_false, std::size_t support_true, std::size_t support_false);

// Half-up rounding to two decimals; trailing zeros trimmed to one decimal
// ("0.80" -> "0.8", "1.00" -> "1.0").
std::string format_metric(double value);

// Aligned plain-text table in the layout Dataset | Method | P R F1 | P R F1 | M-F1 | W-F1.
struct TableRow {
  std::string dataset;
  std::string method;
  MetricReport metrics;
};
std::string render_table(const std::vector<TableRow>& rows);

}  // namespace emulate
