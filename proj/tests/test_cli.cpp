#include <doctest.h>

#include "cli_runner.hpp"
#include "stub_web.hpp"

using testkit::run_cli;
using testkit::StubWeb;
using testkit::TempDir;
using json = nlohmann::json;

namespace {

std::vector<std::string> record_flags(const StubWeb& web, const std::filesystem::path& fixtures) {
  return {"--mode", "record", "--fixtures", fixtures.string(), "--llm-base-url", web.url("/v1"),
          "--search-endpoint", web.url("/search"), "--backoff-ms", "0"};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::size_t count_kind(const std::string& jsonl, const std::string& kind) {
  std::istringstream in(jsonl);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line))
    if (!line.empty() && json::parse(line)["kind"] == kind) ++n;
  return n;
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  TempDir dir;
  CHECK(run_cli({"verify", ""}, dir.path()).exit_code == 1);
  CHECK(run_cli({"verify", "   "}, dir.path()).exit_code == 1);
  CHECK(run_cli({}, dir.path()).exit_code == 1);
  CHECK(run_cli({"verify", "x", "--mode", "sideways"}, dir.path()).exit_code == 1);
  CHECK(run_cli({"verify", "x", "--ablate", "rm-everything"}, dir.path()).exit_code == 1);
  CHECK(run_cli({"--help"}, dir.path()).exit_code == 0);
}

TEST_CASE("configuration errors exit 2 with an actionable message") {
  TempDir dir;
  auto r = run_cli({"verify", "Paris is the capital of France"}, dir.path());
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("SERPER_API_KEY") != std::string::npos);
  r = run_cli({"verify", "x", "--mode", "replay", "--fixtures", (dir.path() / "missing").string()}, dir.path());
  CHECK(r.exit_code == 2);
  r = run_cli({"verify", "x", "--mode", "replay"}, dir.path());
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("fixtures") != std::string::npos);
}

TEST_CASE("verify records, then replays from fixtures") {
  TempDir dir;
  auto fixtures = dir.path() / "fx";
  {
    StubWeb web;
    auto r = run_cli(concat({"verify", "Paris is the capital of France"}, record_flags(web, fixtures)), dir.path());
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.rfind("True\n", 0) == 0);
  }
  auto trace = dir.path() / "trace.jsonl";
  auto r = run_cli({"verify", "Paris is the capital of France", "--mode", "replay", "--fixtures", fixtures.string(),
                    "--trace", trace.string()},
                   dir.path());
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.rfind("True\n", 0) == 0);
  CHECK(r.out.find("terminated by: SufficientEvidence") != std::string::npos);
  CHECK(r.out.find("Paris is the capital of France.") != std::string::npos);
  CHECK(count_kind(testkit::slurp(trace), "Verdict") == 1);

  // Environment variables select the mode too.
  r = run_cli({"verify", "Paris is the capital of France", "--json"}, dir.path(),
              {"EMULATE_MODE=replay", "EMULATE_FIXTURES=" + fixtures.string()});
  REQUIRE(r.exit_code == 0);
  CHECK(json::parse(r.out)["verdict"] == "True");

  // An unrecorded claim is a fatal fixture miss.
  CHECK(run_cli({"verify", "Unrecorded claim", "--mode", "replay", "--fixtures", fixtures.string()}, dir.path())
            .exit_code == 2);
}

TEST_CASE("--max-queries 1 issues at most one search") {
  TempDir dir;
  StubWeb web;
  auto trace = dir.path() / "t.jsonl";
  auto flags = record_flags(web, dir.path() / "fx");
  auto r = run_cli(concat({"verify", "Berlin is the capital of France", "--max-queries", "1", "--trace", trace.string()},
                          flags),
                   dir.path());
  REQUIRE(r.exit_code == 0);
  CHECK(count_kind(testkit::slurp(trace), "SearchCall") <= 1);
  CHECK(web.search_requests <= 1);
  CHECK(r.out.rfind("False\n", 0) == 0);
}

TEST_CASE("bench writes predictions and reports; error threshold drives exit 3") {
  TempDir dir;
  auto data = dir.path() / "kbqa.jsonl";
  {
    std::ofstream out(data);
    out << R"({"id": "a", "claim": "Paris is the capital of France", "label": true})" << '\n'
        << R"({"id": "b", "claim": "Berlin is the capital of France", "label": "false"})" << '\n';
  }
  auto fixtures = dir.path() / "fx";
  auto out_dir = dir.path() / "out";
  {
    StubWeb web;
    auto r = run_cli(concat({"bench", "factool-kbqa", data.string(), "--out", out_dir.string(), "--trace", "--ablate",
                             "rm-sr"},
                            record_flags(web, fixtures)),
                     dir.path());
    REQUIRE(r.exit_code == 0);
  }
  CHECK(std::filesystem::exists(out_dir / "predictions.jsonl"));
  CHECK(std::filesystem::exists(out_dir / "report.txt"));
  auto report = json::parse(testkit::slurp(out_dir / "report.json"));
  CHECK(report["method"] == "EMULATE RM-SR");
  CHECK(report["metrics"]["macro_f1"] == 1.0);
  for (auto id : {"a", "b"}) {
    auto t = testkit::slurp(out_dir / "traces" / (std::string(id) + ".jsonl"));
    CHECK(count_kind(t, "Verdict") == 1);
    CHECK(t.find("\"SearchRank\"") == std::string::npos);
  }

  // Add a claim with no fixtures: one of three errored.
  {
    std::ofstream out(data, std::ios::app);
    out << R"({"id": "c", "claim": "Never recorded", "label": true})" << '\n';
  }
  std::vector<std::string> replay{"bench", "factool-kbqa", data.string(), "--out", out_dir.string(), "--ablate",
                                  "rm-sr", "--mode", "replay", "--fixtures", fixtures.string()};
  auto r = run_cli(replay, dir.path());
  CHECK(r.exit_code == 3);
  CHECK(r.err.find("1 of 3") != std::string::npos);
  r = run_cli(concat(replay, {"--max-error-rate", "0.5"}), dir.path());
  CHECK(r.exit_code == 0);
  auto preds = testkit::slurp(out_dir / "predictions.jsonl");
  CHECK(preds.find("\"error\"") != std::string::npos);
  CHECK(json::parse(testkit::slurp(out_dir / "report.json"))["errored"] == 1);

  // --limit keeps the first claims only.
  r = run_cli(concat(replay, {"--limit", "2"}), dir.path());
  CHECK(r.exit_code == 0);
  CHECK(json::parse(testkit::slurp(out_dir / "report.json"))["claims"] == 2);
}
