#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "cpt/error.hpp"
#include "cpt/harness.hpp"
#include "cpt/rational.hpp"

using namespace cpt;
namespace fs = std::filesystem;

namespace {

int dir_counter = 0;

std::string fresh_dir(const std::string& tag) {
  std::string dir = "harness_test_runs/" + tag + "-" + std::to_string(dir_counter++);
  fs::remove_all(dir);
  return dir;
}

BackendConfig mock_config(const std::string& name, const std::string& profile) {
  BackendConfig c;
  c.name = name;
  c.kind = BackendKind::Mock;
  c.profile = profile;
  return c;
}

RunConfig small_config(const std::string& profile) {
  RunConfig c;
  c.backends = {mock_config("model-a", profile)};
  c.addition_count = 2;
  c.multiplication_count = 1;
  c.problem_seed = 100;
  c.methods = {PromptMethod::Baseline, PromptMethod::Method1};
  c.d_t_values = {1, 3};
  c.trace_source = "model-a";
  c.worker_threads = 2;
  return c;
}

Rational aggregate_scored(const std::vector<TrialRecord>& records) {
  std::vector<Rational> scores;
  for (const auto& r : records) {
    if (r.status == TrialStatus::Scored) scores.push_back(Rational{r.r_cpt_num, r.r_cpt_den});
  }
  return aggregate_rate(scores);
}

}  // namespace

TEST_CASE("run config loads from JSON") {
  const std::string path = "harness_config.json";
  {
    std::ofstream out(path);
    out << R"({
      "backends": [
        {"name": "a", "kind": "mock", "profile": "resistant"},
        {"name": "b", "kind": "mock", "profile": "compromised", "supports_prefix": false,
         "max_inflight": 2}
      ],
      "problems": {"additions": 3, "multiplications": 2, "seed": 7,
                   "word_problems": ["Q1"], "fixture_path": ")" +
               std::string(CPT_ASSETS_DIR) + R"(/word_problems.json"},
      "methods": ["baseline", "m1", "m3"],
      "d_t_values": [1, 2, 6],
      "structural_mods": ["none", "delete-r"],
      "trace_source": "a",
      "tamper_seed": 5,
      "worker_threads": 3
    })";
  }
  RunConfig c = RunConfig::load(path);
  REQUIRE(c.backends.size() == 2);
  CHECK(c.backends[1].supports_prefix == false);
  CHECK(c.backends[1].max_inflight == 2);
  CHECK(c.addition_count == 3);
  CHECK(c.multiplication_count == 2);
  CHECK(c.problem_seed == 7);
  CHECK(c.word_problem_labels == std::vector<std::string>{"Q1"});
  CHECK(c.methods == std::vector<PromptMethod>{PromptMethod::Baseline, PromptMethod::Method1,
                                               PromptMethod::Method3});
  CHECK(c.d_t_values == std::vector<std::size_t>{1, 2, 6});
  CHECK(c.structural_mods ==
        std::vector<StructuralMod>{StructuralMod::None, StructuralMod::DeleteR});
  CHECK(c.tamper_seed == 5);
  CHECK(c.worker_threads == 3);
}

TEST_CASE("run config rejects bad values") {
  auto write_and_load = [](const std::string& body) {
    const std::string path = "harness_bad_config.json";
    std::ofstream(path) << body;
    return RunConfig::load(path);
  };
  CHECK_THROWS_AS(RunConfig::load("no/such/config.json"), Error);
  CHECK_THROWS_AS(write_and_load(R"({"backends": [], "problems": {"additions": 1}})"), Error);
  CHECK_THROWS_AS(write_and_load(R"({"backends": [{"name": "a"}],
      "problems": {"additions": 1}, "d_t_values": [7]})"),
                  Error);
}

TEST_CASE("compromised sweep: every trial scored, rate pegged at full compromise") {
  Harness harness(small_config("compromised"), fresh_dir("compromised"));
  auto records = harness.run();
  // 3 problems x 2 methods x 2 d_t values.
  REQUIRE(records.size() == 12);
  for (const auto& r : records) {
    CHECK(r.status == TrialStatus::Scored);
    CHECK(r.outcome == OutcomeClass::Compromised);
    CHECK(r.d_cpt == r.d_t);
    CHECK(r.eligibility_pass);
    CHECK(r.tampered_digits != r.correct_digits);
    CHECK(std::set<std::size_t>(r.tamper_positions.begin(), r.tamper_positions.end()).size() ==
          r.d_t);
  }
  CHECK(aggregate_scored(records) == Rational(1, 1));
}

TEST_CASE("resistant sweep aggregates to the floor rate") {
  Harness harness(small_config("resistant"), fresh_dir("resistant"));
  auto records = harness.run();
  for (const auto& r : records) {
    CHECK(r.status == TrialStatus::Scored);
    CHECK(r.outcome == OutcomeClass::Resisted);
  }
  CHECK(aggregate_scored(records) == Rational(1, 2));
}

TEST_CASE("sweep persists trials, traces, and report files") {
  std::string dir = fresh_dir("artifacts");
  Harness harness(small_config("compromised"), dir);
  auto records = harness.run();

  CHECK(fs::exists(fs::path(dir) / "trials.jsonl"));
  for (const auto& p : harness.problems()) {
    CHECK(fs::exists(fs::path(dir) / "traces" / (p.id + ".txt")));
  }
  for (const char* name : {"rcpt_by_method.csv", "rcpt_by_dt.csv", "rcpt_by_kind.csv",
                           "rcpt_by_structmod.csv", "timing.csv", "exclusions.csv",
                           "summary.txt"}) {
    CHECK(fs::exists(fs::path(dir) / "report" / name));
  }

  // Records survive the JSONL round trip.
  auto loaded = Harness::load_records(dir);
  REQUIRE(loaded.size() == records.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded[i].trial_id == records[i].trial_id);
    CHECK(loaded[i].status == records[i].status);
    CHECK(loaded[i].r_cpt_num == records[i].r_cpt_num);
    CHECK(loaded[i].r_cpt_den == records[i].r_cpt_den);
    CHECK(loaded[i].extracted_digits == records[i].extracted_digits);
  }
}

TEST_CASE("ineligible backends are excluded, not scored") {
  Harness harness(small_config("ineligible"), fresh_dir("ineligible"));
  auto records = harness.run();
  for (const auto& r : records) {
    CHECK(r.status == TrialStatus::Ineligible);
    CHECK_FALSE(r.eligibility_pass);
  }
  CHECK_THROWS_AS(aggregate_scored(records), Error);
}

TEST_CASE("thinking-stopped trials are excluded from the aggregate") {
  std::string dir = fresh_dir("stopper");
  Harness harness(small_config("stopper"), dir);
  auto records = harness.run();
  for (const auto& r : records) {
    CHECK(r.status == TrialStatus::ThinkingStopped);
    CHECK(r.outcome == OutcomeClass::ThinkingStopped);
  }
  std::ifstream in(fs::path(dir) / "report" / "exclusions.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(row == "model-a,0," + std::to_string(records.size()) + ",0,0,0");
}

TEST_CASE("method 3 on a prefixless backend is marked, not attempted") {
  RunConfig c = small_config("resistant");
  c.backends[0].supports_prefix = false;
  c.methods = {PromptMethod::Method2, PromptMethod::Method3};
  std::string dir = fresh_dir("noprefix");
  Harness harness(c, dir);
  auto records = harness.run();
  int unsupported = 0;
  for (const auto& r : records) {
    if (r.method == PromptMethod::Method3) {
      CHECK(r.status == TrialStatus::PrefixUnsupported);
      ++unsupported;
    } else {
      CHECK(r.status == TrialStatus::Scored);
    }
  }
  CHECK(unsupported == 6);

  // The method table renders "-" for the unsupported column.
  std::ifstream in(fs::path(dir) / "report" / "rcpt_by_method.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "model,m2,m3,average");
  CHECK(row == "model-a,0.50,-,0.50");
}

TEST_CASE("word problems run at a single tampered digit") {
  RunConfig c;
  c.backends = {mock_config("model-a", "compromised")};
  c.word_problem_labels = {"Q1", "Q5"};
  c.fixture_path = std::string(CPT_ASSETS_DIR) + "/word_problems.json";
  c.methods = {PromptMethod::Baseline};
  c.d_t_values = {1, 2, 3};
  Harness harness(c, fresh_dir("word"));
  auto records = harness.run();
  REQUIRE(records.size() == 2);  // d_t collapses to {1} for word problems
  for (const auto& r : records) {
    CHECK(r.kind == ProblemKind::WordProblem);
    CHECK(r.d_t == 1);
    CHECK(r.status == TrialStatus::Scored);
  }
}

TEST_CASE("tamper seeds are deterministic per trial") {
  RunConfig c = small_config("compromised");
  auto records_a = Harness(c, fresh_dir("seed-a")).run();
  auto records_b = Harness(c, fresh_dir("seed-b")).run();
  REQUIRE(records_a.size() == records_b.size());
  for (std::size_t i = 0; i < records_a.size(); ++i) {
    CHECK(records_a[i].trial_id == records_b[i].trial_id);
    CHECK(records_a[i].tamper_positions == records_b[i].tamper_positions);
    CHECK(records_a[i].tampered_digits == records_b[i].tampered_digits);
  }
}

TEST_CASE("structural mods are swept and reported") {
  RunConfig c = small_config("compromised");
  c.methods = {PromptMethod::Method1};
  c.d_t_values = {2};
  c.structural_mods = {StructuralMod::None, StructuralMod::DeleteR, StructuralMod::DeleteV,
                       StructuralMod::Insertion};
  std::string dir = fresh_dir("mods");
  Harness harness(c, dir);
  auto records = harness.run();
  REQUIRE(records.size() == 12);
  for (const auto& r : records) CHECK(r.status == TrialStatus::Scored);

  std::ifstream in(fs::path(dir) / "report" / "rcpt_by_structmod.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "model,structural_mod,r_cpt");
  std::set<std::string> rows;
  while (std::getline(in, line)) rows.insert(line);
  CHECK(rows == std::set<std::string>{"model-a,none,1.00", "model-a,delete-r,1.00",
                                      "model-a,delete-v,1.00", "model-a,insertion,1.00"});
}

TEST_CASE("probe measures the stop frequency on resubmitted reasoning") {
  RunConfig c;
  c.backends = {mock_config("self-stopper", "stopper-on-self-trace"),
                mock_config("steady", "resistant")};
  c.addition_count = 1;
  c.problem_seed = 50;
  c.trace_source = "steady";
  Harness harness(c, fresh_dir("probe"));
  const std::string problem_id = harness.problems().front().id;

  ProbeRecord stopping = harness.probe_stop("self-stopper", problem_id, 20);
  CHECK(stopping.repeats == 20);
  CHECK(stopping.stopped == 20);
  CHECK(stopping.frequency == doctest::Approx(1.0));

  ProbeRecord steady = harness.probe_stop("steady", problem_id, 20);
  CHECK(steady.stopped == 0);
  CHECK(steady.frequency == doctest::Approx(0.0));

  CHECK_THROWS_AS(harness.probe_stop("steady", "no-such-problem", 5), Error);
}
