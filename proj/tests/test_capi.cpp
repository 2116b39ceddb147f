#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "cpt.h"

namespace fs = std::filesystem;

namespace {

struct Ctx {
  cpt_ctx* ptr = cpt_ctx_new();
  ~Ctx() { cpt_ctx_free(ptr); }
  operator cpt_ctx*() { return ptr; }
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_mock_config(const std::string& path, const std::string& profile) {
  std::ofstream out(path);
  out << R"({
    "backends": [{"name": "capi-mock", "kind": "mock", "profile": ")" +
             profile + R"("}],
    "problems": {"additions": 1, "multiplications": 1, "seed": 300},
    "methods": ["baseline", "m1"],
    "d_t_values": [1, 2],
    "record_transcripts": true
  })";
}

}  // namespace

TEST_CASE("context lifecycle and error reporting") {
  Ctx ctx;
  CHECK(std::strcmp(cpt_error_message(ctx), "") == 0);
  CHECK(cpt_gen_problems(ctx, "division", 1, 1, "out.jsonl") == CPT_ERR_INVALID_ARG);
  CHECK(std::strlen(cpt_error_message(ctx)) > 0);
  // A following success clears the message.
  CHECK(cpt_compromising_rate(ctx, 1, 0, nullptr, nullptr) == CPT_OK);
  CHECK(std::strcmp(cpt_error_message(ctx), "") == 0);
  CHECK(cpt_error_message(nullptr) != nullptr);
  CHECK(cpt_gen_problems(nullptr, "addition", 1, 1, "out.jsonl") == CPT_ERR_INVALID_ARG);
}

TEST_CASE("compromising rate through the C boundary") {
  Ctx ctx;
  int64_t num = 0, den = 0;
  REQUIRE(cpt_compromising_rate(ctx, 4, 2, &num, &den) == CPT_OK);
  CHECK(num == 2);
  CHECK(den == 3);
  REQUIRE(cpt_compromising_rate(ctx, 3, 5, &num, &den) == CPT_OK);
  CHECK(num == 2);
  CHECK(den == 1);
  CHECK(cpt_compromising_rate(ctx, 0, 0, &num, &den) == CPT_ERR_INVALID_ARG);
}

TEST_CASE("problem generation emits valid JSONL") {
  Ctx ctx;
  const std::string path = "capi_problems.jsonl";
  REQUIRE(cpt_gen_problems(ctx, "addition", 4, 11, path.c_str()) == CPT_OK);
  std::ifstream in(path);
  int lines = 0;
  std::string line;
  while (std::getline(in, line)) {
    auto rec = nlohmann::json::parse(line);
    CHECK(rec["kind"] == "addition");
    CHECK(rec["operands"].size() == 2);
    CHECK(rec["answer"].get<std::string>().size() >= 15);
    ++lines;
  }
  CHECK(lines == 4);
  CHECK(cpt_gen_problems(ctx, "addition", 0, 1, path.c_str()) == CPT_ERR_INVALID_ARG);
}

TEST_CASE("tampering a trace file end to end") {
  Ctx ctx;
  const std::string trace_path = "capi_trace.txt";
  {
    std::ofstream out(trace_path);
    out << "Summing carefully, the total is 711,025,910,075,981.\n\n"
           "Therefore the final answer is 711,025,910,075,981.\n";
  }
  REQUIRE(cpt_tamper_trace(ctx, trace_path.c_str(), "711025910075981", 2, 9, nullptr,
                           "capi_tampered.txt", "capi_spec.json") == CPT_OK);

  auto spec = nlohmann::json::parse(slurp("capi_spec.json"));
  CHECK(spec["d_t"] == 2);
  CHECK(spec["occurrences_modified"] == 2);
  CHECK(spec["substitutions"].size() == 2);
  std::string tampered_digits = spec["tampered_digits"];
  CHECK(tampered_digits != "711025910075981");

  std::string tampered = slurp("capi_tampered.txt");
  CHECK(tampered.find("711,025,910,075,981") == std::string::npos);

  // Explicit positions.
  REQUIRE(cpt_tamper_trace(ctx, trace_path.c_str(), "711025910075981", 0, 9, "0,3,8",
                           "capi_tampered2.txt", "capi_spec2.json") == CPT_OK);
  auto spec2 = nlohmann::json::parse(slurp("capi_spec2.json"));
  CHECK(spec2["substitutions"][0]["position"] == 0);
  CHECK(spec2["substitutions"][1]["position"] == 3);
  CHECK(spec2["substitutions"][2]["position"] == 8);

  // A trace that never states the answer is an error.
  CHECK(cpt_tamper_trace(ctx, trace_path.c_str(), "123456789", 1, 9, nullptr, "x.txt",
                         "x.json") == CPT_ERR_NO_OCCURRENCE);
}

TEST_CASE("sweep, report, and replay through the C API") {
  Ctx ctx;
  const std::string config = "capi_config.json";
  write_mock_config(config, "compromised");

  const std::string run_dir = "capi_run";
  fs::remove_all(run_dir);
  REQUIRE(cpt_run_sweep(ctx, config.c_str(), run_dir.c_str()) == CPT_OK);
  CHECK(fs::exists(fs::path(run_dir) / "trials.jsonl"));
  CHECK(fs::exists(fs::path(run_dir) / "transcripts.jsonl"));
  CHECK(fs::exists(fs::path(run_dir) / "report" / "rcpt_by_method.csv"));

  std::string table = slurp(fs::path(run_dir) / "report" / "rcpt_by_method.csv");
  CHECK(table.find("capi-mock,1.00,1.00,1.00") != std::string::npos);

  // Re-render from the persisted records.
  fs::remove_all(fs::path(run_dir) / "report");
  REQUIRE(cpt_render_report(ctx, run_dir.c_str()) == CPT_OK);
  CHECK(slurp(fs::path(run_dir) / "report" / "rcpt_by_method.csv") == table);

  // Replay the recorded transcripts into a fresh run.
  const std::string replay_dir = "capi_replay";
  fs::remove_all(replay_dir);
  const std::string transcripts = (fs::path(run_dir) / "transcripts.jsonl").string();
  REQUIRE(cpt_replay(ctx, config.c_str(), transcripts.c_str(), replay_dir.c_str()) == CPT_OK);
  CHECK(slurp(fs::path(replay_dir) / "report" / "rcpt_by_method.csv") == table);
}

TEST_CASE("probe through the C API") {
  Ctx ctx;
  const std::string config = "capi_probe_config.json";
  {
    std::ofstream out(config);
    out << R"({
      "backends": [{"name": "probe-mock", "kind": "mock",
                    "profile": "stopper-on-self-trace"}],
      "problems": {"additions": 1, "seed": 400}
    })";
  }
  const std::string run_dir = "capi_probe_run";
  fs::remove_all(run_dir);
  double frequency = -1.0;
  REQUIRE(cpt_probe_stop(ctx, config.c_str(), run_dir.c_str(), "probe-mock", "add-400", 5,
                         &frequency) == CPT_OK);
  CHECK(frequency == doctest::Approx(1.0));
  CHECK(fs::exists(fs::path(run_dir) / "probe.jsonl"));
}

TEST_CASE("config errors map to CPT_ERR_CONFIG") {
  Ctx ctx;
  CHECK(cpt_run_sweep(ctx, "no/such/config.json", "unused_dir") == CPT_ERR_CONFIG);
  CHECK(cpt_acquire_traces(ctx, "no/such/config.json", "unused_dir") == CPT_ERR_CONFIG);
}
