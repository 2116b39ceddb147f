// Command-line front end; all functionality goes through the C API.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cpt.h"

namespace {

int finish(cpt_ctx* ctx, cpt_status status) {
  if (status != CPT_OK) {
    std::fprintf(stderr, "error (%d): %s\n", static_cast<int>(status),
                 cpt_error_message(ctx));
  }
  cpt_ctx_free(ctx);
  return status == CPT_OK ? 0 : 1;
}

// Applies CLI overrides to the run config and writes the effective
// config next to the run outputs.
std::string effective_config(const std::string& config_path, const std::string& run_dir,
                             const std::vector<std::string>& methods,
                             const std::string& backend, int max_inflight,
                             const std::string& model) {
  if (methods.empty() && backend.empty() && max_inflight <= 0 && model.empty()) {
    return config_path;
  }
  std::ifstream in(config_path);
  if (!in) throw CLI::ValidationError("--config", "config file not found: " + config_path);
  nlohmann::json doc;
  in >> doc;
  if (!methods.empty()) doc["methods"] = methods;
  if (!backend.empty()) {
    nlohmann::json kept = nlohmann::json::array();
    for (const auto& b : doc["backends"]) {
      if (b.value("name", "") == backend) kept.push_back(b);
    }
    doc["backends"] = kept;
  }
  for (auto& b : doc["backends"]) {
    if (max_inflight > 0) b["max_inflight"] = max_inflight;
    if (!model.empty()) b["model"] = model;
  }
  std::string path = run_dir + "/effective_config.json";
  std::ofstream out(path);
  out << doc.dump(2) << "\n";
  return path;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CPT evaluation harness: tamper reasoning traces, re-query models, "
               "and measure compromising rates"};
  app.require_subcommand(1);

  std::string config_path;
  std::string run_dir = "runs/latest";
  std::vector<std::string> methods;
  std::string backend_name;
  std::string model;
  int max_inflight = 0;

  auto add_run_opts = [&](CLI::App* cmd, bool with_overrides) {
    cmd->add_option("--config", config_path, "run config (JSON)")->required();
    cmd->add_option("--run-dir", run_dir, "output run directory");
    if (with_overrides) {
      cmd->add_option("--method", methods, "restrict to methods (baseline,m1,m2,m3)");
      cmd->add_option("--backend", backend_name, "restrict to one configured backend");
      cmd->add_option("--model", model, "override model name for all backends");
      cmd->add_option("--max-inflight", max_inflight, "per-backend in-flight request cap");
    }
  };

  // gen
  auto* gen = app.add_subcommand("gen", "emit arithmetic problems as JSONL");
  std::string kind = "addition";
  int count = 10;
  std::uint64_t seed = 1;
  std::string out_path = "problems.jsonl";
  gen->add_option("--kind", kind, "addition|multiplication");
  gen->add_option("--count", count, "number of problems");
  gen->add_option("--seed", seed, "base RNG seed");
  gen->add_option("--out", out_path, "output path");

  // trace
  auto* trace_cmd = app.add_subcommand("trace", "acquire and cache clean-problem traces");
  add_run_opts(trace_cmd, false);

  // tamper
  auto* tamper = app.add_subcommand("tamper", "tamper the ending results of a trace file");
  std::string trace_path, answer, positions, out_trace = "tampered.txt",
                          out_spec = "tamper_spec.json";
  int d_t = 1;
  std::uint64_t tamper_seed = 1;
  tamper->add_option("--trace", trace_path, "input trace file")->required();
  tamper->add_option("--answer", answer, "correct answer digits")->required();
  tamper->add_option("--dt", d_t, "number of digits to tamper (1-6)");
  tamper->add_option("--seed", tamper_seed, "RNG seed");
  tamper->add_option("--positions", positions,
                     "explicit digit positions, comma-separated (0 = most significant)");
  tamper->add_option("--out", out_trace, "tampered trace output path");
  tamper->add_option("--spec-out", out_spec, "tamper spec output path");

  // run
  auto* run = app.add_subcommand("run", "full sweep per the run config");
  add_run_opts(run, true);

  // probe-stop
  auto* probe = app.add_subcommand("probe-stop", "resubmit a backend's own reasoning and "
                                                 "measure empty-content frequency");
  std::string probe_backend, probe_problem;
  int repeats = 20;
  add_run_opts(probe, false);
  probe->add_option("--backend", probe_backend, "backend name")->required();
  probe->add_option("--problem", probe_problem, "problem id")->required();
  probe->add_option("--repeats", repeats, "number of probes");

  // report
  auto* report = app.add_subcommand("report", "re-render report files from trial records");
  report->add_option("--run-dir", run_dir, "run directory")->required();

  // replay
  auto* replay = app.add_subcommand("replay", "re-run a sweep from recorded transcripts");
  std::string transcripts;
  add_run_opts(replay, false);
  replay->add_option("--transcripts", transcripts, "transcript JSONL")->required();

  CLI11_PARSE(app, argc, argv);

  cpt_ctx* ctx = cpt_ctx_new();
  if (gen->parsed()) {
    return finish(ctx, cpt_gen_problems(ctx, kind.c_str(), count, seed, out_path.c_str()));
  }
  if (trace_cmd->parsed()) {
    return finish(ctx, cpt_acquire_traces(ctx, config_path.c_str(), run_dir.c_str()));
  }
  if (tamper->parsed()) {
    return finish(ctx, cpt_tamper_trace(ctx, trace_path.c_str(), answer.c_str(), d_t,
                                        tamper_seed, positions.c_str(), out_trace.c_str(),
                                        out_spec.c_str()));
  }
  if (run->parsed()) {
    std::error_code ec;
    std::filesystem::create_directories(run_dir, ec);
    std::string effective = effective_config(config_path, run_dir, methods, backend_name,
                                             max_inflight, model);
    return finish(ctx, cpt_run_sweep(ctx, effective.c_str(), run_dir.c_str()));
  }
  if (probe->parsed()) {
    double frequency = 0.0;
    cpt_status status = cpt_probe_stop(ctx, config_path.c_str(), run_dir.c_str(),
                                       probe_backend.c_str(), probe_problem.c_str(), repeats,
                                       &frequency);
    if (status == CPT_OK) std::printf("empty-content frequency: %.3f\n", frequency);
    return finish(ctx, status);
  }
  if (report->parsed()) {
    return finish(ctx, cpt_render_report(ctx, run_dir.c_str()));
  }
  if (replay->parsed()) {
    return finish(ctx, cpt_replay(ctx, config_path.c_str(), transcripts.c_str(),
                                  run_dir.c_str()));
  }
  return 0;
}
