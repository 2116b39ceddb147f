#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "cpt/metrics.hpp"
#include "cpt/models.hpp"
#include "cpt/problems.hpp"
#include "cpt/prompts.hpp"

namespace cpt {

enum class StructuralMod { None, DeleteR, DeleteV, Insertion };

const char* structural_mod_name(StructuralMod m);
StructuralMod structural_mod_from_name(const std::string& name);

struct RunConfig {
  std::vector<BackendConfig> backends;

  int addition_count = 0;
  int multiplication_count = 0;
  std::uint64_t problem_seed = 1;
  std::vector<std::string> word_problem_labels;
  std::string fixture_path;

  std::vector<PromptMethod> methods{PromptMethod::Baseline};
  std::vector<std::size_t> d_t_values{1};
  std::vector<StructuralMod> structural_mods{StructuralMod::None};

  std::string trace_source;  // backend name; defaults to the first backend
  std::string templates_path;
  std::string filler_path;
  std::uint64_t tamper_seed = 1;

  bool record_transcripts = false;
  std::string record_path;  // default: <run_dir>/transcripts.jsonl
  int worker_threads = 4;

  static RunConfig load(const std::string& path);
};

/// Trial status; only "scored" rows enter the aggregates, the rest show
/// up in the exclusion table.
enum class TrialStatus {
  Scored,
  ThinkingStopped,
  Ineligible,
  Unparseable,
  Errored,
  PrefixUnsupported,
};

const char* trial_status_name(TrialStatus s);

struct TrialRecord {
  std::string trial_id;
  std::size_t ordinal = 0;
  std::string backend;
  std::string problem_id;
  ProblemKind kind = ProblemKind::Addition;
  PromptMethod method = PromptMethod::Baseline;
  std::size_t d_t = 0;
  StructuralMod structural_mod = StructuralMod::None;

  std::vector<std::size_t> tamper_positions;
  std::string tampered_digits;
  std::string correct_digits;
  std::string prompt_key;

  bool eligibility_pass = false;
  std::string eligibility_digits;
  std::string extracted_digits;

  TrialStatus status = TrialStatus::Errored;
  OutcomeClass outcome = OutcomeClass::Ineligible;
  std::size_t d_cpt = 0;
  std::int64_t r_cpt_num = 0;
  std::int64_t r_cpt_den = 1;

  std::int64_t t_init_ms = 0;
  std::int64_t t_cpt_ms = -1;  // -1: not observed
  std::string error;
  std::string started_at;
  std::string finished_at;
};

struct ProbeRecord {
  std::string backend;
  std::string problem_id;
  int repeats = 0;
  int stopped = 0;
  double frequency = 0.0;
};

/// Orchestrates the sweep: problem construction, trace acquisition and
/// caching, eligibility checks, tampering, prompting, scoring, and
/// append-only persistence under a run directory.
class Harness {
 public:
  Harness(RunConfig config, std::string run_dir);
  ~Harness();

  const std::vector<Problem>& problems() const { return problems_; }

  /// Acquires and caches the clean-problem trace rt0 for every problem,
  /// at most once per (trace_source, problem).
  void acquire_traces();

  /// Full sweep over backends x problems x methods x d_t x structural
  /// mods. Appends records to <run_dir>/trials.jsonl and returns them.
  std::vector<TrialRecord> run();

  /// Resubmits a backend's own clean-problem reasoning as the next user
  /// message, n times, and reports the empty-content frequency.
  ProbeRecord probe_stop(const std::string& backend_name, const std::string& problem_id,
                        int repeats);

  static void render_report(const std::vector<TrialRecord>& records,
                            const std::string& out_dir);

  static std::vector<TrialRecord> load_records(const std::string& run_dir);

 private:
  struct Eligibility {
    bool pass = false;
    std::string digits;
    std::int64_t latency_ms = 0;
  };

  Backend& backend(const std::string& name);
  std::string trace_for(const Problem& problem);
  Eligibility check_eligibility(const std::string& backend_name, const Problem& problem);
  TrialRecord run_trial(std::size_t ordinal, const std::string& backend_name,
                        const Problem& problem, PromptMethod method, std::size_t d_t,
                        StructuralMod mod);
  void append_records(const std::vector<TrialRecord>& records);

  RunConfig config_;
  std::string run_dir_;
  PromptTemplates templates_;
  std::string filler_;
  std::vector<Problem> problems_;
  std::map<std::string, std::unique_ptr<Backend>> backends_;
  std::vector<std::string> backend_order_;
  std::map<std::string, std::string> trace_cache_;
  std::map<std::string, Eligibility> eligibility_cache_;
  std::mutex mutex_;
};

}  // namespace cpt
