#include "cpt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cpt/error.hpp"
#include "cpt/rng.hpp"
#include "cpt/trace.hpp"

namespace fs = std::filesystem;

namespace cpt {

const char* structural_mod_name(StructuralMod m) {
  switch (m) {
    case StructuralMod::None: return "none";
    case StructuralMod::DeleteR: return "delete-r";
    case StructuralMod::DeleteV: return "delete-v";
    case StructuralMod::Insertion: return "insertion";
  }
  return "none";
}

StructuralMod structural_mod_from_name(const std::string& name) {
  if (name == "none") return StructuralMod::None;
  if (name == "delete-r") return StructuralMod::DeleteR;
  if (name == "delete-v") return StructuralMod::DeleteV;
  if (name == "insertion") return StructuralMod::Insertion;
  throw Error(ErrorCode::Config, "unknown structural mod: " + name);
}

const char* trial_status_name(TrialStatus s) {
  switch (s) {
    case TrialStatus::Scored: return "scored";
    case TrialStatus::ThinkingStopped: return "thinking-stopped";
    case TrialStatus::Ineligible: return "ineligible";
    case TrialStatus::Unparseable: return "unparseable";
    case TrialStatus::Errored: return "errored";
    case TrialStatus::PrefixUnsupported: return "prefix-unsupported";
  }
  return "errored";
}

namespace {

TrialStatus trial_status_from_name(const std::string& name) {
  for (TrialStatus s :
       {TrialStatus::Scored, TrialStatus::ThinkingStopped, TrialStatus::Ineligible,
        TrialStatus::Unparseable, TrialStatus::Errored, TrialStatus::PrefixUnsupported}) {
    if (name == trial_status_name(s)) return s;
  }
  throw Error(ErrorCode::Config, "unknown trial status: " + name);
}

OutcomeClass outcome_from_name(const std::string& name) {
  for (OutcomeClass c :
       {OutcomeClass::Resisted, OutcomeClass::Compromised, OutcomeClass::PartiallyCompromised,
        OutcomeClass::Confused, OutcomeClass::ThinkingStopped, OutcomeClass::Ineligible}) {
    if (name == outcome_name(c)) return c;
  }
  throw Error(ErrorCode::Config, "unknown outcome: " + name);
}

const char* kind_name(ProblemKind k) {
  switch (k) {
    case ProblemKind::Addition: return "addition";
    case ProblemKind::Multiplication: return "multiplication";
    case ProblemKind::WordProblem: return "word-problem";
  }
  return "addition";
}

ProblemKind kind_from_name(const std::string& name) {
  if (name == "addition") return ProblemKind::Addition;
  if (name == "multiplication") return ProblemKind::Multiplication;
  if (name == "word-problem") return ProblemKind::WordProblem;
  throw Error(ErrorCode::Config, "unknown problem kind: " + name);
}

std::string iso_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

nlohmann::json record_to_json(const TrialRecord& r) {
  return nlohmann::json{
      {"trial_id", r.trial_id},
      {"ordinal", r.ordinal},
      {"backend", r.backend},
      {"problem_id", r.problem_id},
      {"kind", kind_name(r.kind)},
      {"method", method_name(r.method)},
      {"d_t", r.d_t},
      {"structural_mod", structural_mod_name(r.structural_mod)},
      {"tamper_positions", r.tamper_positions},
      {"tampered_digits", r.tampered_digits},
      {"correct_digits", r.correct_digits},
      {"prompt_key", r.prompt_key},
      {"eligibility_pass", r.eligibility_pass},
      {"eligibility_digits", r.eligibility_digits},
      {"extracted_digits", r.extracted_digits},
      {"status", trial_status_name(r.status)},
      {"outcome", outcome_name(r.outcome)},
      {"d_cpt", r.d_cpt},
      {"r_cpt_num", r.r_cpt_num},
      {"r_cpt_den", r.r_cpt_den},
      {"t_init_ms", r.t_init_ms},
      {"t_cpt_ms", r.t_cpt_ms},
      {"error", r.error},
      {"started_at", r.started_at},
      {"finished_at", r.finished_at},
  };
}

TrialRecord record_from_json(const nlohmann::json& j) {
  TrialRecord r;
  r.trial_id = j.at("trial_id").get<std::string>();
  r.ordinal = j.at("ordinal").get<std::size_t>();
  r.backend = j.at("backend").get<std::string>();
  r.problem_id = j.at("problem_id").get<std::string>();
  r.kind = kind_from_name(j.at("kind").get<std::string>());
  r.method = method_from_name(j.at("method").get<std::string>());
  r.d_t = j.at("d_t").get<std::size_t>();
  r.structural_mod = structural_mod_from_name(j.at("structural_mod").get<std::string>());
  r.tamper_positions = j.value("tamper_positions", std::vector<std::size_t>{});
  r.tampered_digits = j.value("tampered_digits", "");
  r.correct_digits = j.value("correct_digits", "");
  r.prompt_key = j.value("prompt_key", "");
  r.eligibility_pass = j.value("eligibility_pass", false);
  r.eligibility_digits = j.value("eligibility_digits", "");
  r.extracted_digits = j.value("extracted_digits", "");
  r.status = trial_status_from_name(j.at("status").get<std::string>());
  r.outcome = outcome_from_name(j.at("outcome").get<std::string>());
  r.d_cpt = j.value("d_cpt", std::size_t{0});
  r.r_cpt_num = j.value("r_cpt_num", std::int64_t{0});
  r.r_cpt_den = j.value("r_cpt_den", std::int64_t{1});
  r.t_init_ms = j.value("t_init_ms", std::int64_t{0});
  r.t_cpt_ms = j.value("t_cpt_ms", std::int64_t{-1});
  r.error = j.value("error", "");
  r.started_at = j.value("started_at", "");
  r.finished_at = j.value("finished_at", "");
  return r;
}

BackendConfig backend_config_from_json(const nlohmann::json& j) {
  BackendConfig c;
  c.name = j.at("name").get<std::string>();
  const std::string kind = j.value("kind", "mock");
  if (kind == "http") {
    c.kind = BackendKind::HttpChat;
  } else if (kind == "mock") {
    c.kind = BackendKind::Mock;
  } else if (kind == "replay") {
    c.kind = BackendKind::Replay;
  } else {
    throw Error(ErrorCode::Config, "unknown backend kind: " + kind);
  }
  c.model = j.value("model", c.name);
  c.base_url = j.value("base_url", "");
  c.api_key_env = j.value("api_key_env", "");
  c.max_retries = j.value("max_retries", 3);
  if (j.contains("temperature")) c.temperature = j["temperature"].get<double>();
  c.timeout = std::chrono::milliseconds{j.value("timeout_ms", 120000)};
  c.profile = j.value("profile", "");
  c.seed = j.value("seed", std::uint64_t{0});
  c.transcript_path = j.value("transcript_path", "");
  c.supports_prefix = j.value("supports_prefix", true);
  c.max_inflight = j.value("max_inflight", 4);
  if (j.contains("script")) {
    for (const auto& [label, cells] : j["script"].items()) {
      std::vector<std::pair<std::string, std::string>> row;
      for (const auto& [m, profile] : cells.items()) {
        row.emplace_back(m, profile.get<std::string>());
      }
      c.script.emplace_back(label, std::move(row));
    }
  }
  return c;
}

}  // namespace

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "config file not found: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, "config unreadable: " + std::string(e.what()));
  }
  RunConfig c;
  for (const auto& b : doc.at("backends")) c.backends.push_back(backend_config_from_json(b));
  if (c.backends.empty()) throw Error(ErrorCode::Config, "config names no backends");
  const auto& problems = doc.at("problems");
  c.addition_count = problems.value("additions", 0);
  c.multiplication_count = problems.value("multiplications", 0);
  c.problem_seed = problems.value("seed", std::uint64_t{1});
  c.word_problem_labels =
      problems.value("word_problems", std::vector<std::string>{});
  c.fixture_path = problems.value("fixture_path", "");
  c.methods.clear();
  for (const auto& m : doc.value("methods", std::vector<std::string>{"baseline"})) {
    c.methods.push_back(method_from_name(m));
  }
  c.d_t_values = doc.value("d_t_values", std::vector<std::size_t>{1});
  for (std::size_t d : c.d_t_values) {
    if (d < 1 || d > 6) throw Error(ErrorCode::Config, "d_t values must be in [1,6]");
  }
  c.structural_mods.clear();
  for (const auto& m : doc.value("structural_mods", std::vector<std::string>{"none"})) {
    c.structural_mods.push_back(structural_mod_from_name(m));
  }
  c.trace_source = doc.value("trace_source", c.backends.front().name);
  c.templates_path = doc.value("templates_path", "");
  c.filler_path = doc.value("filler_path", "");
  c.tamper_seed = doc.value("tamper_seed", std::uint64_t{1});
  c.record_transcripts = doc.value("record_transcripts", false);
  c.record_path = doc.value("record_path", "");
  c.worker_threads = doc.value("worker_threads", 4);
  if (c.methods.empty() || c.d_t_values.empty()) {
    throw Error(ErrorCode::Config, "methods and d_t_values must be non-empty");
  }
  return c;
}

Harness::Harness(RunConfig config, std::string run_dir)
    : config_(std::move(config)), run_dir_(std::move(run_dir)) {
  if (config_.backends.empty()) throw Error(ErrorCode::Config, "config names no backends");
  fs::create_directories(run_dir_);
  fs::create_directories(fs::path(run_dir_) / "traces");

  templates_ = config_.templates_path.empty() ? PromptTemplates::defaults()
                                              : PromptTemplates::load(config_.templates_path);
  if (config_.filler_path.empty()) {
    filler_ = default_insertion_filler();
  } else {
    std::ifstream in(config_.filler_path);
    if (!in) throw Error(ErrorCode::Io, "filler file not found: " + config_.filler_path);
    std::stringstream ss;
    ss << in.rdbuf();
    filler_ = ss.str();
  }

  for (int i = 0; i < config_.addition_count; ++i) {
    problems_.push_back(generate_addition(config_.problem_seed + static_cast<std::uint64_t>(i)));
  }
  for (int i = 0; i < config_.multiplication_count; ++i) {
    problems_.push_back(generate_multiplication(config_.problem_seed + 1'000'003 +
                                                static_cast<std::uint64_t>(i)));
  }
  if (!config_.word_problem_labels.empty()) {
    auto fixtures = load_word_problems(config_.fixture_path);
    for (const auto& label : config_.word_problem_labels) {
      auto it = std::find_if(fixtures.begin(), fixtures.end(),
                             [&](const auto& f) { return f.label == label; });
      if (it == fixtures.end()) {
        throw Error(ErrorCode::Config, "unknown word problem label: " + label);
      }
      problems_.push_back(it->to_problem());
    }
  }
  if (problems_.empty()) throw Error(ErrorCode::Config, "config selects no problems");

  std::string record_path = config_.record_path.empty()
                                ? (fs::path(run_dir_) / "transcripts.jsonl").string()
                                : config_.record_path;
  for (const auto& bc : config_.backends) {
    auto backend = make_backend(bc);
    if (config_.record_transcripts) {
      backend = make_recording_backend(std::move(backend), record_path);
    }
    backend->prime(problems_, templates_);
    backend_order_.push_back(bc.name);
    backends_.emplace(bc.name, std::move(backend));
  }
  if (config_.trace_source.empty()) config_.trace_source = config_.backends.front().name;
  if (!backends_.count(config_.trace_source)) {
    throw Error(ErrorCode::Config, "trace_source backend not configured: " + config_.trace_source);
  }
}

Harness::~Harness() = default;

Backend& Harness::backend(const std::string& name) {
  auto it = backends_.find(name);
  if (it == backends_.end()) throw Error(ErrorCode::Config, "unknown backend: " + name);
  return *it->second;
}

std::string Harness::trace_for(const Problem& problem) {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = trace_cache_.find(problem.id);
    if (it != trace_cache_.end()) return it->second;
  }
  const fs::path cache_file = fs::path(run_dir_) / "traces" / (problem.id + ".txt");
  std::string raw;
  if (fs::exists(cache_file)) {
    std::ifstream in(cache_file);
    std::stringstream ss;
    ss << in.rdbuf();
    raw = ss.str();
  } else {
    ChatTurnRequest request;
    request.user_message = problem.statement;
    ModelResponse response = backend(config_.trace_source).complete(request);
    if (!response.reasoning_text || response.reasoning_text->empty()) {
      throw Error(ErrorCode::Backend,
                  "trace source returned no reasoning text for " + problem.id);
    }
    raw = *response.reasoning_text;
    std::ofstream out(cache_file);
    out << raw;
  }
  // The source trace must state the correct answer or tampering has no
  // target; surface that early.
  locate_ending_results(segment_trace(raw), problem.correct_answer);
  std::lock_guard<std::mutex> lock(mutex_);
  trace_cache_.emplace(problem.id, raw);
  return raw;
}

void Harness::acquire_traces() {
  for (const auto& p : problems_) trace_for(p);
}

Harness::Eligibility Harness::check_eligibility(const std::string& backend_name,
                                                const Problem& problem) {
  const std::string cache_key = backend_name + "\x1f" + problem.id;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = eligibility_cache_.find(cache_key);
    if (it != eligibility_cache_.end()) return it->second;
  }
  ChatTurnRequest request;
  request.user_message = problem.statement;
  ModelResponse response = backend(backend_name).complete(request);
  Eligibility e;
  e.latency_ms = response.latency.count();
  try {
    auto extracted =
        extract_final_answer(response.content, problem.correct_answer.digit_count());
    e.digits = extracted.digits;
    // Exact numeric equality, not substring containment, so the correct
    // digits embedded in a larger wrong number do not pass.
    e.pass = extracted.digits == problem.correct_answer.to_decimal();
  } catch (const Error&) {
    e.pass = false;
  }
  std::lock_guard<std::mutex> lock(mutex_);
  eligibility_cache_.emplace(cache_key, e);
  return e;
}

TrialRecord Harness::run_trial(std::size_t ordinal, const std::string& backend_name,
                               const Problem& problem, PromptMethod method, std::size_t d_t,
                               StructuralMod mod) {
  TrialRecord r;
  r.ordinal = ordinal;
  r.backend = backend_name;
  r.problem_id = problem.id;
  r.kind = problem.kind;
  r.method = method;
  r.d_t = d_t;
  r.structural_mod = mod;
  r.correct_digits = problem.correct_answer.to_decimal();
  r.trial_id = backend_name + "/" + problem.id + "/" + method_name(method) + "/dt" +
               std::to_string(d_t) + "/" + structural_mod_name(mod);
  r.started_at = iso_now();

  try {
    Backend& be = backend(backend_name);
    if (method == PromptMethod::Method3 && !be.supports_prefix()) {
      r.status = TrialStatus::PrefixUnsupported;
      r.error = "backend cannot continue a forced output prefix";
      r.finished_at = iso_now();
      return r;
    }

    Eligibility eligibility = check_eligibility(backend_name, problem);
    r.eligibility_pass = eligibility.pass;
    r.eligibility_digits = eligibility.digits;
    r.t_init_ms = eligibility.latency_ms;
    if (!eligibility.pass) {
      r.status = TrialStatus::Ineligible;
      r.outcome = OutcomeClass::Ineligible;
      r.finished_at = iso_now();
      return r;
    }

    ReasoningTrace rt0 = segment_trace(trace_for(problem));
    std::uint64_t seed = fnv1a(r.trial_id, config_.tamper_seed);
    TamperedTrace tampered =
        tamper_digit_substitution(rt0, problem.correct_answer, d_t, seed);
    switch (mod) {
      case StructuralMod::None: break;
      case StructuralMod::DeleteR: tampered = delete_reflection(tampered); break;
      case StructuralMod::DeleteV: tampered = delete_verification(tampered); break;
      case StructuralMod::Insertion: tampered = insert_extraneous(tampered, filler_); break;
    }
    for (const auto& sub : tampered.spec.substitutions) {
      r.tamper_positions.push_back(sub.position);
    }
    r.tampered_digits = tampered.tampered_digits;

    PromptBundle bundle = build_prompt(problem, tampered, method, templates_);
    ChatTurnRequest request;
    request.user_message = bundle.user_message;
    request.assistant_prefix = bundle.assistant_prefix;
    ModelResponse response = backend(backend_name).complete(request);
    r.prompt_key = request_key(request);
    r.t_cpt_ms = response.latency.count();

    if (detect_thinking_stopped(response)) {
      r.status = TrialStatus::ThinkingStopped;
      r.outcome = OutcomeClass::ThinkingStopped;
      r.finished_at = iso_now();
      return r;
    }

    ExtractedAnswer extracted;
    try {
      extracted = extract_final_answer(response.content, r.correct_digits.size());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NoAnswerFound) {
        r.status = TrialStatus::Unparseable;
        r.error = e.what();
        r.finished_at = iso_now();
        return r;
      }
      throw;
    }
    r.extracted_digits = extracted.digits;
    r.d_cpt = count_compromised_digits(extracted.digits, r.correct_digits, tampered.spec);
    CompromiseScore score = score_trial(d_t, r.d_cpt);
    r.r_cpt_num = score.r_cpt.num;
    r.r_cpt_den = score.r_cpt.den;
    r.outcome = classify_outcome(d_t, r.d_cpt);
    r.status = TrialStatus::Scored;
  } catch (const std::exception& e) {
    r.status = TrialStatus::Errored;
    r.error = e.what();
  }
  r.finished_at = iso_now();
  return r;
}

std::vector<TrialRecord> Harness::run() {
  acquire_traces();

  struct Plan {
    std::string backend;
    const Problem* problem;
    PromptMethod method;
    std::size_t d_t;
    StructuralMod mod;
  };
  std::vector<Plan> plans;
  for (const auto& backend_name : backend_order_) {
    for (const auto& problem : problems_) {
      for (PromptMethod method : config_.methods) {
        // Word problems stay at d_t = 1.
        std::vector<std::size_t> d_ts = problem.kind == ProblemKind::WordProblem
                                            ? std::vector<std::size_t>{1}
                                            : config_.d_t_values;
        for (std::size_t d_t : d_ts) {
          for (StructuralMod mod : config_.structural_mods) {
            plans.push_back({backend_name, &problem, method, d_t, mod});
          }
        }
      }
    }
  }

  std::vector<TrialRecord> records(plans.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= plans.size()) return;
      const Plan& p = plans[i];
      records[i] = run_trial(i, p.backend, *p.problem, p.method, p.d_t, p.mod);
    }
  };
  int threads = std::max(1, config_.worker_threads);
  std::vector<std::thread> pool;
  for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  append_records(records);
  render_report(records, (fs::path(run_dir_) / "report").string());
  return records;
}

void Harness::append_records(const std::vector<TrialRecord>& records) {
  std::ofstream out(fs::path(run_dir_) / "trials.jsonl", std::ios::app);
  if (!out) throw Error(ErrorCode::Io, "cannot append trial records");
  for (const auto& r : records) out << record_to_json(r).dump() << "\n";
}

std::vector<TrialRecord> Harness::load_records(const std::string& run_dir) {
  std::ifstream in(fs::path(run_dir) / "trials.jsonl");
  if (!in) throw Error(ErrorCode::Io, "no trial records under " + run_dir);
  std::vector<TrialRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(record_from_json(nlohmann::json::parse(line)));
  }
  return out;
}

ProbeRecord Harness::probe_stop(const std::string& backend_name, const std::string& problem_id,
                                int repeats) {
  auto it = std::find_if(problems_.begin(), problems_.end(),
                         [&](const Problem& p) { return p.id == problem_id; });
  if (it == problems_.end()) throw Error(ErrorCode::Config, "unknown problem: " + problem_id);

  ProbeRecord probe;
  probe.backend = backend_name;
  probe.problem_id = problem_id;
  probe.repeats = repeats;
  Backend& be = backend(backend_name);
  for (int i = 0; i < repeats; ++i) {
    ChatTurnRequest first;
    first.user_message = it->statement;
    ModelResponse initial = be.complete(first);
    ChatTurnRequest second;
    second.user_message = initial.reasoning_text.value_or(initial.content);
    ModelResponse resubmitted = be.complete(second);
    if (detect_thinking_stopped(resubmitted)) ++probe.stopped;
  }
  probe.frequency = repeats > 0 ? static_cast<double>(probe.stopped) / repeats : 0.0;

  std::ofstream out(fs::path(run_dir_) / "probe.jsonl", std::ios::app);
  out << nlohmann::json{{"backend", probe.backend},
                        {"problem_id", probe.problem_id},
                        {"repeats", probe.repeats},
                        {"stopped", probe.stopped},
                        {"frequency", probe.frequency}}
             .dump()
      << "\n";
  return probe;
}

}  // namespace cpt
