#include "cpt.h"

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cpt/error.hpp"
#include "cpt/harness.hpp"
#include "cpt/metrics.hpp"
#include "cpt/problems.hpp"
#include "cpt/trace.hpp"

struct cpt_ctx {
  std::string last_error;
};

namespace {

cpt_status status_for(cpt::ErrorCode code) {
  using cpt::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArg:
    case ErrorCode::AnswerTooShort:
      return CPT_ERR_INVALID_ARG;
    case ErrorCode::Io:
      return CPT_ERR_IO;
    case ErrorCode::Config:
    case ErrorCode::TemplateMissing:
      return CPT_ERR_CONFIG;
    case ErrorCode::FixtureMissing:
    case ErrorCode::FixtureAnswerMismatch:
      return CPT_ERR_FIXTURE;
    case ErrorCode::NoOccurrenceFound:
    case ErrorCode::NoInsertionPoint:
    case ErrorCode::NoReflectionSegment:
    case ErrorCode::NoVerificationSegment:
      return CPT_ERR_NO_OCCURRENCE;
    case ErrorCode::ReplayMiss:
      return CPT_ERR_REPLAY_MISS;
    case ErrorCode::NoAnswerFound:
    case ErrorCode::EmptyInput:
      return CPT_ERR_NO_ANSWER;
    case ErrorCode::AuthFailure:
    case ErrorCode::RateLimitedExhausted:
    case ErrorCode::TransportFailure:
    case ErrorCode::PrefixUnsupported:
    case ErrorCode::UnknownProfile:
    case ErrorCode::Backend:
      return CPT_ERR_BACKEND;
  }
  return CPT_ERR_INTERNAL;
}

template <typename Fn>
cpt_status guarded(cpt_ctx* ctx, Fn&& fn) {
  if (!ctx) return CPT_ERR_INVALID_ARG;
  try {
    fn();
    ctx->last_error.clear();
    return CPT_OK;
  } catch (const cpt::Error& e) {
    ctx->last_error = e.what();
    return status_for(e.code());
  } catch (const std::exception& e) {
    ctx->last_error = e.what();
    return CPT_ERR_INTERNAL;
  }
}

std::string require(const char* arg, const char* name) {
  if (!arg) throw cpt::Error(cpt::ErrorCode::InvalidArg, std::string(name) + " is required");
  return arg;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cpt::Error(cpt::ErrorCode::Io, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

extern "C" {

cpt_ctx* cpt_ctx_new(void) { return new cpt_ctx{}; }

void cpt_ctx_free(cpt_ctx* ctx) { delete ctx; }

const char* cpt_error_message(const cpt_ctx* ctx) {
  return ctx ? ctx->last_error.c_str() : "null context";
}

cpt_status cpt_gen_problems(cpt_ctx* ctx, const char* kind, int count, uint64_t seed,
                            const char* out_path) {
  return guarded(ctx, [&] {
    const std::string kind_s = require(kind, "kind");
    if (count < 1) throw cpt::Error(cpt::ErrorCode::InvalidArg, "count must be >= 1");
    std::ofstream out(require(out_path, "out_path"));
    if (!out) throw cpt::Error(cpt::ErrorCode::Io, std::string("cannot write ") + out_path);
    for (int i = 0; i < count; ++i) {
      cpt::Problem p;
      if (kind_s == "addition") {
        p = cpt::generate_addition(seed + static_cast<uint64_t>(i));
      } else if (kind_s == "multiplication") {
        p = cpt::generate_multiplication(seed + static_cast<uint64_t>(i));
      } else {
        throw cpt::Error(cpt::ErrorCode::InvalidArg, "kind must be addition|multiplication");
      }
      nlohmann::json rec{{"id", p.id},
                         {"kind", kind_s},
                         {"statement", p.statement},
                         {"operands", nlohmann::json::array()},
                         {"answer", p.correct_answer.to_decimal()},
                         {"display_answer", p.display_answer}};
      for (const auto& op : p.operands) rec["operands"].push_back(op.to_decimal());
      out << rec.dump() << "\n";
    }
  });
}

cpt_status cpt_acquire_traces(cpt_ctx* ctx, const char* config_path, const char* run_dir) {
  return guarded(ctx, [&] {
    cpt::Harness harness(cpt::RunConfig::load(require(config_path, "config_path")),
                         require(run_dir, "run_dir"));
    harness.acquire_traces();
  });
}

cpt_status cpt_tamper_trace(cpt_ctx* ctx, const char* trace_path, const char* answer_digits,
                            int d_t, uint64_t seed, const char* positions,
                            const char* out_trace_path, const char* out_spec_path) {
  return guarded(ctx, [&] {
    const std::string raw = slurp(require(trace_path, "trace_path"));
    const cpt::BigNat answer = cpt::BigNat::from_decimal(require(answer_digits, "answer_digits"));
    cpt::ReasoningTrace trace = cpt::segment_trace(raw);

    cpt::TamperedTrace tampered;
    if (positions && *positions) {
      std::vector<std::size_t> parsed;
      std::stringstream ss{std::string(positions)};
      std::string token;
      while (std::getline(ss, token, ',')) parsed.push_back(std::stoul(token));
      tampered = cpt::tamper_at_positions(trace, answer, parsed, seed);
    } else {
      if (d_t < 1) throw cpt::Error(cpt::ErrorCode::InvalidArg, "d_t must be >= 1");
      tampered = cpt::tamper_digit_substitution(trace, answer,
                                                static_cast<std::size_t>(d_t), seed);
    }

    std::ofstream out(require(out_trace_path, "out_trace_path"));
    if (!out) throw cpt::Error(cpt::ErrorCode::Io, "cannot write tampered trace");
    out << tampered.raw;

    nlohmann::json spec{{"d_t", tampered.spec.d_t},
                        {"correct_digits", tampered.correct_digits},
                        {"tampered_digits", tampered.tampered_digits},
                        {"occurrences_modified", tampered.occurrences_modified},
                        {"substitutions", nlohmann::json::array()}};
    for (const auto& sub : tampered.spec.substitutions) {
      spec["substitutions"].push_back({{"position", sub.position},
                                       {"original", std::string(1, sub.original)},
                                       {"replacement", std::string(1, sub.replacement)}});
    }
    std::ofstream spec_out(require(out_spec_path, "out_spec_path"));
    if (!spec_out) throw cpt::Error(cpt::ErrorCode::Io, "cannot write tamper spec");
    spec_out << spec.dump(2) << "\n";
  });
}

cpt_status cpt_run_sweep(cpt_ctx* ctx, const char* config_path, const char* run_dir) {
  return guarded(ctx, [&] {
    cpt::Harness harness(cpt::RunConfig::load(require(config_path, "config_path")),
                         require(run_dir, "run_dir"));
    harness.run();
  });
}

cpt_status cpt_replay(cpt_ctx* ctx, const char* config_path, const char* transcript_path,
                      const char* run_dir) {
  return guarded(ctx, [&] {
    cpt::RunConfig config = cpt::RunConfig::load(require(config_path, "config_path"));
    for (auto& backend : config.backends) {
      backend.kind = cpt::BackendKind::Replay;
      backend.transcript_path = require(transcript_path, "transcript_path");
    }
    config.record_transcripts = false;
    cpt::Harness harness(std::move(config), require(run_dir, "run_dir"));
    harness.run();
  });
}

cpt_status cpt_probe_stop(cpt_ctx* ctx, const char* config_path, const char* run_dir,
                          const char* backend, const char* problem_id, int repeats,
                          double* frequency_out) {
  return guarded(ctx, [&] {
    cpt::Harness harness(cpt::RunConfig::load(require(config_path, "config_path")),
                         require(run_dir, "run_dir"));
    cpt::ProbeRecord probe = harness.probe_stop(require(backend, "backend"),
                                                require(problem_id, "problem_id"), repeats);
    if (frequency_out) *frequency_out = probe.frequency;
  });
}

cpt_status cpt_render_report(cpt_ctx* ctx, const char* run_dir) {
  return guarded(ctx, [&] {
    const std::string dir = require(run_dir, "run_dir");
    cpt::Harness::render_report(cpt::Harness::load_records(dir), dir + "/report");
  });
}

cpt_status cpt_compromising_rate(cpt_ctx* ctx, int d_t, int d_cpt, int64_t* num_out,
                                 int64_t* den_out) {
  return guarded(ctx, [&] {
    if (d_t < 1 || d_cpt < 0) {
      throw cpt::Error(cpt::ErrorCode::InvalidArg, "need d_t >= 1 and d_cpt >= 0");
    }
    cpt::Rational r = cpt::compromising_rate(static_cast<std::size_t>(d_t),
                                             static_cast<std::size_t>(d_cpt));
    if (num_out) *num_out = r.num;
    if (den_out) *den_out = r.den;
  });
}

}  // extern "C"
