#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cpt/problems.hpp"
#include "cpt/prompts.hpp"

namespace cpt {

struct ChatTurnRequest {
  std::string user_message;
  std::optional<std::string> assistant_prefix;
  std::string model_name;
  std::optional<double> temperature;
  std::chrono::milliseconds timeout{120000};
};

struct ModelResponse {
  std::optional<std::string> reasoning_text;
  std::string content;
  bool completed_turn = true;  // distinguishes thinking-stopped from transport failure
  std::chrono::milliseconds latency{0};
  int approx_reasoning_tokens = 0;
  int approx_content_tokens = 0;
};

enum class BackendKind { HttpChat, Mock, Replay };

struct BackendConfig {
  std::string name;
  BackendKind kind = BackendKind::Mock;
  std::string model;

  // HttpChat
  std::string base_url;
  std::string api_key_env;
  int max_retries = 3;
  std::optional<double> temperature;
  std::chrono::milliseconds timeout{120000};

  // Mock: profile name, e.g. "resistant", "compromised", "confused:2",
  // "scripted" (with script entries problem-label -> method -> profile)
  std::string profile;
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> script;
  std::uint64_t seed = 0;

  // Replay
  std::string transcript_path;

  bool supports_prefix = true;
  int max_inflight = 4;
};

/// Uniform chat backend. complete() is safe to call concurrently; each
/// backend caps its in-flight requests.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual ModelResponse complete(const ChatTurnRequest& request) = 0;
  virtual bool supports_prefix() const { return true; }

  /// Gives test-double backends the problem set and templates they need
  /// to synthesize deterministic responses. No-op for real backends.
  virtual void prime(const std::vector<Problem>& problems, const PromptTemplates& templates) {}
};

std::unique_ptr<Backend> make_backend(const BackendConfig& config);

/// Wraps a backend so every completed request/response pair is appended
/// to a line-delimited transcript keyed by a stable request hash.
std::unique_ptr<Backend> make_recording_backend(std::unique_ptr<Backend> inner,
                                                const std::string& transcript_path);

/// Stable request key used by the transcript store.
std::string request_key(const ChatTurnRequest& request);

/// Whitespace-delimited word count scaled by 4/3; stand-in for a real
/// tokenizer, reported as "approx" throughout.
int approx_token_count(const std::string& text);

/// Deterministic long-CoT text for a problem: calculation loop, a
/// self-reflection block with a spaced-digit rendering, and a
/// self-verification block, all stating the correct ending result.
std::string synthesize_reasoning(const Problem& problem);

/// Names of the built-in mock behavior profiles.
std::vector<std::string> mock_profiles();

}  // namespace cpt
