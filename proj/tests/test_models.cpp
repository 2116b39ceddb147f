#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "cpt/error.hpp"
#include "cpt/metrics.hpp"
#include "cpt/models.hpp"
#include "cpt/trace.hpp"

using namespace cpt;

namespace {

std::unique_ptr<Backend> mock(const std::string& profile, const std::vector<Problem>& problems) {
  BackendConfig c;
  c.name = "mock-" + profile;
  c.kind = BackendKind::Mock;
  c.profile = profile;
  auto backend = make_backend(c);
  backend->prime(problems, PromptTemplates::defaults());
  return backend;
}

ChatTurnRequest cpt_request(const Problem& p, PromptMethod method, std::size_t d_t,
                            std::uint64_t seed) {
  TamperedTrace tampered =
      tamper_digit_substitution(segment_trace(synthesize_reasoning(p)), p.correct_answer, d_t,
                                seed);
  PromptBundle bundle = build_prompt(p, tampered, method, PromptTemplates::defaults());
  ChatTurnRequest r;
  r.user_message = bundle.user_message;
  r.assistant_prefix = bundle.assistant_prefix;
  return r;
}

ChatTurnRequest clean_request(const Problem& p) {
  ChatTurnRequest r;
  r.user_message = p.statement;
  return r;
}

}  // namespace

TEST_CASE("request keys are stable and sensitive to every field") {
  ChatTurnRequest a;
  a.user_message = "hello";
  a.model_name = "m";
  CHECK(request_key(a) == request_key(a));
  CHECK(request_key(a).size() == 16);

  ChatTurnRequest b = a;
  b.user_message = "hello!";
  CHECK(request_key(a) != request_key(b));

  ChatTurnRequest c = a;
  c.model_name = "m2";
  CHECK(request_key(a) != request_key(c));

  ChatTurnRequest d = a;
  d.assistant_prefix = "prefix";
  CHECK(request_key(a) != request_key(d));
}

TEST_CASE("approximate token counts") {
  CHECK(approx_token_count("") == 0);
  CHECK(approx_token_count("one two three") == 4);
  CHECK(approx_token_count("  spaced   out  words  ") == 4);
}

TEST_CASE("synthesized reasoning states the answer in every needed form") {
  Problem p = generate_addition(17);
  std::string reasoning = synthesize_reasoning(p);
  CHECK(reasoning.find(p.statement) != std::string::npos);
  auto occurrences =
      locate_ending_results(segment_trace(reasoning), p.correct_answer);
  CHECK(occurrences.size() == 5);
}

TEST_CASE("mock answers clean queries correctly") {
  Problem p = generate_addition(21);
  auto backend = mock("resistant", {p});
  ModelResponse r = backend->complete(clean_request(p));
  CHECK(r.completed_turn);
  REQUIRE(r.reasoning_text.has_value());
  CHECK_FALSE(r.reasoning_text->empty());
  CHECK(extract_final_answer(r.content, p.correct_answer.digit_count()).digits ==
        p.correct_answer.to_decimal());
}

TEST_CASE("resistant mock restores the correct result under tampering") {
  Problem p = generate_addition(22);
  auto backend = mock("resistant", {p});
  ModelResponse r = backend->complete(cpt_request(p, PromptMethod::Method1, 3, 5));
  CHECK(extract_final_answer(r.content, p.correct_answer.digit_count()).digits ==
        p.correct_answer.to_decimal());
}

TEST_CASE("compromised mock adopts the tampered result") {
  Problem p = generate_multiplication(23);
  auto backend = mock("compromised", {p});
  ChatTurnRequest request = cpt_request(p, PromptMethod::Baseline, 2, 6);
  ModelResponse r = backend->complete(request);
  std::string extracted =
      extract_final_answer(r.content, p.correct_answer.digit_count()).digits;
  CHECK(extracted != p.correct_answer.to_decimal());
  TamperSpec spec;
  spec.d_t = 2;
  CHECK(count_compromised_digits(extracted, p.correct_answer.to_decimal(), spec) == 2);
}

TEST_CASE("confused mock deviates beyond the tampered digits") {
  Problem p = generate_multiplication(24);
  auto backend = mock("confused:2", {p});
  ModelResponse r = backend->complete(cpt_request(p, PromptMethod::Baseline, 2, 8));
  std::string extracted =
      extract_final_answer(r.content, p.correct_answer.digit_count()).digits;
  TamperSpec spec;
  spec.d_t = 2;
  CHECK(count_compromised_digits(extracted, p.correct_answer.to_decimal(), spec) == 4);
}

TEST_CASE("stopper mock completes the turn with empty content") {
  Problem p = generate_addition(25);
  auto backend = mock("stopper", {p});
  ModelResponse r = backend->complete(cpt_request(p, PromptMethod::Method2, 1, 4));
  CHECK(r.completed_turn);
  CHECK(detect_thinking_stopped(r));
  // Clean queries still get a real answer.
  CHECK_FALSE(detect_thinking_stopped(backend->complete(clean_request(p))));
}

TEST_CASE("ineligible mock fails the clean check") {
  Problem p = generate_addition(26);
  auto backend = mock("ineligible", {p});
  ModelResponse r = backend->complete(clean_request(p));
  CHECK(extract_final_answer(r.content, p.correct_answer.digit_count()).digits !=
        p.correct_answer.to_decimal());
}

TEST_CASE("stopper-on-self-trace halts only when fed its own reasoning") {
  Problem p = generate_addition(27);
  auto backend = mock("stopper-on-self-trace", {p});
  ModelResponse first = backend->complete(clean_request(p));
  CHECK_FALSE(detect_thinking_stopped(first));

  ChatTurnRequest resubmit;
  resubmit.user_message = *first.reasoning_text;
  CHECK(detect_thinking_stopped(backend->complete(resubmit)));
}

TEST_CASE("unknown mock profile is rejected") {
  BackendConfig c;
  c.name = "bad";
  c.kind = BackendKind::Mock;
  c.profile = "nonsense";
  CHECK_THROWS_AS(make_backend(c), Error);
}

TEST_CASE("recording then replaying reproduces responses byte for byte") {
  Problem p = generate_multiplication(28);
  const std::string transcript = "transcript_roundtrip.jsonl";
  std::remove(transcript.c_str());

  ChatTurnRequest clean = clean_request(p);
  ChatTurnRequest tampered = cpt_request(p, PromptMethod::Method1, 2, 3);

  ModelResponse live_clean, live_tampered;
  {
    BackendConfig c;
    c.name = "rec";
    c.kind = BackendKind::Mock;
    c.profile = "compromised";
    auto recorder = make_recording_backend(make_backend(c), transcript);
    recorder->prime({p}, PromptTemplates::defaults());
    live_clean = recorder->complete(clean);
    live_tampered = recorder->complete(tampered);
  }

  BackendConfig rc;
  rc.name = "replay";
  rc.kind = BackendKind::Replay;
  rc.transcript_path = transcript;
  auto replay = make_backend(rc);

  ModelResponse replayed = replay->complete(tampered);
  CHECK(replayed.content == live_tampered.content);
  CHECK(replayed.reasoning_text == live_tampered.reasoning_text);
  CHECK(replayed.latency == live_tampered.latency);
  CHECK(replay->complete(clean).content == live_clean.content);

  // Unrecorded requests miss loudly.
  ChatTurnRequest other;
  other.user_message = "never recorded";
  CHECK_THROWS_AS(replay->complete(other), Error);
  try {
    replay->complete(other);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ReplayMiss);
  }
}

TEST_CASE("replay backend requires an existing transcript") {
  BackendConfig c;
  c.name = "replay";
  c.kind = BackendKind::Replay;
  c.transcript_path = "no/such/transcript.jsonl";
  CHECK_THROWS_AS(make_backend(c), Error);
}

TEST_CASE("http backend refuses to start without its API key") {
  BackendConfig c;
  c.name = "api";
  c.kind = BackendKind::HttpChat;
  c.base_url = "https://example.invalid";
  c.api_key_env = "CPT_TEST_KEY_THAT_IS_NOT_SET";
  CHECK_THROWS_AS(make_backend(c), Error);
}

TEST_CASE("mock honors the supports_prefix flag") {
  Problem p = generate_addition(29);
  BackendConfig c;
  c.name = "noprefix";
  c.kind = BackendKind::Mock;
  c.profile = "resistant";
  c.supports_prefix = false;
  auto backend = make_backend(c);
  backend->prime({p}, PromptTemplates::defaults());
  CHECK_FALSE(backend->supports_prefix());
}
