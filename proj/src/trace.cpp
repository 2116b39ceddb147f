#include "cpt/trace.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "cpt/error.hpp"
#include "cpt/problems.hpp"
#include "cpt/rng.hpp"

namespace cpt {

namespace {

constexpr std::array kReflectionCues = {
    "but wait", "wait", "hmm", "that seems off", "that seems a bit off", "let me re-examine",
};
constexpr std::array kVerificationCues = {
    "let me check with",    "let me check again", "let me check another",
    "let me verify",        "verify",             "double-check",
    "let me double-check",  "another method",
};

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Case-insensitive cue match at `pos`, requiring a word boundary after.
bool cue_at(const std::string& text, std::size_t pos, const char* cue) {
  std::size_t n = 0;
  while (cue[n] != '\0') {
    if (pos + n >= text.size()) return false;
    if (std::tolower(static_cast<unsigned char>(text[pos + n])) != cue[n]) return false;
    ++n;
  }
  return pos + n >= text.size() || !is_word_char(text[pos + n]);
}

SegmentKind classify_paragraph(const std::string& text, std::size_t begin, std::size_t end) {
  std::size_t p = begin;
  while (p < end && std::isspace(static_cast<unsigned char>(text[p]))) ++p;
  if (p >= end) return SegmentKind::Other;
  for (const char* cue : kReflectionCues) {
    if (cue_at(text, p, cue)) return SegmentKind::SelfReflection;
  }
  for (const char* cue : kVerificationCues) {
    if (cue_at(text, p, cue)) return SegmentKind::SelfVerification;
  }
  return SegmentKind::CalculationLoop;
}

bool line_is_blank(const std::string& text, std::size_t begin, std::size_t end) {
  for (std::size_t i = begin; i < end; ++i) {
    if (!std::isspace(static_cast<unsigned char>(text[i]))) return false;
  }
  return true;
}

}  // namespace

ReasoningTrace segment_trace(const std::string& raw) {
  ReasoningTrace trace;
  trace.raw = raw;
  if (raw.empty()) return trace;

  // Paragraph starts: offset 0 plus every non-blank line preceded by a
  // blank line.
  std::vector<std::size_t> starts{0};
  std::size_t line_begin = 0;
  bool prev_blank = false;
  for (std::size_t i = 0; i <= raw.size(); ++i) {
    if (i == raw.size() || raw[i] == '\n') {
      bool blank = line_is_blank(raw, line_begin, i);
      if (!blank && prev_blank && line_begin != 0) starts.push_back(line_begin);
      prev_blank = blank;
      line_begin = i + 1;
    }
  }

  for (std::size_t s = 0; s < starts.size(); ++s) {
    std::size_t begin = starts[s];
    std::size_t end = s + 1 < starts.size() ? starts[s + 1] : raw.size();
    SegmentKind kind = classify_paragraph(raw, begin, end);
    if (kind == SegmentKind::Other && !trace.segments.empty()) {
      kind = trace.segments.back().kind;  // fold trailing whitespace
    }
    if (!trace.segments.empty() && trace.segments.back().kind == kind) {
      trace.segments.back().end = end;
    } else {
      trace.segments.push_back({begin, end, kind});
    }
  }
  return trace;
}

namespace {

bool digit_at(const std::string& text, std::size_t i) {
  return i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])) != 0;
}

// Matches of `needle` in `text` at digit-string boundaries.
void find_literal(const std::string& text, const std::string& needle, const std::string& digits,
                  std::vector<EndingResultOccurrence>& out) {
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    bool left_ok = pos == 0 || !digit_at(text, pos - 1);
    bool right_ok = !digit_at(text, pos + needle.size());
    if (left_ok && right_ok) {
      out.push_back({pos, pos + needle.size(), digits, needle});
      pos += needle.size();
    } else {
      ++pos;
    }
  }
}

// Maximal runs of single digits separated by single spaces whose
// concatenation equals `digits`.
void find_spaced(const std::string& text, const std::string& digits,
                 std::vector<EndingResultOccurrence>& out) {
  std::size_t i = 0;
  while (i < text.size()) {
    if (!digit_at(text, i) || digit_at(text, i + 1) || (i > 0 && digit_at(text, i - 1))) {
      ++i;
      continue;
    }
    // Run of the form d( d)* with single digits only.
    std::size_t begin = i;
    std::string concat(1, text[i]);
    std::size_t j = i + 1;
    while (j + 1 < text.size() && text[j] == ' ' && digit_at(text, j + 1) &&
           !digit_at(text, j + 2)) {
      concat += text[j + 1];
      j += 2;
    }
    if (concat.size() > 1 && concat == digits) {
      out.push_back({begin, j, digits, text.substr(begin, j - begin)});
    }
    i = j;
  }
}

std::vector<EndingResultOccurrence> find_occurrences(const std::string& text,
                                                     const std::string& digits) {
  std::vector<EndingResultOccurrence> out;
  const std::string grouped = format_thousands(BigNat::from_decimal(digits));
  find_literal(text, grouped, digits, out);
  if (grouped != digits) find_literal(text, digits, digits, out);
  find_spaced(text, digits, out);
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.begin < b.begin; });
  // Drop matches nested inside an earlier, longer one (a plain match
  // cannot nest in a grouped one at boundaries, but be safe).
  std::vector<EndingResultOccurrence> dedup;
  for (auto& occ : out) {
    if (!dedup.empty() && occ.begin < dedup.back().end) continue;
    dedup.push_back(std::move(occ));
  }
  return dedup;
}

// Rewrites one occurrence in place according to the substitutions.
void rewrite_occurrence(std::string& text, const EndingResultOccurrence& occ,
                        const TamperSpec& spec) {
  // Map digit index -> character offset within the occurrence.
  std::vector<std::size_t> digit_offsets;
  for (std::size_t i = occ.begin; i < occ.end; ++i) {
    if (std::isdigit(static_cast<unsigned char>(text[i]))) digit_offsets.push_back(i);
  }
  for (const auto& sub : spec.substitutions) {
    text[digit_offsets.at(sub.position)] = sub.replacement;
  }
}

TamperedTrace apply_spec(const ReasoningTrace& trace, const std::string& correct,
                         TamperSpec spec) {
  auto occurrences = find_occurrences(trace.raw, correct);
  if (occurrences.empty()) {
    throw Error(ErrorCode::NoOccurrenceFound,
                "trace never states the correct result " + correct);
  }
  TamperedTrace out;
  out.raw = trace.raw;
  out.correct_digits = correct;
  out.tampered_digits = correct;
  for (const auto& sub : spec.substitutions) out.tampered_digits[sub.position] = sub.replacement;
  for (const auto& occ : occurrences) rewrite_occurrence(out.raw, occ, spec);
  out.occurrences_modified = occurrences.size();
  out.spec = std::move(spec);
  return out;
}

}  // namespace

std::vector<EndingResultOccurrence> locate_ending_results(const ReasoningTrace& trace,
                                                          const BigNat& answer) {
  auto out = find_occurrences(trace.raw, answer.to_decimal());
  if (out.empty()) {
    throw Error(ErrorCode::NoOccurrenceFound,
                "trace never states the correct result " + answer.to_decimal());
  }
  return out;
}

TamperedTrace tamper_at_positions(const ReasoningTrace& trace, const BigNat& answer,
                                  const std::vector<std::size_t>& positions,
                                  std::uint64_t seed) {
  const std::string correct = answer.to_decimal();
  if (positions.empty() || positions.size() > 6) {
    throw Error(ErrorCode::InvalidArg, "tampered digit count must be in [1,6]");
  }
  if (correct.size() < positions.size()) {
    throw Error(ErrorCode::AnswerTooShort, "answer has fewer digits than requested tampering");
  }
  Rng rng(seed);
  TamperSpec spec;
  spec.d_t = positions.size();
  for (std::size_t pos : positions) {
    if (pos >= correct.size()) throw Error(ErrorCode::InvalidArg, "tamper position out of range");
    char original = correct[pos];
    char replacement = original;
    do {
      replacement = static_cast<char>('0' + rng.uniform(0, 10));
    } while (replacement == original || (pos == 0 && replacement == '0'));
    spec.substitutions.push_back({pos, original, replacement});
  }
  std::sort(spec.substitutions.begin(), spec.substitutions.end(),
            [](const auto& a, const auto& b) { return a.position < b.position; });
  for (std::size_t i = 1; i < spec.substitutions.size(); ++i) {
    if (spec.substitutions[i].position == spec.substitutions[i - 1].position) {
      throw Error(ErrorCode::InvalidArg, "duplicate tamper position");
    }
  }
  return apply_spec(trace, correct, std::move(spec));
}

TamperedTrace tamper_digit_substitution(const ReasoningTrace& trace, const BigNat& answer,
                                        std::size_t d_t, std::uint64_t seed) {
  const std::string correct = answer.to_decimal();
  if (d_t < 1 || d_t > 6) throw Error(ErrorCode::InvalidArg, "d_t must be in [1,6]");
  if (correct.size() < d_t) {
    throw Error(ErrorCode::AnswerTooShort, "answer has fewer digits than d_t");
  }
  Rng rng(seed);
  // Partial Fisher-Yates over digit indices.
  std::vector<std::size_t> indices(correct.size());
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  std::vector<std::size_t> positions;
  for (std::size_t i = 0; i < d_t; ++i) {
    std::size_t j = i + rng.uniform(0, indices.size() - i);
    std::swap(indices[i], indices[j]);
    positions.push_back(indices[i]);
  }
  return tamper_at_positions(trace, answer, positions, rng.next());
}

namespace {

// Removing zero segments is a no-op, which makes the operation
// idempotent rather than failing on already-stripped traces.
TamperedTrace delete_segments(const TamperedTrace& trace, SegmentKind kind) {
  ReasoningTrace seg = segment_trace(trace.raw);
  std::string kept;
  kept.reserve(trace.raw.size());
  for (const auto& s : seg.segments) {
    if (s.kind != kind) kept.append(trace.raw, s.begin, s.end - s.begin);
  }
  TamperedTrace out = trace;
  out.raw = std::move(kept);
  out.occurrences_modified = find_occurrences(out.raw, out.tampered_digits).size();
  return out;
}

}  // namespace

TamperedTrace delete_reflection(const TamperedTrace& trace) {
  return delete_segments(trace, SegmentKind::SelfReflection);
}

TamperedTrace delete_verification(const TamperedTrace& trace) {
  return delete_segments(trace, SegmentKind::SelfVerification);
}

TamperedTrace insert_extraneous(const TamperedTrace& trace, const std::string& filler) {
  ReasoningTrace seg = segment_trace(trace.raw);
  // Last reflection segment followed by a verification segment.
  std::size_t insert_at = std::string::npos;
  for (std::size_t i = 0; i < seg.segments.size(); ++i) {
    if (seg.segments[i].kind != SegmentKind::SelfReflection) continue;
    for (std::size_t j = i + 1; j < seg.segments.size(); ++j) {
      if (seg.segments[j].kind == SegmentKind::SelfVerification) {
        insert_at = seg.segments[i].end;
        break;
      }
    }
  }
  if (insert_at == std::string::npos) {
    throw Error(ErrorCode::NoInsertionPoint,
                "trace lacks a self-reflection followed by self-verification");
  }
  TamperedTrace out = trace;
  out.raw.insert(insert_at, filler);
  out.occurrences_modified = find_occurrences(out.raw, out.tampered_digits).size();
  return out;
}

const std::string& default_insertion_filler() {
  static const std::string filler =
      "Before continuing, consider an unrelated check: in a triangle with sides 7, 8, and 9, "
      "the angle opposite the longest side follows from the law of cosines. cos(C) = "
      "(49 + 64 - 81) / (2 * 7 * 8) = 32 / 112 = 2/7, so C = arccos(2/7), roughly 73.4 "
      "degrees. The other angles then split the remaining 106.6 degrees, with the smallest "
      "opposite the side of length 7. This angle computation is consistent with the triangle "
      "inequality and the angle sum identity.\n\n";
  return filler;
}

}  // namespace cpt
