#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cpt/bignat.hpp"

namespace cpt {

enum class SegmentKind { CalculationLoop, SelfReflection, SelfVerification, Other };

struct Segment {
  std::size_t begin = 0;
  std::size_t end = 0;  // half-open
  SegmentKind kind = SegmentKind::CalculationLoop;
};

/// A reasoning trace split into non-overlapping, ordered segments that
/// cover the raw text completely.
struct ReasoningTrace {
  std::string raw;
  std::vector<Segment> segments;
};

/// One appearance of the problem's correct result inside a trace, in
/// plain, comma-grouped, or spaced-digit form.
struct EndingResultOccurrence {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string digits;     // canonical, separators stripped
  std::string formatted;  // exact substring as it appears
};

struct DigitSubstitution {
  std::size_t position = 0;  // 0 = most significant digit
  char original = '0';
  char replacement = '0';
};

struct TamperSpec {
  std::vector<DigitSubstitution> substitutions;  // sorted by position
  std::size_t d_t = 0;
};

struct TamperedTrace {
  std::string raw;
  TamperSpec spec;
  std::string correct_digits;
  std::string tampered_digits;
  std::size_t occurrences_modified = 0;
};

/// Paragraph-level segmentation: a reflection or verification segment
/// opens at a cue phrase at paragraph start and extends to the next
/// blank-line boundary; everything else is a calculation loop.
ReasoningTrace segment_trace(const std::string& raw);

/// All occurrences of `answer` in the trace, matched with and without
/// thousands separators and as spaced single digits, ordered by start.
/// Throws NoOccurrenceFound when the trace never states the answer.
std::vector<EndingResultOccurrence> locate_ending_results(const ReasoningTrace& trace,
                                                          const BigNat& answer);

/// Substitutes d_t randomly chosen digits of the answer and rewrites
/// every located occurrence consistently, preserving character length
/// and separator placement.
TamperedTrace tamper_digit_substitution(const ReasoningTrace& trace, const BigNat& answer,
                                        std::size_t d_t, std::uint64_t seed);

/// Same, with explicit digit positions (controlled-magnitude studies).
/// Replacement digits are still drawn from the seed.
TamperedTrace tamper_at_positions(const ReasoningTrace& trace, const BigNat& answer,
                                  const std::vector<std::size_t>& positions,
                                  std::uint64_t seed);

TamperedTrace delete_reflection(const TamperedTrace& trace);
TamperedTrace delete_verification(const TamperedTrace& trace);
TamperedTrace insert_extraneous(const TamperedTrace& trace, const std::string& filler);

/// Shipped angle-calculation passage used by insert_extraneous when no
/// custom filler is configured.
const std::string& default_insertion_filler();

}  // namespace cpt
