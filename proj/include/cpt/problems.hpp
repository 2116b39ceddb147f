#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cpt/bignat.hpp"

namespace cpt {

enum class ProblemKind { Addition, Multiplication, WordProblem };

struct Problem {
  std::string id;
  ProblemKind kind = ProblemKind::Addition;
  std::string statement;
  std::vector<BigNat> operands;  // empty for word problems
  BigNat correct_answer;
  std::string display_answer;  // comma-grouped rendering of correct_answer
};

/// One of the six fixed word problems, with its audit trail of
/// intermediate quantities recomputed at load time.
struct WordProblemFixture {
  std::string label;  // Q1..Q6
  std::string statement;
  BigNat correct_answer;
  std::vector<std::pair<std::string, BigNat>> derivation;

  Problem to_problem() const;
};

/// Comma-grouped decimal rendering, groups of three from the least
/// significant digit. format_thousands(0) == "0".
std::string format_thousands(const BigNat& n);

/// Inverse of format_thousands; also accepts ungrouped digit strings.
BigNat parse_thousands(const std::string& s);

/// 15-digit plus 13-digit addition problem, operands uniform over the
/// full digit-width ranges. Deterministic per seed.
Problem generate_addition(std::uint64_t seed);

/// 8-digit by 7-digit multiplication problem. Deterministic per seed.
Problem generate_multiplication(std::uint64_t seed);

/// Loads the six Q1..Q6 fixtures and re-verifies each stored answer by
/// replaying the recorded derivation steps. Throws FixtureMissing /
/// FixtureAnswerMismatch.
std::vector<WordProblemFixture> load_word_problems(const std::string& fixture_path);

}  // namespace cpt
