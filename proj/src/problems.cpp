#include "cpt/problems.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "cpt/error.hpp"
#include "cpt/rng.hpp"

namespace cpt {

std::string format_thousands(const BigNat& n) {
  std::string digits = n.to_decimal();
  std::string out;
  out.reserve(digits.size() + digits.size() / 3);
  std::size_t lead = digits.size() % 3;
  if (lead == 0) lead = 3;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (i - lead) % 3 == 0 && i >= lead) out += ',';
    out += digits[i];
  }
  return out;
}

BigNat parse_thousands(const std::string& s) {
  std::string digits;
  digits.reserve(s.size());
  for (char c : s) {
    if (c == ',') continue;
    digits += c;
  }
  return BigNat::from_decimal(digits);
}

namespace {

std::uint64_t pow10_u64(int exp) {
  std::uint64_t v = 1;
  for (int i = 0; i < exp; ++i) v *= 10;
  return v;
}

Problem make_arithmetic(ProblemKind kind, std::uint64_t a, std::uint64_t b,
                        const std::string& id) {
  Problem p;
  p.id = id;
  p.kind = kind;
  p.operands = {BigNat{a}, BigNat{b}};
  p.correct_answer = kind == ProblemKind::Addition ? p.operands[0] + p.operands[1]
                                                   : p.operands[0] * p.operands[1];
  p.display_answer = format_thousands(p.correct_answer);
  const char op = kind == ProblemKind::Addition ? '+' : '*';
  p.statement = std::to_string(a) + op + std::to_string(b) + "=?";
  return p;
}

}  // namespace

Problem generate_addition(std::uint64_t seed) {
  Rng rng(seed);
  std::uint64_t a = rng.uniform(pow10_u64(14), pow10_u64(15));
  std::uint64_t b = rng.uniform(pow10_u64(12), pow10_u64(13));
  return make_arithmetic(ProblemKind::Addition, a, b, "add-" + std::to_string(seed));
}

Problem generate_multiplication(std::uint64_t seed) {
  Rng rng(seed);
  std::uint64_t a = rng.uniform(pow10_u64(7), pow10_u64(8));
  std::uint64_t b = rng.uniform(pow10_u64(6), pow10_u64(7));
  return make_arithmetic(ProblemKind::Multiplication, a, b, "mul-" + std::to_string(seed));
}

Problem WordProblemFixture::to_problem() const {
  Problem p;
  p.id = label;
  p.kind = ProblemKind::WordProblem;
  p.statement = statement;
  p.correct_answer = correct_answer;
  p.display_answer = format_thousands(correct_answer);
  return p;
}

std::vector<WordProblemFixture> load_word_problems(const std::string& fixture_path) {
  std::ifstream in(fixture_path);
  if (!in) {
    throw Error(ErrorCode::FixtureMissing, "word-problem fixture not found: " + fixture_path);
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FixtureMissing,
                "word-problem fixture unreadable: " + std::string(e.what()));
  }
  if (!doc.is_array() || doc.size() != 6) {
    throw Error(ErrorCode::FixtureMissing, "fixture must contain exactly 6 questions");
  }

  std::vector<WordProblemFixture> out;
  for (const auto& rec : doc) {
    WordProblemFixture f;
    f.label = rec.at("label").get<std::string>();
    f.statement = rec.at("statement").get<std::string>();
    f.correct_answer = BigNat::from_decimal(rec.at("answer").get<std::string>());

    // Replay the recorded derivation; "$name" references a prior step.
    std::unordered_map<std::string, BigNat> env;
    auto resolve = [&](const std::string& token) -> BigNat {
      if (!token.empty() && token[0] == '$') {
        auto it = env.find(token.substr(1));
        if (it == env.end()) {
          throw Error(ErrorCode::FixtureMissing,
                      f.label + ": derivation references unknown step " + token);
        }
        return it->second;
      }
      return BigNat::from_decimal(token);
    };
    BigNat last;
    for (const auto& step : rec.at("steps")) {
      const auto name = step.at(0).get<std::string>();
      const auto op = step.at(1).get<std::string>();
      BigNat a = resolve(step.at(2).get<std::string>());
      BigNat b = resolve(step.at(3).get<std::string>());
      BigNat v;
      if (op == "add") {
        v = a + b;
      } else if (op == "sub") {
        v = a - b;
      } else if (op == "mul") {
        v = a * b;
      } else {
        throw Error(ErrorCode::FixtureMissing, f.label + ": unknown derivation op " + op);
      }
      env.emplace(name, v);
      f.derivation.emplace_back(name, v);
      last = v;
    }
    if (!(last == f.correct_answer)) {
      throw Error(ErrorCode::FixtureAnswerMismatch,
                  f.label + ": stored answer " + f.correct_answer.to_decimal() +
                      " disagrees with recomputed " + last.to_decimal());
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace cpt
