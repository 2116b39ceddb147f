#include "cpt/prompts.hpp"

#include <fstream>

#include <json.hpp>

#include "cpt/error.hpp"

namespace cpt {

const char* method_name(PromptMethod m) {
  switch (m) {
    case PromptMethod::Baseline: return "baseline";
    case PromptMethod::Method1: return "m1";
    case PromptMethod::Method2: return "m2";
    case PromptMethod::Method3: return "m3";
  }
  return "baseline";
}

PromptMethod method_from_name(const std::string& name) {
  if (name == "baseline") return PromptMethod::Baseline;
  if (name == "m1" || name == "method1") return PromptMethod::Method1;
  if (name == "m2" || name == "method2") return PromptMethod::Method2;
  if (name == "m3" || name == "method3") return PromptMethod::Method3;
  throw Error(ErrorCode::InvalidArg, "unknown prompt method: " + name);
}

PromptTemplates PromptTemplates::defaults() {
  PromptTemplates t;
  t.baseline_filter = "Below is your previous thought.";
  t.method1_filter =
      "Below is your previous thought. It may contain errors, so examine it carefully.";
  t.method2_filter =
      "Below is your previous thought. It contains calculation errors - ignore its results "
      "and solve the problem yourself.";
  t.method3_prefix = "Let me ignore the previous result and recompute from scratch.";
  return t;
}

PromptTemplates PromptTemplates::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::TemplateMissing, "template file not found: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::TemplateMissing, "template file unreadable: " + std::string(e.what()));
  }
  PromptTemplates t;
  t.baseline_filter = doc.value("baseline_filter", "");
  t.method1_filter = doc.value("method1_filter", "");
  t.method2_filter = doc.value("method2_filter", "");
  t.method3_prefix = doc.value("method3_prefix", "");
  if (t.baseline_filter.empty() || t.method1_filter.empty() || t.method2_filter.empty() ||
      t.method3_prefix.empty()) {
    throw Error(ErrorCode::TemplateMissing, "template file is missing a method entry: " + path);
  }
  return t;
}

PromptBundle build_prompt(const Problem& problem, const TamperedTrace& tampered,
                          PromptMethod method, const PromptTemplates& templates) {
  const std::string* filter = nullptr;
  switch (method) {
    case PromptMethod::Baseline: filter = &templates.baseline_filter; break;
    case PromptMethod::Method1: filter = &templates.method1_filter; break;
    case PromptMethod::Method2:
    case PromptMethod::Method3: filter = &templates.method2_filter; break;
  }
  if (filter->empty()) {
    throw Error(ErrorCode::TemplateMissing,
                std::string("empty filter template for ") + method_name(method));
  }
  PromptBundle bundle;
  bundle.method = method;
  bundle.user_message = problem.statement + "\n" + *filter + "\n" + tampered.raw;
  if (method == PromptMethod::Method3) {
    if (templates.method3_prefix.empty()) {
      throw Error(ErrorCode::TemplateMissing, "empty output prefix template for m3");
    }
    bundle.assistant_prefix = templates.method3_prefix;
  }
  return bundle;
}

}  // namespace cpt
