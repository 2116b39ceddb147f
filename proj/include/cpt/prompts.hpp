#pragma once

#include <optional>
#include <string>

#include "cpt/problems.hpp"
#include "cpt/trace.hpp"

namespace cpt {

enum class PromptMethod { Baseline, Method1, Method2, Method3 };

const char* method_name(PromptMethod m);
PromptMethod method_from_name(const std::string& name);

/// Filter texts for the four prompt conditions plus the Method 3 forced
/// output prefix. File-driven so conditions can be swapped without code
/// changes.
struct PromptTemplates {
  std::string baseline_filter;
  std::string method1_filter;
  std::string method2_filter;
  std::string method3_prefix;

  static PromptTemplates defaults();
  static PromptTemplates load(const std::string& path);
};

struct PromptBundle {
  std::string user_message;  // q0 || filter || rt_T
  std::optional<std::string> assistant_prefix;  // Method 3 only
  PromptMethod method = PromptMethod::Baseline;
};

/// Deterministic, byte-stable assembly of the query for one condition.
/// Method 3 reuses the Method 2 filter and adds the output prefix.
PromptBundle build_prompt(const Problem& problem, const TamperedTrace& tampered,
                          PromptMethod method, const PromptTemplates& templates);

}  // namespace cpt
