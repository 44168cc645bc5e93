#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "capcom/gateway.hpp"
#include "capcom/types.hpp"

namespace capcom::prompt {

// Switches for the summarization prompt. Each flag owns fixed spans of the
// template; the default (all flags on, no language, no extra instruction)
// reproduces the reference prompt.
struct PromptVariant {
  bool hard_problem_prefix = true;   // "This is a hard problem. "
  bool uncertainty_language = true;  // hedging spans and the example prefix
  bool capitalized_one = true;       // "ONE" vs "one"
  std::optional<std::string> target_language;
  // Replaces "Be sure to describe everything" when set.
  std::optional<std::string> extra_instruction;

  bool operator==(const PromptVariant&) const = default;
};

nlohmann::json to_json(const PromptVariant& v);
PromptVariant variant_from_json(const nlohmann::json& j);

// Named presets accepted by --variant: default, no-uncertainty, no-prefix,
// lowercase-one, japanese. Anything else is parsed as a JSON object.
PromptVariant parse_variant(std::string_view spec);

// `N. "caption"` per line, 1-based; inner newlines collapse to spaces.
std::string format_captions(const std::vector<std::string>& candidates);

// Throws ValidationError on an empty candidate list.
std::string build_prompt(const std::vector<std::string>& candidates,
                         const PromptVariant& variant = {});

std::size_t comma_count(std::string_view text);

// Trim, drop an echoed leading "Summary:", collapse newlines to spaces.
// Throws ValidationError when nothing is left.
std::string postprocess_completion(std::string_view raw);

struct GuardConfig {
  int max_commas = 7;
  int max_regen = 2;
  // Sampling temperature for regeneration requests; the first request uses
  // the caller's temperature.
  double regen_temperature = 0.7;

  void validate() const;
};

struct SummaryFlags {
  bool uncertain_language_present = false;
  bool comma_guard_exhausted = false;
  bool operator==(const SummaryFlags&) const = default;
};

struct SummaryResult {
  std::string image_id;
  std::string summary_text;
  PromptVariant variant;
  std::string prompt;
  std::string raw_completion;
  int guard_retries = 0;
  SummaryFlags flags;
};

using CompleteFn =
    std::function<std::string(std::string_view prompt, const gateway::CompletionParams&)>;

// Adapts a gateway to CompleteFn.
CompleteFn completer(gateway::Gateway& gw);

// Summarizes a candidate set. Completions with more than guard.max_commas
// commas (or that are blank) are re-requested with a fresh seed up to
// guard.max_regen times; the last attempt is kept even if it still fails,
// with comma_guard_exhausted set. Issues at most 1 + max_regen calls.
SummaryResult summarize(const CompleteFn& complete, const std::string& image_id,
                        const std::vector<std::string>& candidates,
                        const PromptVariant& variant = {}, const GuardConfig& guard = {},
                        gateway::CompletionParams params = {});

SummaryResult summarize(const CompleteFn& complete, const CandidateSet& candidates,
                        const PromptVariant& variant = {}, const GuardConfig& guard = {},
                        gateway::CompletionParams params = {});

}  // namespace capcom::prompt
