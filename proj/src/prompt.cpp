#include "capcom/prompt.hpp"

#include <algorithm>

#include "capcom/coverage.hpp"
#include "capcom/errors.hpp"
#include "capcom/text.hpp"

namespace capcom::prompt {

using nlohmann::json;

namespace {

// Seed text that opens the summary in a target language. Languages without
// an entry get an empty seed after "Summary (in <Language>):".
std::string language_seed(const std::string& language) {
  if (language == "Japanese") return "\xE5\x86\x99\xE7\x9C\x9F\xE3\x81\xAF\xE3\x81\x8A\xE3\x81\x9D"
                                     "\xE3\x82\x89\xE3\x81\x8F";  // 写真はおそらく
  return {};
}

}  // namespace

json to_json(const PromptVariant& v) {
  json j = {{"hard_problem_prefix", v.hard_problem_prefix},
            {"uncertainty_language", v.uncertainty_language},
            {"capitalized_one", v.capitalized_one},
            {"target_language", nullptr},
            {"extra_instruction", nullptr}};
  if (v.target_language) j["target_language"] = *v.target_language;
  if (v.extra_instruction) j["extra_instruction"] = *v.extra_instruction;
  return j;
}

PromptVariant variant_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("prompt variant must be a JSON object");
  PromptVariant v;
  for (const auto& [key, val] : j.items()) {
    if (key == "hard_problem_prefix") v.hard_problem_prefix = val.get<bool>();
    else if (key == "uncertainty_language") v.uncertainty_language = val.get<bool>();
    else if (key == "capitalized_one") v.capitalized_one = val.get<bool>();
    else if (key == "target_language") {
      if (!val.is_null()) v.target_language = val.get<std::string>();
    } else if (key == "extra_instruction") {
      if (!val.is_null()) v.extra_instruction = val.get<std::string>();
    } else {
      throw ValidationError("unknown prompt variant field: " + key);
    }
  }
  return v;
}

PromptVariant parse_variant(std::string_view spec) {
  PromptVariant v;
  if (spec.empty() || spec == "default") return v;
  if (spec == "no-uncertainty") {
    v.uncertainty_language = false;
    return v;
  }
  if (spec == "no-prefix") {
    v.hard_problem_prefix = false;
    return v;
  }
  if (spec == "lowercase-one") {
    v.capitalized_one = false;
    return v;
  }
  if (spec == "japanese") {
    v.target_language = "Japanese";
    return v;
  }
  try {
    return variant_from_json(json::parse(spec));
  } catch (const json::exception& e) {
    throw ValidationError("unrecognized prompt variant '" + std::string(spec) + "': " + e.what());
  }
}

std::string format_captions(const std::vector<std::string>& candidates) {
  std::string out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (i) out += '\n';
    out += std::to_string(i + 1);
    out += ". \"";
    out += trim(collapse_newlines(candidates[i]));
    out += '"';
  }
  return out;
}

std::string build_prompt(const std::vector<std::string>& candidates,
                         const PromptVariant& variant) {
  if (candidates.empty()) throw ValidationError("build_prompt needs at least one candidate");
  const bool hedge = variant.uncertainty_language;
  std::string p;
  if (variant.hard_problem_prefix) p += "This is a hard problem. ";
  p += "Carefully summarize ";
  if (variant.target_language) p += "in " + *variant.target_language + " ";
  p += "in ";
  p += variant.capitalized_one ? "ONE" : "one";
  p += " detailed sentence the following captions by ";
  p += hedge ? "different (possibly incorrect) people" : "different people";
  p += " describing the same scene. ";
  p += variant.extra_instruction ? *variant.extra_instruction : "Be sure to describe everything";
  p += hedge ? ", and identify when you're not sure." : ".";
  p += " For example:\n";
  p += "Captions: " + format_captions(candidates) + ".\n";
  if (variant.target_language) {
    p += "Summary (in " + *variant.target_language + "):";
    if (auto seed = language_seed(*variant.target_language); !seed.empty()) p += " " + seed;
  } else {
    p += "Summary: ";
    p += hedge ? "I'm not sure, but the image is likely of..." : "The image is of...";
  }
  return p;
}

std::size_t comma_count(std::string_view text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), ','));
}

std::string postprocess_completion(std::string_view raw) {
  auto t = trim(raw);
  constexpr std::string_view kEcho = "Summary:";
  if (t.starts_with(kEcho)) t = trim(t.substr(kEcho.size()));
  auto out = std::string(trim(collapse_newlines(t)));
  if (out.empty()) throw ValidationError("completion is empty after post-processing");
  return out;
}

void GuardConfig::validate() const {
  if (max_commas < 0) throw ValidationError("max_commas must be >= 0");
  if (max_regen < 0) throw ValidationError("max_regen must be >= 0");
}

CompleteFn completer(gateway::Gateway& gw) {
  return [&gw](std::string_view prompt, const gateway::CompletionParams& params) {
    return gw.complete(prompt, params);
  };
}

SummaryResult summarize(const CompleteFn& complete, const std::string& image_id,
                        const std::vector<std::string>& candidates,
                        const PromptVariant& variant, const GuardConfig& guard,
                        gateway::CompletionParams params) {
  guard.validate();
  SummaryResult result;
  result.image_id = image_id;
  result.variant = variant;
  result.prompt = build_prompt(candidates, variant);
  params.image_id = image_id;

  const auto base_seed = params.seed;
  std::string text;
  bool passed = false;
  for (int attempt = 0; attempt <= guard.max_regen; ++attempt) {
    if (attempt > 0) {
      params.seed = base_seed + attempt;
      params.temperature = guard.regen_temperature;
      result.guard_retries = attempt;
    }
    result.raw_completion = complete(result.prompt, params);
    try {
      text = postprocess_completion(result.raw_completion);
    } catch (const ValidationError&) {
      text.clear();
    }
    if (!text.empty() && comma_count(text) <= static_cast<std::size_t>(guard.max_commas)) {
      passed = true;
      break;
    }
  }
  if (text.empty()) throw MalformedResponseError("summarizer returned only blank completions");
  result.summary_text = text;
  result.flags.comma_guard_exhausted = !passed;
  result.flags.uncertain_language_present =
      coverage::contains_lexicon_term(text, coverage::default_uncertainty_lexicon());
  return result;
}

SummaryResult summarize(const CompleteFn& complete, const CandidateSet& candidates,
                        const PromptVariant& variant, const GuardConfig& guard,
                        gateway::CompletionParams params) {
  return summarize(complete, candidates.image_id, candidates.texts(), variant, guard,
                   std::move(params));
}

}  // namespace capcom::prompt
