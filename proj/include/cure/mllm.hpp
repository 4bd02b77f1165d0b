#pragma once

// Prompt construction and response parsing for multimodal-LLM judges.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "cure/dataset.hpp"
#include "cure/error.hpp"
#include "cure/util/text.hpp"

namespace cure {

enum class JudgeMode { PS, CURE_GT };

inline std::string_view to_string(JudgeMode m) { return m == JudgeMode::PS ? "PS" : "CURE_GT"; }

inline JudgeMode parse_judge_mode(std::string_view s) {
  if (util::iequals(s, "PS")) return JudgeMode::PS;
  if (util::iequals(s, "CURE_GT")) return JudgeMode::CURE_GT;
  fail(ErrorKind::InvalidArgument, "unknown judge mode '" + std::string(s) + "'");
}

namespace mllm_detail {

inline constexpr std::string_view kPsTemplate =
    "You will be shown two images below. The image on the left is an AI-generated image of {item_name} "
    "({category_name}). The image on the right is a grid of four real images of {item_name} from Wikipedia.\n"
    "\n"
    "Generated Image (Left):\n"
    "[Image 1 Placeholder - will be inserted by API call]\n"
    "\n"
    "Real Images Collage (Right):\n"
    "[Image 2 Placeholder - will be inserted by API call]\n"
    "\n"
    "Please analyze the images and answer the following:\n"
    "\n"
    "1. On a scale of 1-5, how similar do you think the generated image on the left is to the real images on "
    "the right? Use the following scale:\n"
    "   1: Not at all similar\n"
    "   2: Slightly similar\n"
    "   3: Reasonably Similar\n"
    "   4: Very Similar\n"
    "   5: Extremely Similar\n"
    "\n"
    "2. Provide a brief explanation for your similarity rating, detailing specific visual aspects you compared.\n"
    "\n"
    "Format your response strictly as JSON with the keys \"similarity_rating\" (for the number 1-5) and "
    "\"similarity_explanation\" (for the text explanation).";

inline constexpr std::string_view kCureGtTemplate =
    "This is an AI-generated image of {item_name}, which is a type of {category_name}.\n"
    "Please analyze this image and answer the following questions:\n"
    "\n"
    "1. Cultural Representativeness: On a scale of 1-5 (where 1 is \"Highly Unlikely\" and 5 is \"Extremely "
    "Likely\"),\n"
    "   how likely can this item be found in {country}?\n"
    "\n"
    "2. Ground-Truth Likelihood: On a scale of 1-5 (where 1 is \"Highly Unlikely\" and 5 is \"Extremely "
    "Likely\"),\n"
    "   how likely is this an accurate image of {item_name}?\n"
    "\n"
    "3. Description: What specific details in the AI-generated image make it accurate or inaccurate\n"
    "   compared to how this object typically appears in {country} or your understanding of {item_name}?\n"
    "\n"
    "Format your response as JSON with keys: 'country_likelihood', 'item_accuracy', and 'details_analysis'.";

inline std::string substitute(std::string_view tmpl, std::string_view key, const std::string& value) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    auto hit = tmpl.find(key, pos);
    out.append(tmpl.substr(pos, hit == std::string_view::npos ? std::string_view::npos : hit - pos));
    if (hit == std::string_view::npos) break;
    out += value;
    pos = hit + key.size();
  }
  return out;
}

}  // namespace mllm_detail

inline std::string build_mllm_prompt(const ArtifactRecord& a, JudgeMode mode) {
  auto require = [&](const std::string& v, const char* what) {
    if (v.empty()) fail(ErrorKind::MissingField, "artifact '" + a.name + "' lacks " + what);
  };
  require(a.name, "name");
  require(a.category, "category");
  if (mode == JudgeMode::PS) {
    if (a.ground_truth.empty()) fail(ErrorKind::MissingField, "artifact '" + a.name + "' has no ground-truth images");
    auto s = mllm_detail::substitute(mllm_detail::kPsTemplate, "{item_name}", a.name);
    return mllm_detail::substitute(s, "{category_name}", a.category);
  }
  require(a.region, "region");
  auto s = mllm_detail::substitute(mllm_detail::kCureGtTemplate, "{item_name}", a.name);
  s = mllm_detail::substitute(s, "{category_name}", a.category);
  return mllm_detail::substitute(s, "{country}", a.region);
}

struct JudgeResponse {
  JudgeMode mode = JudgeMode::PS;
  // PS
  int similarity_rating = 0;
  std::string similarity_explanation;
  // CURE_GT
  int country_likelihood = 0;
  int item_accuracy = 0;
  std::string details_analysis;
};

namespace mllm_detail {

// Balanced {...} span starting at `start`, honouring quoted strings.
inline std::optional<std::string_view> balanced_object(std::string_view text, std::size_t start) {
  int depth = 0;
  char quote = 0;
  bool escape = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    char c = text[i];
    if (quote) {
      if (escape) escape = false;
      else if (c == '\\') escape = true;
      else if (c == quote) quote = 0;
      continue;
    }
    if (c == '"' || c == '\'') quote = c;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) return text.substr(start, i - start + 1);
  }
  return std::nullopt;
}

// Rewrites single-quoted keys/strings to JSON double quotes.
inline std::string requote(std::string_view s) {
  std::string out;
  char quote = 0;
  bool escape = false;
  for (char c : s) {
    if (quote) {
      if (escape) {
        escape = false;
        out.push_back(c);
      } else if (c == '\\') {
        escape = true;
        out.push_back(c);
      } else if (c == quote) {
        quote = 0;
        out.push_back('"');
      } else if (c == '"' && quote == '\'') {
        out += "\\\"";
      } else {
        out.push_back(c);
      }
      continue;
    }
    if (c == '"' || c == '\'') {
      quote = c;
      out.push_back('"');
    } else {
      out.push_back(c);
    }
  }
  return out;
}

inline std::optional<nlohmann::json> try_parse(std::string_view s) {
  auto j = nlohmann::json::parse(s, nullptr, false);
  if (!j.is_discarded() && j.is_object()) return j;
  j = nlohmann::json::parse(requote(s), nullptr, false);
  if (!j.is_discarded() && j.is_object()) return j;
  return std::nullopt;
}

inline std::optional<nlohmann::json> extract_json(std::string_view text) {
  // Fenced blocks first: ```json ... ``` or ``` ... ```
  for (std::size_t pos = text.find("```"); pos != std::string_view::npos; pos = text.find("```", pos + 3)) {
    auto body_start = text.find('\n', pos);
    auto close = text.find("```", pos + 3);
    if (body_start == std::string_view::npos || close == std::string_view::npos || body_start > close) continue;
    auto body = text.substr(body_start + 1, close - body_start - 1);
    if (auto brace = body.find('{'); brace != std::string_view::npos) {
      if (auto obj = balanced_object(body, brace)) {
        if (auto j = try_parse(*obj)) return j;
      }
    }
    pos = close;
  }
  for (std::size_t pos = text.find('{'); pos != std::string_view::npos; pos = text.find('{', pos + 1)) {
    if (auto obj = balanced_object(text, pos)) {
      if (auto j = try_parse(*obj)) return j;
    }
  }
  return std::nullopt;
}

inline int rating(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) fail(ErrorKind::MissingKey, std::string("response lacks '") + key + "'");
  double v = 0;
  if (it->is_number()) {
    v = it->get<double>();
  } else if (it->is_string()) {
    auto s = util::trim(it->get<std::string>());
    try {
      std::size_t used = 0;
      v = std::stod(std::string(s), &used);
      if (used != s.size()) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      fail(ErrorKind::OutOfRange, std::string("'") + key + "' is not a number in 1-5");
    }
  } else {
    fail(ErrorKind::OutOfRange, std::string("'") + key + "' is not a number in 1-5");
  }
  if (v != std::floor(v) || v < 1 || v > 5) {
    fail(ErrorKind::OutOfRange, std::string("'") + key + "' = " + util::format_double(v) + " outside 1-5");
  }
  return static_cast<int>(v);
}

inline std::string text_field(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(ErrorKind::MissingKey, std::string("response lacks '") + key + "'");
  return it->is_string() ? it->get<std::string>() : it->dump();
}

}  // namespace mllm_detail

/// Pulls the JSON object out of a judge reply (bare, fenced, or wrapped in
/// prose) and validates it for `mode`.
inline JudgeResponse parse_mllm_response(std::string_view text, JudgeMode mode) {
  auto j = mllm_detail::extract_json(text);
  if (!j) fail(ErrorKind::NoJson, "no JSON object found in judge response");
  JudgeResponse r;
  r.mode = mode;
  if (mode == JudgeMode::PS) {
    r.similarity_rating = mllm_detail::rating(*j, "similarity_rating");
    r.similarity_explanation = mllm_detail::text_field(*j, "similarity_explanation");
  } else {
    r.country_likelihood = mllm_detail::rating(*j, "country_likelihood");
    r.item_accuracy = mllm_detail::rating(*j, "item_accuracy");
    r.details_analysis = mllm_detail::text_field(*j, "details_analysis");
  }
  return r;
}

}  // namespace cure
