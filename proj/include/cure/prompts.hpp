#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "cure/dataset.hpp"
#include "cure/error.hpp"

namespace cure {

/// Which of {name, category, supercategory, region} a prompt conditions on.
class AttributeSubset {
 public:
  enum Member : std::uint8_t { N = 1, C = 2, S = 4, R = 8 };

  constexpr AttributeSubset() = default;
  constexpr explicit AttributeSubset(std::uint8_t bits) : bits_(bits & 0xf) {}

  constexpr bool has(Member m) const { return (bits_ & m) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint8_t bits() const { return bits_; }
  constexpr bool operator==(const AttributeSubset&) const = default;

 private:
  std::uint8_t bits_ = 0;
};

enum class PromptStyle {
  N, C, R, NC, NR, NCR,
  EVAL_N, EVAL_C, EVAL_R, EVAL_CR, EVAL_KHANUJA, EVAL_VENTURA, EVAL_O3MINI,
};

inline constexpr std::array<PromptStyle, 6> kGenerationStyles = {
    PromptStyle::N, PromptStyle::C, PromptStyle::R, PromptStyle::NC, PromptStyle::NR, PromptStyle::NCR};

inline constexpr std::array<PromptStyle, 7> kEvalStyles = {
    PromptStyle::EVAL_N,  PromptStyle::EVAL_C,       PromptStyle::EVAL_R,       PromptStyle::EVAL_CR,
    PromptStyle::EVAL_KHANUJA, PromptStyle::EVAL_VENTURA, PromptStyle::EVAL_O3MINI};

/// Styles used for benchmark generation (the category-only style is generated separately).
inline constexpr std::array<PromptStyle, 4> kBenchmarkStyles = {PromptStyle::N, PromptStyle::NC, PromptStyle::NR,
                                                                 PromptStyle::NCR};

inline constexpr bool is_generation_style(PromptStyle s) { return s <= PromptStyle::NCR; }
inline constexpr bool is_eval_style(PromptStyle s) { return s >= PromptStyle::EVAL_N; }

inline std::string_view to_string(PromptStyle s) {
  switch (s) {
    case PromptStyle::N: return "N";
    case PromptStyle::C: return "C";
    case PromptStyle::R: return "R";
    case PromptStyle::NC: return "NC";
    case PromptStyle::NR: return "NR";
    case PromptStyle::NCR: return "NCR";
    case PromptStyle::EVAL_N: return "EVAL_N";
    case PromptStyle::EVAL_C: return "EVAL_C";
    case PromptStyle::EVAL_R: return "EVAL_R";
    case PromptStyle::EVAL_CR: return "EVAL_CR";
    case PromptStyle::EVAL_KHANUJA: return "EVAL_KHANUJA";
    case PromptStyle::EVAL_VENTURA: return "EVAL_VENTURA";
    case PromptStyle::EVAL_O3MINI: return "EVAL_O3MINI";
  }
  return "?";
}

inline std::optional<PromptStyle> parse_style(std::string_view s) {
  for (auto st : kGenerationStyles) {
    if (to_string(st) == s) return st;
  }
  for (auto st : kEvalStyles) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

inline PromptStyle parse_style_or_throw(std::string_view s) {
  auto st = parse_style(s);
  if (!st) fail(ErrorKind::InvalidArgument, "unknown prompt style '" + std::string(s) + "'");
  return *st;
}

inline constexpr AttributeSubset subset_of(PromptStyle s) {
  using A = AttributeSubset;
  switch (s) {
    case PromptStyle::N: case PromptStyle::EVAL_N: return A(A::N);
    case PromptStyle::C: case PromptStyle::EVAL_C: return A(A::C);
    case PromptStyle::R: case PromptStyle::EVAL_R: return A(A::R);
    case PromptStyle::NC: return A(A::N | A::C);
    case PromptStyle::NR: return A(A::N | A::R);
    case PromptStyle::NCR: return A(A::N | A::C | A::R);
    case PromptStyle::EVAL_CR: return A(A::C | A::R);
    case PromptStyle::EVAL_KHANUJA: case PromptStyle::EVAL_VENTURA: case PromptStyle::EVAL_O3MINI: return A(A::R);
  }
  return {};
}

/// Registry of prompt templates. Placeholders: {n} name, {c} category,
/// {s} supercategory, {r} region.
class TemplateRegistry {
 public:
  static constexpr std::string_view kBuiltinJson = R"json({
  "version": 1,
  "generation": {
    "N": "An image of {n}",
    "C": "An image of {c}",
    "R": "An image from {r}",
    "NC": "An image of {n}, a type of {c}",
    "NR": "An image of {n}, from {r}",
    "NCR": "An image of {n}, a type of {c} from {r}"
  },
  "eval": {
    "EVAL_KHANUJA": "This image is culturally relevant to {r}.",
    "EVAL_VENTURA": "Image from {r} culture.",
    "EVAL_O3MINI": "Assess the image’s cultural representation of {r}.",
    "EVAL_N": "An image of {n}.",
    "EVAL_C": "An image of {c}.",
    "EVAL_R": "An image from {r}.",
    "EVAL_CR": "An image of {c} from {r}."
  }
})json";

  static const TemplateRegistry& builtin() {
    static const TemplateRegistry r = from_json(nlohmann::json::parse(kBuiltinJson));
    return r;
  }

  /// Every style must be covered; unknown style keys are rejected.
  static TemplateRegistry from_json(const nlohmann::json& j) {
    TemplateRegistry r;
    r.version_ = j.value("version", 0);
    auto read_section = [&](const char* key, bool generation) {
      if (!j.contains(key)) fail(ErrorKind::Schema, std::string("template registry missing '") + key + "'");
      for (const auto& [name, tmpl] : j.at(key).items()) {
        auto st = parse_style(name);
        if (!st || is_generation_style(*st) != generation) {
          fail(ErrorKind::Schema, "template registry: '" + name + "' is not a " + key + " style");
        }
        r.templates_[*st] = tmpl.get<std::string>();
      }
    };
    read_section("generation", true);
    read_section("eval", false);
    for (auto st : kGenerationStyles) r.require(st);
    for (auto st : kEvalStyles) r.require(st);
    return r;
  }

  const std::string& at(PromptStyle s) const { return templates_.at(s); }
  int version() const { return version_; }

  std::string render(const ArtifactRecord& a, PromptStyle s) const {
    const auto& tmpl = at(s);
    std::string out;
    out.reserve(tmpl.size() + 32);
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
      if (tmpl[i] == '{' && i + 2 < tmpl.size() && tmpl[i + 2] == '}') {
        const std::string* field = nullptr;
        const char* label = nullptr;
        switch (tmpl[i + 1]) {
          case 'n': field = &a.name; label = "name"; break;
          case 'c': field = &a.category; label = "category"; break;
          case 's': field = &a.supercategory; label = "supercategory"; break;
          case 'r': field = &a.region; label = "region"; break;
          default: break;
        }
        if (field) {
          if (field->empty()) {
            fail(ErrorKind::MissingField, "artifact '" + a.name + "' lacks " + label + " required by style " +
                                              std::string(to_string(s)));
          }
          out += *field;
          i += 2;
          continue;
        }
      }
      out.push_back(tmpl[i]);
    }
    return out;
  }

 private:
  void require(PromptStyle s) const {
    if (!templates_.count(s)) fail(ErrorKind::Schema, "template registry lacks style " + std::string(to_string(s)));
  }

  int version_ = 0;
  std::map<PromptStyle, std::string> templates_;
};

inline std::string render_generation_prompt(const ArtifactRecord& a, PromptStyle style,
                                            const TemplateRegistry& reg = TemplateRegistry::builtin()) {
  if (!is_generation_style(style)) {
    fail(ErrorKind::InvalidArgument, std::string(to_string(style)) + " is not a generation style");
  }
  return reg.render(a, style);
}

inline std::string render_eval_prompt(const ArtifactRecord& a, PromptStyle style,
                                      const TemplateRegistry& reg = TemplateRegistry::builtin()) {
  if (!is_eval_style(style)) fail(ErrorKind::InvalidArgument, std::string(to_string(style)) + " is not an eval style");
  return reg.render(a, style);
}

}  // namespace cure
