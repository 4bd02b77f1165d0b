#pragma once

// Country -> (continent, Global North / Global South) lookup.
//
// Buckets follow the UNCTAD development classification: developed economies
// (Europe, Northern America, Australia, New Zealand, Israel, Japan, Republic of
// Korea) are Global North; every other economy is Global South.

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "cure/util/text.hpp"

namespace cure {

enum class GlobalBucket { GN, GS };

inline std::string_view to_string(GlobalBucket b) { return b == GlobalBucket::GN ? "GN" : "GS"; }

inline std::optional<GlobalBucket> parse_bucket(std::string_view s) {
  if (s == "GN") return GlobalBucket::GN;
  if (s == "GS") return GlobalBucket::GS;
  return std::nullopt;
}

inline constexpr std::array<std::string_view, 6> kContinents = {
    "Africa", "Asia", "Europe", "North America", "Oceania", "South America"};

inline std::optional<std::string_view> canonical_continent(std::string_view s) {
  for (auto c : kContinents) {
    if (util::iequals(c, s)) return c;
  }
  return std::nullopt;
}

struct CountryInfo {
  std::string_view name;
  std::string_view continent;
  GlobalBucket bucket;
};

namespace detail {

using enum GlobalBucket;

inline constexpr CountryInfo kCountries[] = {
    // Africa
    {"Algeria", "Africa", GS}, {"Angola", "Africa", GS}, {"Benin", "Africa", GS},
    {"Botswana", "Africa", GS}, {"Burkina Faso", "Africa", GS}, {"Burundi", "Africa", GS},
    {"Cameroon", "Africa", GS}, {"Cape Verde", "Africa", GS}, {"Central African Republic", "Africa", GS},
    {"Chad", "Africa", GS}, {"Comoros", "Africa", GS}, {"Democratic Republic of the Congo", "Africa", GS},
    {"Republic of the Congo", "Africa", GS}, {"Djibouti", "Africa", GS}, {"Egypt", "Africa", GS},
    {"Equatorial Guinea", "Africa", GS}, {"Eritrea", "Africa", GS}, {"Eswatini", "Africa", GS},
    {"Ethiopia", "Africa", GS}, {"Gabon", "Africa", GS}, {"Gambia", "Africa", GS},
    {"Ghana", "Africa", GS}, {"Guinea", "Africa", GS}, {"Guinea-Bissau", "Africa", GS},
    {"Ivory Coast", "Africa", GS}, {"Kenya", "Africa", GS}, {"Lesotho", "Africa", GS},
    {"Liberia", "Africa", GS}, {"Libya", "Africa", GS}, {"Madagascar", "Africa", GS},
    {"Malawi", "Africa", GS}, {"Mali", "Africa", GS}, {"Mauritania", "Africa", GS},
    {"Mauritius", "Africa", GS}, {"Morocco", "Africa", GS}, {"Mozambique", "Africa", GS},
    {"Namibia", "Africa", GS}, {"Niger", "Africa", GS}, {"Nigeria", "Africa", GS},
    {"Rwanda", "Africa", GS}, {"Sao Tome and Principe", "Africa", GS}, {"Senegal", "Africa", GS},
    {"Seychelles", "Africa", GS}, {"Sierra Leone", "Africa", GS}, {"Somalia", "Africa", GS},
    {"South Africa", "Africa", GS}, {"South Sudan", "Africa", GS}, {"Sudan", "Africa", GS},
    {"Tanzania", "Africa", GS}, {"Togo", "Africa", GS}, {"Tunisia", "Africa", GS},
    {"Uganda", "Africa", GS}, {"Zambia", "Africa", GS}, {"Zimbabwe", "Africa", GS},
    // Asia
    {"Afghanistan", "Asia", GS}, {"Armenia", "Asia", GS}, {"Azerbaijan", "Asia", GS},
    {"Bahrain", "Asia", GS}, {"Bangladesh", "Asia", GS}, {"Bhutan", "Asia", GS},
    {"Brunei", "Asia", GS}, {"Cambodia", "Asia", GS}, {"China", "Asia", GS},
    {"Georgia", "Asia", GS}, {"Hong Kong", "Asia", GS}, {"India", "Asia", GS},
    {"Indonesia", "Asia", GS}, {"Iran", "Asia", GS}, {"Iraq", "Asia", GS},
    {"Israel", "Asia", GN}, {"Japan", "Asia", GN}, {"Jordan", "Asia", GS},
    {"Kazakhstan", "Asia", GS}, {"Kuwait", "Asia", GS}, {"Kyrgyzstan", "Asia", GS},
    {"Laos", "Asia", GS}, {"Lebanon", "Asia", GS}, {"Macau", "Asia", GS},
    {"Malaysia", "Asia", GS}, {"Maldives", "Asia", GS}, {"Mongolia", "Asia", GS},
    {"Myanmar", "Asia", GS}, {"Nepal", "Asia", GS}, {"North Korea", "Asia", GS},
    {"Oman", "Asia", GS}, {"Pakistan", "Asia", GS}, {"Palestine", "Asia", GS},
    {"Philippines", "Asia", GS}, {"Qatar", "Asia", GS}, {"Saudi Arabia", "Asia", GS},
    {"Singapore", "Asia", GS}, {"South Korea", "Asia", GN}, {"Sri Lanka", "Asia", GS},
    {"Syria", "Asia", GS}, {"Taiwan", "Asia", GS}, {"Tajikistan", "Asia", GS},
    {"Thailand", "Asia", GS}, {"Timor-Leste", "Asia", GS}, {"Turkey", "Asia", GS},
    {"Turkmenistan", "Asia", GS}, {"United Arab Emirates", "Asia", GS}, {"Uzbekistan", "Asia", GS},
    {"Vietnam", "Asia", GS}, {"Yemen", "Asia", GS},
    // Europe
    {"Albania", "Europe", GN}, {"Andorra", "Europe", GN}, {"Austria", "Europe", GN},
    {"Belarus", "Europe", GN}, {"Belgium", "Europe", GN}, {"Bosnia and Herzegovina", "Europe", GN},
    {"Bulgaria", "Europe", GN}, {"Croatia", "Europe", GN}, {"Cyprus", "Europe", GN},
    {"Czech Republic", "Europe", GN}, {"Denmark", "Europe", GN}, {"Estonia", "Europe", GN},
    {"Finland", "Europe", GN}, {"France", "Europe", GN}, {"Germany", "Europe", GN},
    {"Greece", "Europe", GN}, {"Hungary", "Europe", GN}, {"Iceland", "Europe", GN},
    {"Ireland", "Europe", GN}, {"Italy", "Europe", GN}, {"Kosovo", "Europe", GN},
    {"Latvia", "Europe", GN}, {"Liechtenstein", "Europe", GN}, {"Lithuania", "Europe", GN},
    {"Luxembourg", "Europe", GN}, {"Malta", "Europe", GN}, {"Moldova", "Europe", GN},
    {"Monaco", "Europe", GN}, {"Montenegro", "Europe", GN}, {"Netherlands", "Europe", GN},
    {"North Macedonia", "Europe", GN}, {"Norway", "Europe", GN}, {"Poland", "Europe", GN},
    {"Portugal", "Europe", GN}, {"Romania", "Europe", GN}, {"Russia", "Europe", GN},
    {"San Marino", "Europe", GN}, {"Serbia", "Europe", GN}, {"Slovakia", "Europe", GN},
    {"Slovenia", "Europe", GN}, {"Spain", "Europe", GN}, {"Sweden", "Europe", GN},
    {"Switzerland", "Europe", GN}, {"Ukraine", "Europe", GN}, {"United Kingdom", "Europe", GN},
    {"Vatican City", "Europe", GN},
    // North America (incl. Central America and the Caribbean)
    {"Antigua and Barbuda", "North America", GS}, {"Bahamas", "North America", GS},
    {"Barbados", "North America", GS}, {"Belize", "North America", GS},
    {"Canada", "North America", GN}, {"Costa Rica", "North America", GS},
    {"Cuba", "North America", GS}, {"Dominica", "North America", GS},
    {"Dominican Republic", "North America", GS}, {"El Salvador", "North America", GS},
    {"Grenada", "North America", GS}, {"Guatemala", "North America", GS},
    {"Haiti", "North America", GS}, {"Honduras", "North America", GS},
    {"Jamaica", "North America", GS}, {"Mexico", "North America", GS},
    {"Nicaragua", "North America", GS}, {"Panama", "North America", GS},
    {"Puerto Rico", "North America", GS}, {"Saint Lucia", "North America", GS},
    {"Trinidad and Tobago", "North America", GS}, {"United States", "North America", GN},
    // Oceania
    {"Australia", "Oceania", GN}, {"Fiji", "Oceania", GS}, {"Kiribati", "Oceania", GS},
    {"New Zealand", "Oceania", GN}, {"Papua New Guinea", "Oceania", GS}, {"Samoa", "Oceania", GS},
    {"Solomon Islands", "Oceania", GS}, {"Tonga", "Oceania", GS}, {"Vanuatu", "Oceania", GS},
    // South America
    {"Argentina", "South America", GS}, {"Bolivia", "South America", GS},
    {"Brazil", "South America", GS}, {"Chile", "South America", GS},
    {"Colombia", "South America", GS}, {"Ecuador", "South America", GS},
    {"Guyana", "South America", GS}, {"Paraguay", "South America", GS},
    {"Peru", "South America", GS}, {"Suriname", "South America", GS},
    {"Uruguay", "South America", GS}, {"Venezuela", "South America", GS},
};

struct Alias {
  std::string_view alias;
  std::string_view canonical;
};

inline constexpr Alias kAliases[] = {
    {"USA", "United States"},
    {"United States of America", "United States"},
    {"the United States", "United States"},
    {"UK", "United Kingdom"},
    {"the United Kingdom", "United Kingdom"},
    {"Great Britain", "United Kingdom"},
    {"England", "United Kingdom"},
    {"Scotland", "United Kingdom"},
    {"Wales", "United Kingdom"},
    {"Korea", "South Korea"},
    {"Republic of Korea", "South Korea"},
    {"Czechia", "Czech Republic"},
    {"Türkiye", "Turkey"},
    {"Turkiye", "Turkey"},
    {"Côte d'Ivoire", "Ivory Coast"},
    {"Cote d'Ivoire", "Ivory Coast"},
    {"the Netherlands", "Netherlands"},
    {"the Philippines", "Philippines"},
    {"Viet Nam", "Vietnam"},
    {"Russian Federation", "Russia"},
    {"Swaziland", "Eswatini"},
    {"Burma", "Myanmar"},
    {"Macedonia", "North Macedonia"},
    {"DR Congo", "Democratic Republic of the Congo"},
};

}  // namespace detail

inline std::optional<CountryInfo> lookup_country(std::string_view name) {
  auto key = util::trim(name);
  for (const auto& a : detail::kAliases) {
    if (util::iequals(a.alias, key)) {
      key = a.canonical;
      break;
    }
  }
  for (const auto& c : detail::kCountries) {
    if (util::iequals(c.name, key)) return c;
  }
  return std::nullopt;
}

}  // namespace cure
