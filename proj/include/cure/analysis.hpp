#pragma once

// Rank correlation, grouped aggregation, benchmark tables and caption-corpus
// concept frequencies.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "cure/dataset.hpp"
#include "cure/error.hpp"
#include "cure/gold.hpp"
#include "cure/scorers.hpp"
#include "cure/util/csv.hpp"
#include "cure/util/text.hpp"

namespace cure {

// ---------------------------------------------------------------------------
// Spearman

/// Fractional ranks (1-based); tied values share the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    double avg = (double(i) + double(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

struct SpearmanResult {
  std::optional<double> rho;  ///< nullopt when undefined (constant input or n < 2)
  std::size_t n = 0;          ///< pairs used after dropping missing values
};

/// Spearman's rho with average-rank ties. NaN entries mark missing values and
/// are dropped pairwise.
inline SpearmanResult spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    fail(ErrorKind::LengthMismatch,
         "spearman: " + std::to_string(xs.size()) + " vs " + std::to_string(ys.size()) + " values");
  }
  std::vector<double> x, y;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (std::isnan(xs[i]) || std::isnan(ys[i])) continue;
    x.push_back(xs[i]);
    y.push_back(ys[i]);
  }
  SpearmanResult out;
  out.n = x.size();
  if (out.n < 2) return out;
  auto rx = average_ranks(x), ry = average_ranks(y);
  const double mean = (double(out.n) + 1.0) / 2.0;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < out.n; ++i) {
    double dx = rx[i] - mean, dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) return out;
  out.rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  return out;
}

inline std::optional<double> spearman_rho(std::span<const double> xs, std::span<const double> ys) {
  return spearman(xs, ys).rho;
}

inline std::optional<double> spearman_rho(const std::vector<double>& xs, const std::vector<double>& ys) {
  return spearman(std::span<const double>(xs), std::span<const double>(ys)).rho;
}

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline constexpr std::size_t kMinReportedPairs = 3;

// ---------------------------------------------------------------------------
// Correlation tables

struct CorrelationCell {
  std::string scorer_id;
  std::string style;
  std::string encoder;
  GoldQuestion gold_question = GoldQuestion::CURE;
  std::string system_id;
  std::optional<double> rho;  ///< nullopt: undefined or fewer than 3 pairs
  std::size_t n = 0;
  bool bold = false;

  std::string row_label() const {
    std::string s = scorer_id;
    if (!style.empty()) s += "(" + style + ")";
    if (!encoder.empty()) s += " / " + encoder;
    return s;
  }
};

struct TableLayout {
  std::vector<GoldQuestion> questions;
  std::vector<std::string> systems;  ///< empty: every system present in the scores
  std::vector<std::string> scorers;  ///< empty: every scorer present

  /// Rows are scorer x encoder; columns are {CURE, GT, PS} x system.
  static TableLayout standard() { return {{GoldQuestion::CURE, GoldQuestion::GT, GoldQuestion::PS}, {}, {}}; }

  static TableLayout parse(std::string_view name) {
    if (util::iequals(name, "standard") || util::iequals(name, "default")) return standard();
    if (util::iequals(name, "all")) {
      return {{GoldQuestion::CURE, GoldQuestion::GT, GoldQuestion::PS, GoldQuestion::OFF, GoldQuestion::STR}, {}, {}};
    }
    fail(ErrorKind::InvalidArgument, "unknown table layout '" + std::string(name) + "'");
  }
};

struct CorrelationTable {
  std::vector<CorrelationCell> cells;  ///< row-major: rows sorted, then columns in layout order

  std::string to_csv() const {
    std::string out = util::csv_row({"scorer", "style", "encoder", "question", "system", "rho", "n", "bold"});
    for (const auto& c : cells) {
      out += util::csv_row({c.scorer_id, c.style, c.encoder, std::string(to_string(c.gold_question)), c.system_id,
                            c.rho ? util::format_fixed(*c.rho, 6) : "NA", std::to_string(c.n), c.bold ? "1" : "0"});
    }
    return out;
  }

  std::string to_markdown() const {
    std::vector<std::pair<GoldQuestion, std::string>> cols;
    std::vector<std::string> rows;
    std::map<std::pair<std::string, std::pair<GoldQuestion, std::string>>, const CorrelationCell*> at;
    for (const auto& c : cells) {
      auto col = std::make_pair(c.gold_question, c.system_id);
      if (std::find(cols.begin(), cols.end(), col) == cols.end()) cols.push_back(col);
      auto row = c.row_label();
      if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(row);
      at[{row, col}] = &c;
    }
    std::ostringstream o;
    o << "| scorer |";
    for (const auto& [q, s] : cols) o << ' ' << to_string(q) << " · " << s << " |";
    o << "\n|---|";
    for (std::size_t i = 0; i < cols.size(); ++i) o << "---:|";
    o << '\n';
    for (const auto& row : rows) {
      o << "| " << row << " |";
      for (const auto& col : cols) {
        auto it = at.find({row, col});
        if (it == at.end() || !it->second->rho) {
          o << " – |";
        } else {
          auto v = util::format_fixed(*it->second->rho, 2);
          o << ' ' << (it->second->bold ? "**" + v + "**" : v) << " |";
        }
      }
      o << '\n';
    }
    return o.str();
  }
};

/// Pairs each score row with the per-artifact mean gold Likert and computes
/// Spearman's rho per (scorer, style, encoder) x (question, system).
inline CorrelationTable correlation_table(const std::vector<ScoreRecord>& scores, const std::vector<GoldAggregate>& gold,
                                          const TableLayout& layout = TableLayout::standard()) {
  using RowKey = std::tuple<std::string, std::string, std::string>;
  std::map<RowKey, std::map<std::string, std::map<std::string, double>>> by_row;  // row -> system -> artifact -> value
  std::set<std::string> systems_seen;
  for (const auto& s : scores) {
    if (!layout.scorers.empty() &&
        std::find(layout.scorers.begin(), layout.scorers.end(), s.scorer_id) == layout.scorers.end()) {
      continue;
    }
    by_row[{s.scorer_id, s.style, s.encoder_or_vlm}][s.system_id][s.artifact] = s.value;
    systems_seen.insert(s.system_id);
  }
  std::map<std::tuple<std::string, GoldQuestion, std::string>, double> gold_mean;
  for (const auto& g : gold) gold_mean[{g.system_id, g.question, g.artifact}] = g.mean;

  std::vector<std::string> systems = layout.systems;
  if (systems.empty()) systems.assign(systems_seen.begin(), systems_seen.end());

  CorrelationTable t;
  bool any_pair = false;
  for (const auto& [row, per_system] : by_row) {
    for (auto q : layout.questions) {
      for (const auto& sys : systems) {
        CorrelationCell c{std::get<0>(row), std::get<1>(row), std::get<2>(row), q, sys, std::nullopt, 0, false};
        std::vector<double> xs, ys;
        if (auto it = per_system.find(sys); it != per_system.end()) {
          for (const auto& [artifact, value] : it->second) {
            auto g = gold_mean.find({sys, q, artifact});
            if (g == gold_mean.end()) continue;
            xs.push_back(value);
            ys.push_back(g->second);
          }
        }
        auto r = spearman(xs, ys);
        c.n = r.n;
        if (r.n > 0) any_pair = true;
        if (r.n >= kMinReportedPairs) c.rho = r.rho;
        t.cells.push_back(std::move(c));
      }
    }
  }
  if (!any_pair) fail(ErrorKind::EmptyIntersection, "correlation_table: scores and gold share no artifacts");

  std::map<std::pair<GoldQuestion, std::string>, double> best;
  for (const auto& c : t.cells) {
    if (!c.rho) continue;
    auto& b = best.try_emplace({c.gold_question, c.system_id}, -1.0).first->second;
    b = std::max(b, std::abs(*c.rho));
  }
  for (auto& c : t.cells) {
    if (c.rho) c.bold = std::abs(*c.rho) == best[{c.gold_question, c.system_id}];
  }
  return t;
}

// ---------------------------------------------------------------------------
// Grouped aggregation

enum class GroupBy { REGION, SUPERCATEGORY, CONTINENT, GLOBAL_BUCKET };

inline std::string_view to_string(GroupBy g) {
  switch (g) {
    case GroupBy::REGION: return "region";
    case GroupBy::SUPERCATEGORY: return "supercategory";
    case GroupBy::CONTINENT: return "continent";
    case GroupBy::GLOBAL_BUCKET: return "global_bucket";
  }
  return "?";
}

inline GroupBy parse_group_by(std::string_view s) {
  for (auto g : {GroupBy::REGION, GroupBy::SUPERCATEGORY, GroupBy::CONTINENT, GroupBy::GLOBAL_BUCKET}) {
    if (util::iequals(to_string(g), s)) return g;
  }
  if (util::iequals(s, "bucket")) return GroupBy::GLOBAL_BUCKET;
  fail(ErrorKind::InvalidArgument, "unknown grouping '" + std::string(s) + "'");
}

inline std::string group_key(const ArtifactRecord& a, GroupBy g) {
  switch (g) {
    case GroupBy::REGION: return a.region;
    case GroupBy::SUPERCATEGORY: return a.supercategory;
    case GroupBy::CONTINENT: return a.continent;
    case GroupBy::GLOBAL_BUCKET: return std::string(to_string(a.global_bucket));
  }
  return {};
}

struct ArtifactValue {
  std::string artifact;
  double value = 0;
};

struct GroupStat {
  std::string group;
  double mean = 0;
  double std = 0;  ///< population standard deviation
  std::size_t n = 0;
};

inline std::vector<GroupStat> aggregate_values(const std::vector<ArtifactValue>& values, const Dataset& d, GroupBy g) {
  std::map<std::string, std::vector<double>> groups;
  for (const auto& v : values) {
    const auto* a = d.find(v.artifact);
    if (!a) fail(ErrorKind::UnknownGroup, "artifact '" + v.artifact + "' is not in the dataset");
    groups[group_key(*a, g)].push_back(v.value);
  }
  std::vector<GroupStat> out;
  for (const auto& [k, vs] : groups) out.push_back({k, mean_of(vs), pop_std_of(vs), vs.size()});
  return out;
}

/// Score rows for one (scorer, system, style, encoder) grouped by `g`. Empty
/// filter fields match anything.
inline std::vector<GroupStat> aggregate_scores(const std::vector<ScoreRecord>& scores, const Dataset& d, GroupBy g,
                                               const ScoreRecord& filter = {}) {
  auto match = [](const std::string& want, const std::string& have) { return want.empty() || want == have; };
  std::vector<ArtifactValue> v;
  for (const auto& s : scores) {
    if (match(filter.scorer_id, s.scorer_id) && match(filter.system_id, s.system_id) && match(filter.style, s.style) &&
        match(filter.encoder_or_vlm, s.encoder_or_vlm)) {
      v.push_back({s.artifact, s.value});
    }
  }
  return aggregate_values(v, d, g);
}

inline std::vector<GroupStat> aggregate_gold_by(const std::vector<GoldRecord>& gold, const Dataset& d, GroupBy g,
                                                GoldQuestion q, std::optional<std::string_view> system = std::nullopt) {
  std::vector<ArtifactValue> v;
  for (const auto& r : gold) {
    if (r.question == q && (!system || r.system_id == *system)) v.push_back({r.artifact, double(r.likert)});
  }
  return aggregate_values(v, d, g);
}

inline std::string group_stats_to_csv(const std::vector<GroupStat>& stats, GroupBy g) {
  std::string out = util::csv_row({std::string(to_string(g)), "mean", "std", "n"});
  for (const auto& s : stats) {
    out += util::csv_row({s.group, util::format_fixed(s.mean, 6), util::format_fixed(s.std, 6), std::to_string(s.n)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Benchmark report

struct ReportColumn {
  std::string scorer_id;
  std::string style;
  std::string encoder;
  std::string label() const {
    std::string s = scorer_id;
    if (!style.empty()) s += "(" + style + ")";
    if (!encoder.empty()) s += " / " + encoder;
    return s;
  }
  auto operator<=>(const ReportColumn&) const = default;
};

struct ReportCell {
  double mean = 0;
  double std = 0;
  std::size_t n = 0;
};

struct BenchmarkReport {
  std::vector<std::string> systems;
  std::vector<ReportColumn> columns;
  std::map<std::pair<std::string, std::size_t>, ReportCell> cells;  ///< (system, column index)
  std::map<std::string, double> elo;
  std::vector<std::optional<double>> elo_rho;  ///< per column; nullopt when undefined
  std::map<std::string, double> refusal_rate;  ///< percent refused, when known
  std::vector<std::string> flagged;            ///< systems above the refusal threshold
  std::vector<std::string> warnings;

  std::string to_markdown() const {
    std::ostringstream o;
    o << "| system | ELO |";
    for (const auto& c : columns) o << ' ' << c.label() << " |";
    o << "\n|---|---:|";
    for (std::size_t i = 0; i < columns.size(); ++i) o << "---:|";
    o << '\n';
    for (const auto& s : systems) {
      bool flag = std::find(flagged.begin(), flagged.end(), s) != flagged.end();
      o << "| " << s << (flag ? " †" : "") << " | ";
      auto e = elo.find(s);
      o << (e == elo.end() ? std::string("–") : util::format_fixed(e->second, 0)) << " |";
      for (std::size_t i = 0; i < columns.size(); ++i) {
        auto it = cells.find({s, i});
        if (it == cells.end()) o << " – |";
        else o << ' ' << util::format_fixed(it->second.mean, 3) << " ± " << util::format_fixed(it->second.std, 3) << " |";
      }
      o << '\n';
    }
    o << "| ρ with ELO | |";
    for (const auto& r : elo_rho) o << ' ' << (r ? util::format_fixed(*r, 3) : std::string("undefined")) << " |";
    o << '\n';
    if (!flagged.empty()) o << "\n† refusal rate above threshold; scores cover accepted prompts only.\n";
    for (const auto& w : warnings) o << "\nwarning: " << w << '\n';
    return o.str();
  }

  std::string to_csv() const {
    std::string out = util::csv_row({"system", "column", "mean", "std", "n"});
    for (const auto& s : systems) {
      for (std::size_t i = 0; i < columns.size(); ++i) {
        auto it = cells.find({s, i});
        if (it == cells.end()) continue;
        out += util::csv_row({s, columns[i].label(), util::format_fixed(it->second.mean, 6),
                              util::format_fixed(it->second.std, 6), std::to_string(it->second.n)});
      }
    }
    for (std::size_t i = 0; i < columns.size(); ++i) {
      out += util::csv_row({"rho_elo", columns[i].label(), elo_rho[i] ? util::format_fixed(*elo_rho[i], 6) : "NA", "", ""});
    }
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["systems"] = systems;
    auto& cols = j["columns"] = nlohmann::json::array();
    for (std::size_t i = 0; i < columns.size(); ++i) {
      nlohmann::json c{{"scorer", columns[i].scorer_id},
                       {"style", columns[i].style},
                       {"encoder", columns[i].encoder},
                       {"rho_elo", elo_rho[i] ? nlohmann::json(*elo_rho[i]) : nlohmann::json(nullptr)}};
      auto& vals = c["values"] = nlohmann::json::object();
      for (const auto& s : systems) {
        if (auto it = cells.find({s, i}); it != cells.end()) {
          vals[s] = {{"mean", it->second.mean}, {"std", it->second.std}, {"n", it->second.n}};
        }
      }
      cols.push_back(std::move(c));
    }
    j["elo"] = elo;
    j["refusal_rate"] = refusal_rate;
    j["flagged"] = flagged;
    j["warnings"] = warnings;
    return j;
  }
};

struct ReportOptions {
  double refusal_threshold = 10.0;  ///< percent
  std::map<std::string, double> refusal_rate;
};

/// Dataset-wide mean ± std per (system, scorer column), gold columns from the
/// per-artifact mean Likert, and a final row of Spearman rho against ELO.
inline BenchmarkReport benchmark_report(const std::vector<std::string>& systems, const std::vector<ScoreRecord>& scores,
                                        const std::vector<GoldRecord>& gold, const std::map<std::string, double>& elo,
                                        const ReportOptions& opts = {}) {
  BenchmarkReport r;
  r.systems = systems;
  std::map<ReportColumn, std::map<std::string, std::vector<double>>> acc;
  for (const auto& s : scores) {
    if (std::find(systems.begin(), systems.end(), s.system_id) == systems.end()) continue;
    acc[{s.scorer_id, s.style, s.encoder_or_vlm}][s.system_id].push_back(s.value);
  }
  for (const auto& a : aggregate_all(gold)) {
    if (std::find(systems.begin(), systems.end(), a.system_id) == systems.end()) continue;
    acc[{"gold:" + std::string(to_string(a.question)), "", ""}][a.system_id].push_back(a.mean);
  }
  for (const auto& [col, per_system] : acc) {
    auto idx = r.columns.size();
    r.columns.push_back(col);
    for (const auto& [sys, vs] : per_system) r.cells[{sys, idx}] = {mean_of(vs), pop_std_of(vs), vs.size()};
  }

  std::vector<std::string> ranked;
  for (const auto& s : systems) {
    if (auto it = elo.find(s); it != elo.end()) {
      r.elo[s] = it->second;
      ranked.push_back(s);
    } else {
      r.warnings.push_back("no ELO entry for '" + s + "'; omitted from the ELO correlation");
    }
  }
  for (std::size_t i = 0; i < r.columns.size(); ++i) {
    std::vector<double> xs, ys;
    for (const auto& s : ranked) {
      auto it = r.cells.find({s, i});
      xs.push_back(it == r.cells.end() ? kMissing : it->second.mean);
      ys.push_back(r.elo[s]);
    }
    r.elo_rho.push_back(spearman(xs, ys).rho);
  }
  for (const auto& [s, rate] : opts.refusal_rate) {
    if (std::find(systems.begin(), systems.end(), s) == systems.end()) continue;
    r.refusal_rate[s] = rate;
    if (rate > opts.refusal_threshold) r.flagged.push_back(s);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Concept frequency

struct FrequencyOptions {
  bool word_boundary = false;
  std::size_t jobs = 0;  ///< 0: hardware concurrency
};

namespace freq_detail {

inline bool word_char(unsigned char c) { return std::isalnum(c) || c >= 0x80 || c == '_'; }

inline bool contains(const std::string& hay, const std::string& needle, bool word_boundary) {
  if (needle.empty()) return false;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) {
    if (!word_boundary) return true;
    bool left = pos == 0 || !word_char(static_cast<unsigned char>(hay[pos - 1]));
    auto end = pos + needle.size();
    bool right = end == hay.size() || !word_char(static_cast<unsigned char>(hay[end]));
    if (left && right) return true;
  }
  return false;
}

}  // namespace freq_detail

/// Streams captions from `in` (one per line; TSV files use the column headed
/// "caption") and counts, per name, the captions that mention it.
inline std::vector<std::size_t> count_concepts(std::istream& in, const std::vector<std::string>& names,
                                               const FrequencyOptions& opts = {}, bool tsv = false) {
  std::vector<std::string> needles;
  for (const auto& n : names) needles.push_back(util::to_lower(n));
  std::vector<std::size_t> counts(names.size(), 0);
  std::optional<std::size_t> caption_col;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string caption;
    if (tsv) {
      auto fields = util::split(line, '\t');
      if (first) {
        first = false;
        for (std::size_t i = 0; i < fields.size(); ++i) {
          if (util::iequals(util::trim(fields[i]), "caption")) caption_col = i;
        }
        if (!caption_col) fail(ErrorKind::Parse, "TSV corpus lacks a 'caption' column");
        continue;
      }
      if (*caption_col >= fields.size()) continue;
      caption = util::to_lower(fields[*caption_col]);
    } else {
      caption = util::to_lower(line);
    }
    for (std::size_t i = 0; i < needles.size(); ++i) {
      if (freq_detail::contains(caption, needles[i], opts.word_boundary)) ++counts[i];
    }
  }
  return counts;
}

inline std::vector<std::size_t> count_concepts(std::string_view text, const std::vector<std::string>& names,
                                               const FrequencyOptions& opts = {}, bool tsv = false) {
  std::istringstream in{std::string(text)};
  return count_concepts(in, names, opts, tsv);
}

/// Counts over several shard files in parallel and merges the totals.
inline std::map<std::string, std::size_t> concept_frequency(const std::vector<std::filesystem::path>& shards,
                                                            const std::vector<std::string>& names,
                                                            const FrequencyOptions& opts = {}) {
  std::vector<std::size_t> total(names.size(), 0);
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::optional<Error> first_error;
  auto worker = [&] {
    for (std::size_t i = next++; i < shards.size(); i = next++) {
      try {
        std::ifstream in(shards[i], std::ios::binary);
        if (!in) fail(ErrorKind::Io, "cannot read corpus shard " + shards[i].string());
        bool tsv = shards[i].extension() == ".tsv";
        auto c = count_concepts(in, names, opts, tsv);
        std::lock_guard lock(mu);
        for (std::size_t k = 0; k < c.size(); ++k) total[k] += c[k];
      } catch (const Error& e) {
        std::lock_guard lock(mu);
        if (!first_error) first_error = e;
      }
    }
  };
  std::size_t jobs = opts.jobs ? opts.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, std::max<std::size_t>(1, shards.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (first_error) throw *first_error;

  std::map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < names.size(); ++i) out[names[i]] = total[i];
  return out;
}

inline std::string frequency_to_csv(const std::map<std::string, std::size_t>& counts) {
  std::string out = util::csv_row({"artifact", "count"});
  for (const auto& [n, c] : counts) out += util::csv_row({n, std::to_string(c)});
  return out;
}

struct HistogramBin {
  std::size_t lo = 0;  ///< inclusive
  std::size_t hi = 0;  ///< exclusive
  std::size_t artifacts = 0;
};

/// Decade bins: [0,1), [1,10), [10,100), ...
inline std::vector<HistogramBin> log_histogram(const std::map<std::string, std::size_t>& counts) {
  std::size_t max = 0;
  for (const auto& [_, c] : counts) max = std::max(max, c);
  std::vector<HistogramBin> bins{{0, 1, 0}};
  for (std::size_t lo = 1; lo <= max; lo *= 10) bins.push_back({lo, lo * 10, 0});
  for (const auto& [_, c] : counts) {
    for (auto& b : bins) {
      if (c >= b.lo && c < b.hi) {
        ++b.artifacts;
        break;
      }
    }
  }
  return bins;
}

inline std::string histogram_to_csv(const std::vector<HistogramBin>& bins) {
  std::string out = util::csv_row({"lo", "hi", "artifacts"});
  for (const auto& b : bins) out += util::csv_row({std::to_string(b.lo), std::to_string(b.hi), std::to_string(b.artifacts)});
  return out;
}

}  // namespace cure
