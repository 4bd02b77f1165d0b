#pragma once

// Human (gold) judgments: ingest, Likert normalization, per-artifact
// aggregation, and ranking agreement via normalized Kendall tau distance.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "cure/embed.hpp"
#include "cure/error.hpp"
#include "cure/util/csv.hpp"
#include "cure/util/fs.hpp"
#include "cure/util/hash.hpp"
#include "cure/util/text.hpp"

namespace cure {

enum class GoldQuestion { CURE, GT, PS, OFF, STR };

inline std::string_view to_string(GoldQuestion q) {
  switch (q) {
    case GoldQuestion::CURE: return "CURE";
    case GoldQuestion::GT: return "GT";
    case GoldQuestion::PS: return "PS";
    case GoldQuestion::OFF: return "OFF";
    case GoldQuestion::STR: return "STR";
  }
  return "?";
}

inline std::optional<GoldQuestion> parse_question(std::string_view s) {
  for (auto q : {GoldQuestion::CURE, GoldQuestion::GT, GoldQuestion::PS, GoldQuestion::OFF, GoldQuestion::STR}) {
    if (util::iequals(to_string(q), s)) return q;
  }
  return std::nullopt;
}

/// Ranking of ground-truth image labels, most similar first (e.g. "bdac").
using Ranking = std::string;

struct GoldRecord {
  std::string system_id;
  std::string artifact;
  std::string worker_id;  ///< salted hash, never the raw id
  GoldQuestion question = GoldQuestion::CURE;
  int likert = 0;
  std::optional<Ranking> ranking;
  std::string free_text;
  std::string style = "mixed";

  bool operator==(const GoldRecord&) const = default;
};

struct GoldReject {
  std::size_t line = 0;
  std::string reason;
  std::string detail;
};

struct GoldIngest {
  std::vector<GoldRecord> records;
  std::vector<GoldReject> rejects;
};

inline std::string anonymize_worker(std::string_view worker, std::string_view salt) {
  return util::sha256_hex(std::string(salt) + "\x1f" + std::string(worker)).substr(0, 16);
}

/// Parses "a,b,c,d", "a b c d", "a;b;c;d" or "abcd". Returns nullopt unless the
/// result is a permutation of the first four letters.
inline std::optional<Ranking> parse_ranking(std::string_view s, std::size_t expected = 4) {
  Ranking r;
  for (char c : s) {
    if (c == ',' || c == ';' || c == ' ' || c == '>' || c == '\t') continue;
    r.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (r.size() != expected) return std::nullopt;
  auto sorted = r;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < expected; ++i) {
    if (sorted[i] != static_cast<char>('a' + i)) return std::nullopt;
  }
  return r;
}

inline const std::vector<std::string>& gold_columns() {
  static const std::vector<std::string> c = {"system", "artifact", "worker", "question", "likert", "ranking", "free_text"};
  return c;
}

/// Reads a gold CSV export. Invalid rows are collected in `rejects`; only an
/// unreadable or headerless file throws.
inline GoldIngest parse_gold_csv(std::string_view text, std::string_view salt = "cure") {
  std::vector<std::vector<std::string>> rows;
  try {
    rows = util::parse_csv(text);
  } catch (const Error& e) {
    fail(ErrorKind::Parse, std::string("gold CSV: ") + e.what());
  }
  if (rows.empty()) fail(ErrorKind::Parse, "gold CSV: missing header");

  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < rows[0].size(); ++i) col[util::to_lower(util::trim(rows[0][i]))] = i;
  for (const auto& c : gold_columns()) {
    if (!col.count(c)) fail(ErrorKind::Parse, "gold CSV: header lacks column '" + c + "'");
  }
  std::optional<std::size_t> style_col;
  if (auto it = col.find("style"); it != col.end()) style_col = it->second;

  GoldIngest out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::size_t line = r + 1;
    auto get = [&](const std::string& name) -> std::string {
      auto i = col.at(name);
      return i < row.size() ? std::string(util::trim(row[i])) : std::string{};
    };
    auto reject = [&](std::string reason, std::string detail) {
      out.rejects.push_back({line, std::move(reason), std::move(detail)});
    };

    GoldRecord g;
    g.system_id = get("system");
    g.artifact = get("artifact");
    auto worker = get("worker");
    if (g.system_id.empty() || g.artifact.empty() || worker.empty()) {
      reject("missing-field", "system, artifact and worker are required");
      continue;
    }
    g.worker_id = anonymize_worker(worker, salt);

    auto q = parse_question(get("question"));
    if (!q) {
      reject("unknown-question", get("question"));
      continue;
    }
    g.question = *q;

    auto likert = get("likert");
    if (likert.empty()) {
      reject("likert-missing", "");
      continue;
    }
    try {
      std::size_t used = 0;
      int v = std::stoi(likert, &used);
      if (used != likert.size()) throw std::invalid_argument("trailing");
      g.likert = v;
    } catch (const std::exception&) {
      reject("likert-range", likert);
      continue;
    }
    if (g.likert < 1 || g.likert > 5) {
      reject("likert-range", likert);
      continue;
    }

    if (auto rk = get("ranking"); !rk.empty()) {
      g.ranking = parse_ranking(rk);
      if (!g.ranking) {
        reject("not-a-permutation", rk);
        continue;
      }
    }
    auto ft = col.at("free_text");
    g.free_text = ft < row.size() ? row[ft] : std::string{};
    if (style_col && *style_col < row.size() && !util::trim(row[*style_col]).empty()) {
      g.style = std::string(util::trim(row[*style_col]));
    }
    out.records.push_back(std::move(g));
  }
  return out;
}

inline GoldIngest ingest_gold(const std::filesystem::path& path, std::string_view salt = "cure") {
  return parse_gold_csv(util::read_text(path), salt);
}

/// Maps a 1-5 Likert score onto [0, 1].
inline double normalize_likert(int x) {
  if (x < 1 || x > 5) fail(ErrorKind::LikertRange, "Likert value " + std::to_string(x) + " outside 1-5");
  return (x - 1) / 4.0;
}

struct GoldAggregate {
  std::string system_id;
  std::string artifact;
  GoldQuestion question = GoldQuestion::CURE;
  double mean = 0;
  double std = 0;  ///< population standard deviation
  std::size_t n_workers = 0;
};

inline double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

inline double pop_std_of(const std::vector<double>& v) {
  double m = mean_of(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / double(v.size()));
}

/// Mean/std of worker Likerts for one (artifact, question), optionally
/// restricted to one system.
inline GoldAggregate aggregate_gold(const std::vector<GoldRecord>& records, std::string_view artifact,
                                    GoldQuestion question, std::optional<std::string_view> system = std::nullopt) {
  std::vector<double> v;
  for (const auto& r : records) {
    if (r.artifact == artifact && r.question == question && (!system || r.system_id == *system)) {
      v.push_back(r.likert);
    }
  }
  if (v.empty()) {
    fail(ErrorKind::EmptySet, "no gold records for '" + std::string(artifact) + "' / " + std::string(to_string(question)));
  }
  return {system ? std::string(*system) : std::string{}, std::string(artifact), question, mean_of(v), pop_std_of(v),
          v.size()};
}

/// One aggregate per (system, artifact, question) present in `records`, sorted.
inline std::vector<GoldAggregate> aggregate_all(const std::vector<GoldRecord>& records) {
  std::map<std::tuple<std::string, std::string, GoldQuestion>, std::vector<double>> groups;
  for (const auto& r : records) groups[{r.system_id, r.artifact, r.question}].push_back(r.likert);
  std::vector<GoldAggregate> out;
  for (const auto& [k, v] : groups) {
    out.push_back({std::get<0>(k), std::get<1>(k), std::get<2>(k), mean_of(v), pop_std_of(v), v.size()});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ranking agreement

/// Number of label pairs ordered differently by the two rankings.
inline std::size_t kendall_distance(const Ranking& x, const Ranking& y) {
  if (x.size() != y.size()) fail(ErrorKind::LengthMismatch, "rankings differ in length");
  std::map<char, std::size_t> pos_y;
  for (std::size_t i = 0; i < y.size(); ++i) pos_y[y[i]] = i;
  if (pos_y.size() != y.size()) fail(ErrorKind::InvalidArgument, "ranking has repeated labels");
  for (char c : x) {
    if (!pos_y.count(c)) fail(ErrorKind::LengthMismatch, "rankings rank different label sets");
  }
  std::size_t d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      if (pos_y[x[i]] > pos_y[x[j]]) ++d;
    }
  }
  return d;
}

/// 1 - KD / max(KD), in [0, 1].
inline double pair_agreement(const Ranking& x, const Ranking& y) {
  auto n = x.size();
  if (n < 2) {
    if (x.size() != y.size()) fail(ErrorKind::LengthMismatch, "rankings differ in length");
    return 1.0;
  }
  double max_kd = double(n * (n - 1) / 2);
  return 1.0 - double(kendall_distance(x, y)) / max_kd;
}

/// Without an encoder ranking: mean agreement over all worker pairs.
/// With one: mean agreement between the encoder ranking and each worker.
inline double ranking_agreement(const std::vector<Ranking>& workers, const std::optional<Ranking>& encoder = std::nullopt) {
  double sum = 0;
  std::size_t pairs = 0;
  if (encoder) {
    if (workers.empty()) fail(ErrorKind::InvalidArgument, "ranking_agreement needs at least one worker ranking");
    for (const auto& w : workers) {
      sum += pair_agreement(w, *encoder);
      ++pairs;
    }
  } else {
    if (workers.size() < 2) fail(ErrorKind::InvalidArgument, "ranking_agreement needs at least two worker rankings");
    for (std::size_t i = 0; i < workers.size(); ++i) {
      for (std::size_t j = i + 1; j < workers.size(); ++j) {
        sum += pair_agreement(workers[i], workers[j]);
        ++pairs;
      }
    }
  }
  return sum / double(pairs);
}

/// Ground-truth labels ordered by descending mean cosine to the generated
/// images. Ties keep label order.
inline Ranking encoder_ranking(const EmbeddingSet& ground_truth, const EmbeddingSet& generated,
                               std::string_view labels = "abcd") {
  if (ground_truth.size() != labels.size()) {
    fail(ErrorKind::LengthMismatch, "encoder_ranking: one label per ground-truth image required");
  }
  std::vector<std::pair<double, std::size_t>> sims;
  for (std::size_t i = 0; i < ground_truth.size(); ++i) {
    Matrix row = ground_truth.rows().row(Eigen::Index(i));
    sims.emplace_back(cosine_set_similarity(row, generated.rows()), i);
  }
  std::stable_sort(sims.begin(), sims.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  Ranking r;
  for (const auto& [_, i] : sims) r.push_back(labels[i]);
  return r;
}

}  // namespace cure
