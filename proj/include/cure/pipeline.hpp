#pragma once

// Stage orchestration: validate -> generate -> embed -> score -> correlate ->
// report, driven by one JSON run config. Every stage reads its inputs from the
// previous stage's outputs on disk, so stages can be re-run independently.

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cure/adapters/command.hpp"
#include "cure/adapters/mock.hpp"
#include "cure/analysis.hpp"
#include "cure/dataset.hpp"
#include "cure/embed.hpp"
#include "cure/error.hpp"
#include "cure/genpipe.hpp"
#include "cure/gold.hpp"
#include "cure/prompts.hpp"
#include "cure/scorers.hpp"
#include "cure/util/fs.hpp"
#include "cure/util/hash.hpp"
#include "cure/vendi.hpp"

namespace cure {

enum class Stage { Validate, Generate, Embed, Score, Correlate, Report };

inline constexpr std::array<Stage, 6> kAllStages = {Stage::Validate, Stage::Generate,  Stage::Embed,
                                                    Stage::Score,    Stage::Correlate, Stage::Report};

inline std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Validate: return "validate";
    case Stage::Generate: return "generate";
    case Stage::Embed: return "embed";
    case Stage::Score: return "score";
    case Stage::Correlate: return "correlate";
    case Stage::Report: return "report";
  }
  return "?";
}

inline Stage parse_stage(std::string_view s) {
  for (auto st : kAllStages) {
    if (util::iequals(to_string(st), s)) return st;
  }
  fail(ErrorKind::InvalidArgument, "unknown stage '" + std::string(s) + "'");
}

// Exit codes for the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitPrerequisite = 3;
inline constexpr int kExitAdapter = 4;

inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::Parse:
    case ErrorKind::Schema:
    case ErrorKind::MissingField:
    case ErrorKind::InvalidArgument:
      return kExitValidation;
    case ErrorKind::Prerequisite:
    case ErrorKind::MissingEmbedding:
      return kExitPrerequisite;
    case ErrorKind::Adapter:
    case ErrorKind::Encoder:
    case ErrorKind::Transport:
      return kExitAdapter;
    default:
      return kExitFailure;
  }
}

// ---------------------------------------------------------------------------
// Config

struct AdapterSpec {
  std::string id;
  std::string kind;
  nlohmann::json options = nlohmann::json::object();
};

struct RunConfig {
  std::filesystem::path dataset;
  std::optional<std::filesystem::path> gold;
  std::vector<AdapterSpec> systems;
  std::vector<AdapterSpec> encoders;
  std::vector<AdapterSpec> vlms;
  AdapterSpec dissimilarity{"pixel-l1", "pixel", nlohmann::json::object()};
  std::vector<PromptStyle> styles{PromptStyle::N, PromptStyle::NC, PromptStyle::NR, PromptStyle::NCR, PromptStyle::C};
  SeedPolicy seeds;
  std::filesystem::path output_dir;
  std::filesystem::path image_root;
  std::filesystem::path embedding_root;
  std::map<std::string, double> elo;
  double refusal_threshold = 10.0;
  bool expect_released = false;
  std::size_t jobs = 1;

  /// Fully resolved config (absolute paths, defaults filled in). Re-parsing it
  /// reproduces this config exactly.
  nlohmann::json to_json() const {
    auto adapters = [](const std::vector<AdapterSpec>& v) {
      auto a = nlohmann::json::array();
      for (const auto& s : v) {
        auto j = s.options;
        j["id"] = s.id;
        j["kind"] = s.kind;
        a.push_back(std::move(j));
      }
      return a;
    };
    nlohmann::json j;
    j["dataset"] = dataset.string();
    j["gold"] = gold ? nlohmann::json(gold->string()) : nlohmann::json(nullptr);
    j["systems"] = adapters(systems);
    j["encoders"] = adapters(encoders);
    j["vlms"] = adapters(vlms);
    j["dissimilarity"] = adapters({dissimilarity})[0];
    auto st = nlohmann::json::array();
    for (auto s : styles) st.push_back(std::string(to_string(s)));
    j["styles"] = st;
    j["seed_policy"] = {{"default", seeds.default_seeds}, {"category", seeds.category_seeds}, {"overrides", seeds.overrides}};
    j["output_dir"] = output_dir.string();
    j["image_root"] = image_root.string();
    j["embedding_root"] = embedding_root.string();
    j["elo"] = elo;
    j["refusal_threshold"] = refusal_threshold;
    j["expect_released"] = expect_released;
    j["jobs"] = jobs;
    return j;
  }

  std::string hash() const { return util::sha256_hex(to_json().dump()); }
};

namespace pipeline_detail {

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal();
}

inline std::vector<AdapterSpec> adapters(const nlohmann::json& j, const char* key) {
  std::vector<AdapterSpec> out;
  auto it = j.find(key);
  if (it == j.end()) return out;
  if (!it->is_array()) fail(ErrorKind::Schema, std::string("run config: '") + key + "' must be an array");
  std::set<std::string> ids;
  for (const auto& e : *it) {
    AdapterSpec s;
    s.id = e.at("id").get<std::string>();
    s.kind = e.value("kind", std::string("mock"));
    s.options = e;
    s.options.erase("id");
    s.options.erase("kind");
    if (s.id.empty()) fail(ErrorKind::Schema, std::string("run config: empty id in '") + key + "'");
    if (!ids.insert(s.id).second) fail(ErrorKind::Schema, "run config: duplicate adapter id '" + s.id + "'");
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace pipeline_detail

/// Relative paths resolve against `base` (normally the config file's folder).
inline RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base) {
  using pipeline_detail::resolve;
  RunConfig c;
  try {
    c.dataset = resolve(base, j.at("dataset").get<std::string>());
    if (auto g = j.find("gold"); g != j.end() && g->is_string()) c.gold = resolve(base, g->get<std::string>());
    c.systems = pipeline_detail::adapters(j, "systems");
    c.encoders = pipeline_detail::adapters(j, "encoders");
    c.vlms = pipeline_detail::adapters(j, "vlms");
    if (auto d = j.find("dissimilarity"); d != j.end()) {
      c.dissimilarity.id = d->value("id", std::string("pixel-l1"));
      c.dissimilarity.kind = d->value("kind", std::string("pixel"));
    }
    if (auto s = j.find("styles"); s != j.end()) {
      c.styles.clear();
      for (const auto& v : *s) {
        auto st = parse_style_or_throw(v.get<std::string>());
        if (!is_generation_style(st)) fail(ErrorKind::Schema, "run config: '" + v.get<std::string>() + "' is not a generation style");
        c.styles.push_back(st);
      }
    }
    if (auto sp = j.find("seed_policy"); sp != j.end()) {
      c.seeds.default_seeds = sp->value("default", c.seeds.default_seeds);
      c.seeds.category_seeds = sp->value("category", c.seeds.category_seeds);
      if (auto o = sp->find("overrides"); o != sp->end()) c.seeds.overrides = o->get<std::map<std::string, std::size_t>>();
    }
    c.output_dir = resolve(base, j.value("output_dir", std::string("out")));
    c.image_root = j.contains("image_root") ? resolve(base, j["image_root"].get<std::string>()) : c.output_dir / "images";
    c.embedding_root =
        j.contains("embedding_root") ? resolve(base, j["embedding_root"].get<std::string>()) : c.output_dir / "embeddings";
    if (auto e = j.find("elo"); e != j.end()) c.elo = e->get<std::map<std::string, double>>();
    c.refusal_threshold = j.value("refusal_threshold", c.refusal_threshold);
    c.expect_released = j.value("expect_released", false);
    c.jobs = std::max<std::size_t>(1, j.value("jobs", std::size_t{1}));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Schema, std::string("run config: ") + e.what());
  }
  if (c.systems.empty()) fail(ErrorKind::Schema, "run config: no systems");
  if (c.seeds.default_seeds == 0 || c.seeds.category_seeds == 0) fail(ErrorKind::Schema, "run config: seed counts must be positive");
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& p) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(util::read_text(p));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::Parse, p.string() + ": " + e.what());
  }
  // A run manifest carries its resolved config under "config".
  if (j.contains("config") && j["config"].is_object()) j = j["config"];
  return parse_run_config(j, std::filesystem::absolute(p).parent_path());
}

// ---------------------------------------------------------------------------
// Adapter registry

struct Adapters {
  std::vector<std::unique_ptr<T2IBackend>> systems;
  std::vector<std::unique_ptr<ImageEncoder>> encoders;
  std::vector<std::unique_ptr<VlmAdapter>> vlms;
  std::unique_ptr<Dissimilarity> dissimilarity;

  nlohmann::json versions() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& s : systems) j.push_back({{"role", "t2i"}, {"id", s->system_id()}, {"version", s->version()}});
    for (const auto& e : encoders) j.push_back({{"role", "encoder"}, {"id", e->id()}, {"version", e->version()}});
    for (const auto& v : vlms) j.push_back({{"role", "vlm"}, {"id", v->id()}, {"version", v->version()}});
    if (dissimilarity) {
      j.push_back({{"role", "dissimilarity"}, {"id", dissimilarity->id()}, {"version", dissimilarity->version()}});
    }
    return j;
  }
};

namespace pipeline_detail {

class NamedPixelDissimilarity : public PixelDissimilarity {
 public:
  explicit NamedPixelDissimilarity(std::string id) : id_(std::move(id)) {}
  std::string id() const override { return id_; }

 private:
  std::string id_;
};

inline std::string required_option(const AdapterSpec& s, const char* key) {
  auto it = s.options.find(key);
  if (it == s.options.end() || !it->is_string() || it->get<std::string>().empty()) {
    fail(ErrorKind::Adapter, "adapter '" + s.id + "' (" + s.kind + ") needs option '" + key + "'");
  }
  return it->get<std::string>();
}

}  // namespace pipeline_detail

inline Adapters make_adapters(const RunConfig& c) {
  using pipeline_detail::required_option;
  Adapters a;
  for (const auto& s : c.systems) {
    if (s.kind == "mock") {
      mock::RefusalRule rule;
      rule.substrings = s.options.value("refuse_substrings", std::vector<std::string>{});
      auto seeds = s.options.value("refuse_seeds", std::vector<std::uint64_t>{});
      rule.seeds.insert(seeds.begin(), seeds.end());
      a.systems.push_back(std::make_unique<mock::MockT2IBackend>(s.id, rule));
    } else if (s.kind == "command") {
      a.systems.push_back(std::make_unique<command::CommandT2IBackend>(
          s.id, required_option(s, "command"), s.options.value("version", std::string("command/1")),
          s.options.value("supports_seed", true), s.options.value("rate_per_minute", 0.0)));
    } else {
      fail(ErrorKind::Adapter, "system '" + s.id + "': unknown adapter kind '" + s.kind + "'");
    }
  }
  auto make_encoder = [&](const AdapterSpec& s) -> std::unique_ptr<VlmAdapter> {
    if (s.kind == "mock") return std::make_unique<mock::MockVlm>(s.id);
    if (s.kind == "command") {
      return std::make_unique<command::CommandEncoder>(s.id, required_option(s, "image_command"),
                                                       s.options.value("text_command", std::string{}),
                                                       s.options.value("version", std::string("command/1")));
    }
    fail(ErrorKind::Adapter, "encoder '" + s.id + "': unknown adapter kind '" + s.kind + "'");
  };
  for (const auto& s : c.encoders) {
    if (s.kind == "mock") a.encoders.push_back(std::make_unique<mock::MockEncoder>(s.id));
    else a.encoders.push_back(make_encoder(s));
  }
  for (const auto& s : c.vlms) a.vlms.push_back(make_encoder(s));
  if (c.dissimilarity.kind == "pixel") {
    a.dissimilarity = std::make_unique<pipeline_detail::NamedPixelDissimilarity>(c.dissimilarity.id);
  } else {
    fail(ErrorKind::Adapter, "dissimilarity '" + c.dissimilarity.id + "': unknown kind '" + c.dissimilarity.kind + "'");
  }
  return a;
}

// ---------------------------------------------------------------------------
// Stage outputs

struct StagePaths {
  std::filesystem::path out;
  std::filesystem::path validation() const { return out / "validation.json"; }
  std::filesystem::path generation(std::string_view system) const {
    return out / "generation" / (util::path_slug(system) + ".json");
  }
  std::filesystem::path embed_index() const { return out / "embed" / "index.json"; }
  std::filesystem::path scores_jsonl() const { return out / "scores" / "scores.jsonl"; }
  std::filesystem::path scores_csv() const { return out / "scores" / "scores.csv"; }
  std::filesystem::path correlation_csv() const { return out / "correlation" / "correlation.csv"; }
  std::filesystem::path correlation_md() const { return out / "correlation" / "correlation.md"; }
  std::filesystem::path report(std::string_view ext) const { return out / "report" / ("report." + std::string(ext)); }
  std::filesystem::path manifest() const { return out / "run_manifest.json"; }
};

inline constexpr std::string_view kGroundTruthSystem = "_gt";
inline constexpr std::string_view kGroundTruthStyle = "GT";

struct StageRecord {
  Stage stage;
  double seconds = 0;
  std::string status;
};

struct RunResult {
  int exit_code = kExitOk;
  std::string message;
  std::vector<StageRecord> stages;
  std::vector<std::string> warnings;
};

class Pipeline {
 public:
  Pipeline(RunConfig config, std::ostream* log = nullptr)
      : cfg_(std::move(config)), paths_{cfg_.output_dir}, log_(log) {}

  const RunConfig& config() const { return cfg_; }
  const StagePaths& paths() const { return paths_; }

  RunResult run(const std::vector<Stage>& stages) {
    RunResult result;
    try {
      prepare_output_dir();
      adapters_ = make_adapters(cfg_);
      dataset_ = load_dataset(cfg_.dataset);
      for (auto st : stages) {
        auto t0 = std::chrono::steady_clock::now();
        note(std::string("stage ") + std::string(to_string(st)));
        run_stage(st);
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.stages.push_back({st, secs, "ok"});
      }
    } catch (const Error& e) {
      result.exit_code = exit_code_for(e.kind());
      result.message = e.what();
    } catch (const std::exception& e) {
      result.exit_code = kExitFailure;
      result.message = e.what();
    }
    result.warnings = warnings_;
    write_manifest(result);
    return result;
  }

 private:
  void note(const std::string& s) {
    if (log_) *log_ << s << '\n';
  }
  void warn(std::string s) {
    note("warning: " + s);
    warnings_.push_back(std::move(s));
  }

  void prepare_output_dir() {
    std::error_code ec;
    std::filesystem::create_directories(cfg_.output_dir, ec);
    auto probe = cfg_.output_dir / ".write-probe";
    try {
      util::atomic_write(probe, std::string_view("ok"));
    } catch (const Error&) {
      fail(ErrorKind::InvalidArgument, "output dir '" + cfg_.output_dir.string() + "' is not writable");
    }
    std::filesystem::remove(probe, ec);
  }

  void run_stage(Stage st) {
    switch (st) {
      case Stage::Validate: return stage_validate();
      case Stage::Generate: return stage_generate();
      case Stage::Embed: return stage_embed();
      case Stage::Score: return stage_score();
      case Stage::Correlate: return stage_correlate();
      case Stage::Report: return stage_report();
    }
  }

  static void prerequisite(const std::filesystem::path& p, std::string_view stage) {
    if (!std::filesystem::exists(p)) {
      fail(ErrorKind::Prerequisite, "missing " + p.string() + "; run the '" + std::string(stage) + "' stage first");
    }
  }

  // -- validate ------------------------------------------------------------

  void stage_validate() {
    auto report = validate_dataset(dataset_, cfg_.expect_released ? std::optional(ExpectedStats::released()) : std::nullopt);
    util::atomic_write(paths_.validation(), report.to_json().dump(2) + "\n");
    for (const auto& w : dataset_.warnings()) warn(w);
    if (!report.pass) fail(ErrorKind::Schema, "dataset validation failed; see " + paths_.validation().string());
  }

  // -- generate ------------------------------------------------------------

  void stage_generate() {
    ImageStore store(cfg_.image_root);
    for (auto& backend : adapters_.systems) {
      Generator gen(*backend, store);
      std::vector<GenerationJob> jobs;
      std::set<std::pair<std::string, PromptStyle>> seen;
      for (const auto* a : dataset_.admitted()) {
        for (auto st : cfg_.styles) {
          if (!seen.insert({artifact_slot(*a, st), st}).second) continue;
          jobs.push_back({a, st, cfg_.seeds.seeds_for(backend->system_id(), st)});
        }
      }
      auto sets = generate_all(gen, jobs, cfg_.jobs);
      nlohmann::json j;
      j["system"] = backend->system_id();
      j["version"] = backend->version();
      auto& arr = j["sets"] = nlohmann::json::array();
      std::size_t failed = 0;
      for (const auto& s : sets) {
        arr.push_back(to_json(s));
        for (const auto& e : s.entries) failed += e.failed;
      }
      if (failed) warn(backend->system_id() + ": " + std::to_string(failed) + " seeds failed after retries");
      util::atomic_write(paths_.generation(backend->system_id()), j.dump(1) + "\n");
      note("  " + backend->system_id() + ": " + std::to_string(sets.size()) + " image sets");
    }
  }

  std::vector<GeneratedImageSet> load_generation(const std::string& system) const {
    auto p = paths_.generation(system);
    prerequisite(p, "generate");
    return load_generation_manifest(p);
  }

  // -- embed ---------------------------------------------------------------

  std::vector<ImageRef> ground_truth_refs(const ArtifactRecord& a) {
    std::vector<ImageRef> refs;
    auto base = cfg_.dataset.parent_path();
    for (std::size_t i = 0; i < a.ground_truth.size(); ++i) {
      const auto& g = a.ground_truth[i];
      if (g.starts_with("http://") || g.starts_with("https://") || g.starts_with("File:")) return {};
      refs.push_back({i, pipeline_detail::resolve(base, g)});
    }
    return refs;
  }

  std::vector<ImageEncoder*> image_encoders() const {
    std::vector<ImageEncoder*> out;
    for (const auto& e : adapters_.encoders) out.push_back(e.get());
    for (const auto& v : adapters_.vlms) out.push_back(v.get());
    return out;
  }

  void stage_embed() {
    EmbeddingCache cache(cfg_.embedding_root);
    nlohmann::json index;
    auto& entries = index["entries"] = nlohmann::json::array();
    auto& skipped = index["skipped"] = nlohmann::json::array();
    auto record = [&](const EmbedResult& r) {
      entries.push_back({{"key", r.set.key().describe()}, {"rows", r.set.size()}});
      for (const auto& s : r.skipped) skipped.push_back({{"path", s.path.string()}, {"reason", s.reason}});
    };

    for (auto* enc : image_encoders()) {
      for (const auto& backend : adapters_.systems) {
        for (const auto& set : load_generation(backend->system_id())) {
          std::vector<ImageRef> refs;
          for (const auto& e : set.entries) {
            if (e.image_ref) refs.push_back({e.seed, *e.image_ref});
          }
          record(embed_images(*enc, refs, {enc->id(), set.system_id, set.artifact, std::string(to_string(set.style))},
                              &cache));
        }
      }
      for (const auto* a : dataset_.admitted()) {
        auto refs = ground_truth_refs(*a);
        if (refs.empty()) {
          warn("'" + a->name + "': ground-truth images are not local; GT scores skipped");
          continue;
        }
        record(embed_images(*enc, refs,
                            {enc->id(), std::string(kGroundTruthSystem), a->name, std::string(kGroundTruthStyle)},
                            &cache));
      }
    }
    for (const auto& vlm : adapters_.vlms) {
      for (const auto* a : dataset_.admitted()) {
        for (auto st : kEvalStyles) embed_text(*vlm, render_eval_prompt(*a, st), &cache);
      }
    }
    cache.write_manifest();
    util::atomic_write(paths_.embed_index(), index.dump(1) + "\n");
  }

  // -- score ---------------------------------------------------------------

  std::optional<EmbeddingSet> cached(const EmbeddingCache& cache, const std::string& enc, const std::string& system,
                                     const std::string& artifact, std::string_view style) const {
    auto s = cache.load({enc, system, artifact, std::string(style)});
    if (s && s->empty()) return std::nullopt;
    return s;
  }

  bool uses(PromptStyle st) const { return std::find(cfg_.styles.begin(), cfg_.styles.end(), st) != cfg_.styles.end(); }

  void stage_score() {
    prerequisite(paths_.embed_index(), "embed");
    EmbeddingCache cache(cfg_.embedding_root);
    std::vector<ScoreRecord> out;
    auto emit = [&](std::string scorer, const std::string& system, const std::string& artifact, std::string style,
                    const std::string& enc, double value, std::size_t seeds, const std::string& version) {
      ScoreRecord r{std::move(scorer), system, artifact, std::move(style), enc, value, seeds, version};
      r.check();
      out.push_back(std::move(r));
    };

    for (const auto& backend : adapters_.systems) {
      const auto sys = backend->system_id();
      const auto gen = load_generation(sys);
      std::map<std::pair<std::string, PromptStyle>, const GeneratedImageSet*> gen_by;
      for (const auto& s : gen) gen_by[{s.artifact, s.style}] = &s;

      // Embedding-space scorers.
      for (auto* enc : image_encoders()) {
        const auto eid = enc->id();
        std::map<std::string, EmbeddingSet> name_sets;  // style N, for Vendi assignment
        for (const auto* a : dataset_.admitted()) {
          auto gt = cached(cache, eid, std::string(kGroundTruthSystem), a->name, kGroundTruthStyle);
          auto cat = uses(PromptStyle::C) ? cached(cache, eid, sys, artifact_slot(*a, PromptStyle::C), "C")
                                          : std::nullopt;
          std::map<PromptStyle, double> ps;
          for (auto st : kBenchmarkStyles) {
            if (!uses(st)) continue;
            auto is = cached(cache, eid, sys, a->name, to_string(st));
            if (!is) {
              if (!cache.contains({eid, sys, a->name, std::string(to_string(st))})) {
                fail(ErrorKind::Prerequisite, "no embeddings for " + eid + "/" + sys + "/" + a->name + "/" +
                                                  std::string(to_string(st)) + "; run the 'embed' stage first");
              }
              warn(sys + "/" + a->name + "/" + std::string(to_string(st)) + ": every seed refused; scores absent");
              continue;
            }
            if (st == PromptStyle::N) name_sets.emplace(a->name, *is);
            if (gt) emit("GT", sys, a->name, std::string(to_string(st)), eid, score_gt(*is, *gt), is->size(), enc->version());
            if (cat) {
              ps[st] = score_ps(*is, *cat);
              emit("PS", sys, a->name, std::string(to_string(st)), eid, ps[st], is->size(), enc->version());
            }
          }
          for (auto st : {PromptStyle::NC, PromptStyle::NCR}) {
            if (ps.count(PromptStyle::N) && ps.count(st)) {
              emit("dPS", sys, a->name, std::string(to_string(st)), eid,
                   score_ps_divergence(ps[st], ps[PromptStyle::N]), 1, enc->version());
            }
          }
        }
        if (uses(PromptStyle::C)) score_vendi_categories(cache, sys, *enc, name_sets, gen_by, emit);
      }

      // Image-text alignment.
      for (const auto& vlm : adapters_.vlms) {
        for (const auto* a : dataset_.admitted()) {
          auto is = cached(cache, vlm->id(), sys, a->name, "N");
          if (!is) continue;
          auto text = [&](PromptStyle st) { return embed_text(*vlm, render_eval_prompt(*a, st), &cache); };
          auto pn = text(PromptStyle::EVAL_N);
          for (auto st : {PromptStyle::EVAL_C, PromptStyle::EVAL_R, PromptStyle::EVAL_CR}) {
            emit("ITA", sys, a->name, std::string(to_string(st)), vlm->id(), score_ita(*is, pn, text(st)), is->size(),
                 vlm->version());
          }
          for (auto st : kEvalStyles) {
            emit("ITA_base", sys, a->name, std::string(to_string(st)), vlm->id(), score_ita_baseline(*is, text(st)),
                 is->size(), vlm->version());
          }
        }
      }

      // Pixel-space diversity.
      auto& dis = *adapters_.dissimilarity;
      std::map<std::string, std::vector<double>> lpips_by_category;
      for (const auto* a : dataset_.admitted()) {
        std::vector<std::filesystem::path> pooled, name_only;
        for (auto st : kBenchmarkStyles) {
          auto it = gen_by.find({a->name, st});
          if (it == gen_by.end()) continue;
          for (const auto& ref : it->second->image_refs()) {
            pooled.emplace_back(ref);
            if (st == PromptStyle::N) name_only.emplace_back(ref);
          }
        }
        std::optional<double> div, lp;
        if (pooled.size() >= 2) {
          auto r = score_div(pooled, dis);
          div = r.mean;
          emit("DIV", sys, a->name, "pooled", dis.id(), r.mean, pooled.size(), dis.version());
        }
        if (name_only.size() >= 2) {
          auto r = score_lpips_artifact(name_only, dis);
          lp = r.mean;
          lpips_by_category[a->category].push_back(r.mean);
          emit("LPIPS", sys, a->name, "N", dis.id(), r.mean, name_only.size(), dis.version());
        }
        if (div && lp) emit("dDIV", sys, a->name, "pooled", dis.id(), score_div_divergence(div, lp), 1, dis.version());
      }
      for (const auto& [category, vals] : lpips_by_category) {
        emit("LPIPS_c", sys, "@c." + category, "N", dis.id(), score_lpips_category(vals), vals.size(), dis.version());
      }
    }

    sort_scores(out);
    util::atomic_write(paths_.scores_jsonl(), scores_to_jsonl(out));
    util::atomic_write(paths_.scores_csv(), scores_to_csv(out));
    note("  " + std::to_string(out.size()) + " score records");
  }

  template <typename Emit>
  void score_vendi_categories(const EmbeddingCache& cache, const std::string& sys, ImageEncoder& enc,
                              const std::map<std::string, EmbeddingSet>& name_sets,
                              const std::map<std::pair<std::string, PromptStyle>, const GeneratedImageSet*>& gen_by,
                              Emit& emit) {
    for (const auto& [category, idx] : dataset_.by_category()) {
      const auto& first = dataset_.artifacts()[idx.front()];
      auto cat = cached(cache, enc.id(), sys, artifact_slot(first, PromptStyle::C), "C");
      if (!cat) continue;
      VendiInput in;
      in.category_images = &*cat;
      for (auto i : idx) {
        const auto& a = dataset_.artifacts()[i];
        auto it = name_sets.find(a.name);
        if (it == name_sets.end()) continue;
        in.artifact_names.push_back(a.name);
        in.artifact_images.push_back(&it->second);
        in.artifact_attribute.push_back(a.region);
      }
      if (in.artifact_images.empty()) continue;
      // Quality per category seed, looked up through the generation manifest.
      std::map<std::uint64_t, std::string> seed_path;
      if (auto g = gen_by.find({artifact_slot(first, PromptStyle::C), PromptStyle::C}); g != gen_by.end()) {
        for (const auto& e : g->second->entries) {
          if (e.image_ref) seed_path[e.seed] = *e.image_ref;
        }
      }
      std::vector<double> q;
      for (auto seed : cat->seeds()) {
        auto p = seed_path.find(seed);
        if (p == seed_path.end()) fail(ErrorKind::Prerequisite, "category image for seed " + std::to_string(seed) + " missing; re-run 'generate'");
        q.push_back(quality_(p->second));
      }
      in.quality = std::move(q);
      auto r = score_vendi(in);
      const auto slot = "@c." + category;
      emit("VS", sys, slot, "C", enc.id(), r.vs, r.seeds, enc.version());
      emit("VSn", sys, slot, "C", enc.id(), r.vs_normalized, r.seeds, enc.version());
      emit("qVS", sys, slot, "C", enc.id(), *r.qvs, r.seeds, enc.version());
    }
  }

  // -- correlate -----------------------------------------------------------

  void stage_correlate() {
    prerequisite(paths_.scores_jsonl(), "score");
    if (!cfg_.gold) fail(ErrorKind::Prerequisite, "correlate needs a gold CSV ('gold' in the run config)");
    prerequisite(*cfg_.gold, "gold export");
    auto scores = load_scores(paths_.scores_jsonl());
    auto gold = ingest_gold(*cfg_.gold);
    for (const auto& r : gold.rejects) {
      warn("gold line " + std::to_string(r.line) + " rejected: " + r.reason + (r.detail.empty() ? "" : " (" + r.detail + ")"));
    }
    auto table = correlation_table(scores, aggregate_all(gold.records));
    util::atomic_write(paths_.correlation_csv(), table.to_csv());
    util::atomic_write(paths_.correlation_md(), table.to_markdown());
  }

  // -- report --------------------------------------------------------------

  void stage_report() {
    prerequisite(paths_.scores_jsonl(), "score");
    auto scores = load_scores(paths_.scores_jsonl());
    std::vector<GoldRecord> gold;
    if (cfg_.gold && std::filesystem::exists(*cfg_.gold)) gold = ingest_gold(*cfg_.gold).records;
    std::vector<std::string> systems;
    ReportOptions opts;
    opts.refusal_threshold = cfg_.refusal_threshold;
    for (const auto& b : adapters_.systems) {
      systems.push_back(b->system_id());
      auto sets = load_generation(b->system_id());
      std::size_t total = 0, made = 0;
      for (const auto& s : sets) {
        total += s.entries.size();
        made += s.generated();
      }
      if (total) opts.refusal_rate[b->system_id()] = 100.0 - 100.0 * double(made) / double(total);
    }
    auto rep = benchmark_report(systems, scores, gold, cfg_.elo, opts);
    for (const auto& w : rep.warnings) warn(w);
    util::atomic_write(paths_.report("md"), rep.to_markdown());
    util::atomic_write(paths_.report("csv"), rep.to_csv());
    util::atomic_write(paths_.report("json"), rep.to_json().dump(2) + "\n");
  }

  // -- manifest ------------------------------------------------------------

  void write_manifest(const RunResult& r) const {
    nlohmann::json j;
    j["config"] = cfg_.to_json();
    j["config_hash"] = cfg_.hash();
    j["adapters"] = adapters_.versions();
    auto& st = j["stages"] = nlohmann::json::array();
    for (const auto& s : r.stages) st.push_back({{"stage", to_string(s.stage)}, {"seconds", s.seconds}, {"status", s.status}});
    j["exit_code"] = r.exit_code;
    if (!r.message.empty()) j["error"] = r.message;
    j["warnings"] = r.warnings;
    std::error_code ec;
    std::filesystem::create_directories(cfg_.output_dir, ec);
    if (!ec) util::atomic_write(paths_.manifest(), j.dump(2) + "\n");
  }

  RunConfig cfg_;
  StagePaths paths_;
  std::ostream* log_;
  Adapters adapters_;
  ConstantQuality quality_;
  Dataset dataset_;
  std::vector<std::string> warnings_;
};

inline RunResult run_pipeline(const RunConfig& config, const std::vector<Stage>& stages, std::ostream* log = nullptr) {
  Pipeline p(config, log);
  return p.run(stages);
}

}  // namespace cure
