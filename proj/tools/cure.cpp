// Command-line entry point: dataset validation, crawling, the staged pipeline,
// standalone correlation/report/frequency tools and the MLLM judge helpers.

#include <fnmatch.h>

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cure/analysis.hpp"
#include "cure/crawler.hpp"
#include "cure/dataset.hpp"
#include "cure/http_client.hpp"
#include "cure/mllm.hpp"
#include "cure/pipeline.hpp"

namespace fs = std::filesystem;
using namespace cure;

namespace {

// Expands one path whose final component may contain shell wildcards.
std::vector<fs::path> expand_glob(const std::string& pattern) {
  fs::path p(pattern);
  auto name = p.filename().string();
  if (name.find_first_of("*?[") == std::string::npos) return {p};
  auto dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
  std::vector<fs::path> out;
  if (fs::is_directory(dir)) {
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_regular_file() && ::fnmatch(name.c_str(), e.path().filename().c_str(), 0) == 0) out.push_back(e.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ScoreRecord> load_scores_from(const fs::path& p) {
  if (fs::is_directory(p)) {
    for (auto candidate : {p / "scores.jsonl", p / "scores" / "scores.jsonl"}) {
      if (fs::exists(candidate)) return load_scores(candidate);
    }
    fail(ErrorKind::Prerequisite, "no scores.jsonl under " + p.string() + "; run the 'score' stage first");
  }
  return load_scores(p);
}

void write_or_print(const std::optional<fs::path>& out, const std::string& text) {
  if (out) util::atomic_write(*out, text);
  else std::cout << text;
}

int run_stages(const fs::path& config, const std::vector<Stage>& stages, std::optional<std::size_t> jobs) {
  auto cfg = load_run_config(config);
  if (jobs) cfg.jobs = std::max<std::size_t>(1, *jobs);
  auto r = run_pipeline(cfg, stages, &std::cerr);
  if (r.exit_code != kExitOk) std::cerr << "error: " << r.message << '\n';
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cultural-representation benchmark toolkit"};
  app.require_subcommand(1);
  std::optional<std::size_t> jobs;
  app.add_option("--jobs", jobs, "Upper bound on worker threads");

  // validate
  auto* validate = app.add_subcommand("validate", "Check a dataset file against the schema");
  std::string v_dataset;
  bool v_released = false;
  std::optional<fs::path> v_out;
  validate->add_option("dataset", v_dataset, "Dataset JSON")->required();
  validate->add_flag("--expect-released", v_released, "Also require the published dataset statistics");
  validate->add_option("--out", v_out, "Write the report here instead of stdout");

  // crawl
  auto* crawl = app.add_subcommand("crawl", "Harvest candidate artifacts from a MediaWiki category tree");
  std::string c_spec;
  std::optional<fs::path> c_fixtures, c_record, c_out, c_fetch;
  double c_rate = 1.0;
  std::size_t c_k = kMinGroundTruth;
  crawl->add_option("spec", c_spec, "Crawl spec JSON (object or array of objects)")->required();
  crawl->add_option("--fixtures", c_fixtures, "Replay responses from a fixture directory (offline)");
  crawl->add_option("--record", c_record, "Record live responses into a fixture directory");
  crawl->add_option("--out", c_out, "Output JSON");
  crawl->add_option("--rate", c_rate, "Requests per second per host");
  crawl->add_option("--fetch-gt", c_fetch, "Download ground-truth images into this directory");
  crawl->add_option("--k", c_k, "Ground-truth images per artifact");

  // staged pipeline
  std::string cfg_path;
  auto stage_cmd = [&](const char* name, const char* help) {
    auto* s = app.add_subcommand(name, help);
    s->add_option("--config", cfg_path, "Run config JSON")->required();
    return s;
  };
  auto* generate = stage_cmd("generate", "Generate images for every system, artifact and style");
  auto* embed = stage_cmd("embed", "Embed generated and ground-truth images");
  auto* score = stage_cmd("score", "Compute every scorer from cached embeddings");
  auto* run = app.add_subcommand("run", "Run several pipeline stages in order");
  std::string r_stages = "validate,generate,embed,score,correlate,report";
  run->add_option("--config", cfg_path, "Run config JSON or a previous run manifest")->required();
  run->add_option("--stages", r_stages, "Comma-separated stage list");

  // correlate
  auto* correlate = app.add_subcommand("correlate", "Spearman correlation of scores against gold judgments");
  std::optional<fs::path> k_scores, k_gold, k_out;
  std::string k_layout = "standard";
  correlate->add_option("--config", cfg_path, "Run config (runs the correlate stage)");
  correlate->add_option("--scores", k_scores, "scores.jsonl or a directory containing it");
  correlate->add_option("--gold", k_gold, "Gold CSV export");
  correlate->add_option("--layout", k_layout, "Table layout: standard | all");
  correlate->add_option("--out", k_out, "Output directory (correlation.csv, correlation.md)");

  // report
  auto* report = app.add_subcommand("report", "Benchmark table with the ELO correlation row");
  std::optional<fs::path> p_scores, p_gold, p_elo, p_out, p_generation;
  double p_threshold = 10.0;
  report->add_option("--config", cfg_path, "Run config (runs the report stage)");
  report->add_option("--scores", p_scores, "scores.jsonl or a directory containing it");
  report->add_option("--gold", p_gold, "Gold CSV export");
  report->add_option("--elo", p_elo, "JSON object mapping system id to ELO");
  report->add_option("--generation", p_generation, "Directory of generation manifests (refusal rates)");
  report->add_option("--refusal-threshold", p_threshold, "Flag systems refusing more than this percent");
  report->add_option("--out", p_out, "Output directory (report.md, report.csv, report.json)");

  // freq
  auto* freq = app.add_subcommand("freq", "Count artifact mentions in a caption corpus");
  std::vector<std::string> f_corpus;
  std::string f_dataset;
  std::optional<fs::path> f_out, f_hist;
  bool f_word = false;
  freq->add_option("--corpus", f_corpus, "Caption shard paths or globs (.txt lines or .tsv with a caption column)")
      ->required();
  freq->add_option("--dataset", f_dataset, "Dataset JSON supplying artifact names")->required();
  freq->add_option("--out", f_out, "Counts CSV");
  freq->add_option("--histogram", f_hist, "Log-scale histogram CSV");
  freq->add_flag("--word-boundary", f_word, "Require word boundaries around matches");

  // judge
  auto* judge = app.add_subcommand("judge", "Build MLLM judge prompts or parse their replies");
  std::string j_mode = "PS";
  std::optional<std::string> j_dataset, j_artifact;
  std::optional<fs::path> j_parse;
  judge->add_option("--mode", j_mode, "PS | CURE_GT");
  judge->add_option("--dataset", j_dataset, "Dataset JSON (prompt mode)");
  judge->add_option("--artifact", j_artifact, "Artifact name (prompt mode)");
  judge->add_option("--parse", j_parse, "Parse a saved judge reply instead");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) {
      auto d = load_dataset(v_dataset);
      auto r = validate_dataset(d, v_released ? std::optional(ExpectedStats::released()) : std::nullopt);
      write_or_print(v_out, r.to_json().dump(2) + "\n");
      return r.pass ? kExitOk : kExitValidation;
    }

    if (*crawl) {
      auto spec_json = nlohmann::json::parse(util::read_text(c_spec));
      std::vector<CrawlSpec> specs;
      if (spec_json.is_array()) {
        for (const auto& s : spec_json) specs.push_back(crawl_spec_from_json(s));
      } else {
        specs.push_back(crawl_spec_from_json(spec_json));
      }
      std::unique_ptr<KnowledgeGraphClient> live;
      std::unique_ptr<KnowledgeGraphClient> client;
      if (c_fixtures) {
        client = std::make_unique<FixtureClient>(*c_fixtures);
      } else {
        live = std::make_unique<HttpClient>(c_rate);
        if (c_record) client = std::make_unique<RecordingClient>(*live, *c_record);
      }
      KnowledgeGraphClient& cl = client ? *client : *live;
      nlohmann::json out = nlohmann::json::array();
      for (const auto& spec : specs) {
        auto result = crawl_category(spec, cl);
        if (c_fetch) {
          nlohmann::json errors = nlohmann::json::array();
          std::vector<ArtifactRecord> kept;
          for (const auto& a : result.candidates) {
            try {
              kept.push_back(fetch_ground_truth(a, cl, c_k, *c_fetch, spec.api).record);
            } catch (const Error& e) {
              result.skipped.push_back({a.name, std::string("ground-truth: ") + e.what()});
            }
          }
          result.candidates = std::move(kept);
        }
        out.push_back(to_json(result));
      }
      write_or_print(c_out, (specs.size() == 1 ? out[0] : out).dump(2) + "\n");
      return kExitOk;
    }

    if (*generate) return run_stages(cfg_path, {Stage::Generate}, jobs);
    if (*embed) return run_stages(cfg_path, {Stage::Embed}, jobs);
    if (*score) return run_stages(cfg_path, {Stage::Score}, jobs);
    if (*run) {
      std::vector<Stage> stages;
      for (const auto& s : util::split(r_stages, ',')) {
        if (!util::trim(s).empty()) stages.push_back(parse_stage(util::trim(s)));
      }
      return run_stages(cfg_path, stages, jobs);
    }

    if (*correlate) {
      if (!cfg_path.empty()) return run_stages(cfg_path, {Stage::Correlate}, jobs);
      if (!k_scores || !k_gold) fail(ErrorKind::InvalidArgument, "correlate needs --config or both --scores and --gold");
      auto gold = ingest_gold(*k_gold);
      for (const auto& r : gold.rejects) std::cerr << "gold line " << r.line << " rejected: " << r.reason << '\n';
      auto table = correlation_table(load_scores_from(*k_scores), aggregate_all(gold.records), TableLayout::parse(k_layout));
      if (k_out) {
        util::atomic_write(*k_out / "correlation.csv", table.to_csv());
        util::atomic_write(*k_out / "correlation.md", table.to_markdown());
      } else {
        std::cout << table.to_csv();
      }
      return kExitOk;
    }

    if (*report) {
      if (!cfg_path.empty() && !p_scores) return run_stages(cfg_path, {Stage::Report}, jobs);
      if (!p_scores) fail(ErrorKind::InvalidArgument, "report needs --config or --scores");
      auto scores = load_scores_from(*p_scores);
      std::map<std::string, double> elo;
      if (p_elo) elo = nlohmann::json::parse(util::read_text(*p_elo)).get<std::map<std::string, double>>();
      std::vector<GoldRecord> gold;
      if (p_gold) gold = ingest_gold(*p_gold).records;
      std::set<std::string> sys;
      for (const auto& s : scores) sys.insert(s.system_id);
      ReportOptions opts;
      opts.refusal_threshold = p_threshold;
      if (p_generation) {
        for (const auto& f : expand_glob((*p_generation / "*.json").string())) {
          std::size_t total = 0, made = 0;
          std::string id;
          for (const auto& s : load_generation_manifest(f)) {
            id = s.system_id;
            total += s.entries.size();
            made += s.generated();
          }
          if (total) opts.refusal_rate[id] = 100.0 - 100.0 * double(made) / double(total);
        }
      }
      auto rep = benchmark_report({sys.begin(), sys.end()}, scores, gold, elo, opts);
      for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
      if (p_out) {
        util::atomic_write(*p_out / "report.md", rep.to_markdown());
        util::atomic_write(*p_out / "report.csv", rep.to_csv());
        util::atomic_write(*p_out / "report.json", rep.to_json().dump(2) + "\n");
      } else {
        std::cout << rep.to_markdown();
      }
      return kExitOk;
    }

    if (*freq) {
      auto d = load_dataset(f_dataset);
      std::vector<std::string> names;
      for (const auto& a : d.artifacts()) names.push_back(a.name);
      std::vector<fs::path> shards;
      for (const auto& g : f_corpus) {
        auto e = expand_glob(g);
        shards.insert(shards.end(), e.begin(), e.end());
      }
      if (shards.empty()) fail(ErrorKind::NotFound, "no corpus shards matched");
      FrequencyOptions opts;
      opts.word_boundary = f_word;
      opts.jobs = jobs.value_or(0);
      auto counts = concept_frequency(shards, names, opts);
      write_or_print(f_out, frequency_to_csv(counts));
      if (f_hist) util::atomic_write(*f_hist, histogram_to_csv(log_histogram(counts)));
      return kExitOk;
    }

    if (*judge) {
      auto mode = parse_judge_mode(j_mode);
      if (j_parse) {
        auto r = parse_mllm_response(util::read_text(*j_parse), mode);
        nlohmann::json j;
        if (mode == JudgeMode::PS) {
          j = {{"similarity_rating", r.similarity_rating}, {"similarity_explanation", r.similarity_explanation}};
        } else {
          j = {{"country_likelihood", r.country_likelihood},
               {"item_accuracy", r.item_accuracy},
               {"details_analysis", r.details_analysis}};
        }
        std::cout << j.dump(2) << '\n';
        return kExitOk;
      }
      if (!j_dataset || !j_artifact) fail(ErrorKind::InvalidArgument, "judge needs --dataset and --artifact, or --parse");
      auto d = load_dataset(*j_dataset);
      const auto* a = d.find(*j_artifact);
      if (!a) fail(ErrorKind::NotFound, "artifact '" + *j_artifact + "' not in dataset");
      std::cout << build_mllm_prompt(*a, mode) << '\n';
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error [Parse]: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}
