// End-to-end run with the built-in mock adapters: writes a two-artifact
// dataset with synthetic ground-truth images, a gold CSV and a run config into
// the given directory, then runs every pipeline stage.
//
//   quickstart [workdir]     (default: ./cure-quickstart)

#include <iostream>

#include "cure/adapters/mock.hpp"
#include "cure/pipeline.hpp"

namespace fs = std::filesystem;
using namespace cure;

int main(int argc, char** argv) {
  fs::path dir = argc > 1 ? fs::path(argv[1]) : fs::path("cure-quickstart");
  fs::create_directories(dir);

  struct Seed {
    const char* name;
    const char* category;
    const char* supercategory;
    const char* region;
  };
  const Seed artifacts[] = {
      {"Pierogi", "Dumpling", "Food", "Poland"},
      {"Banku", "Dumpling", "Food", "Ghana"},
  };

  nlohmann::json dataset = {{"artifacts", nlohmann::json::array()}};
  for (const auto& a : artifacts) {
    std::vector<std::string> gt;
    for (int i = 0; i < 4; ++i) {
      auto rel = fs::path("gt") / a.name / (std::to_string(i) + ".png");
      auto img = mock::to_image(mock::render(std::string("An image of ") + a.name, 1000 + i));
      util::atomic_write(dir / rel, encode_png(img));
      gt.push_back(rel.generic_string());
    }
    dataset["artifacts"].push_back({{"name", a.name},
                                    {"category", a.category},
                                    {"supercategory", a.supercategory},
                                    {"region", a.region},
                                    {"ground_truth", gt}});
  }
  util::atomic_write(dir / "dataset.json", dataset.dump(2) + "\n");

  util::atomic_write(dir / "gold.csv",
                     "system,artifact,worker,question,likert,ranking,free_text\n"
                     "mock-a,Pierogi,w1,CURE,4,\"a,b,c,d\",\n"
                     "mock-a,Pierogi,w2,CURE,5,\"b,a,c,d\",looks right\n"
                     "mock-a,Banku,w1,CURE,2,\"d,c,b,a\",\n"
                     "mock-a,Banku,w2,CURE,3,\"c,d,b,a\",\n");

  nlohmann::json config = {
      {"dataset", "dataset.json"},
      {"gold", "gold.csv"},
      {"systems", {{{"id", "mock-a"}, {"kind", "mock"}}, {{"id", "mock-b"}, {"kind", "mock"}, {"refuse_seeds", {3}}}}},
      {"encoders", {{{"id", "mock-enc"}, {"kind", "mock"}}}},
      {"vlms", {{{"id", "mock-vlm"}, {"kind", "mock"}}}},
      {"seed_policy", {{"default", 4}, {"category", 8}}},
      {"elo", {{"mock-a", 1010}, {"mock-b", 990}}},
      {"output_dir", "out"},
  };
  util::atomic_write(dir / "run.json", config.dump(2) + "\n");

  auto cfg = load_run_config(dir / "run.json");
  auto r = run_pipeline(cfg, {kAllStages.begin(), kAllStages.end()}, &std::cerr);
  if (r.exit_code != 0) {
    std::cerr << "pipeline failed: " << r.message << '\n';
    return r.exit_code;
  }
  std::cout << util::read_text(cfg.output_dir / "report" / "report.md");
  std::cout << "\noutputs under " << fs::absolute(cfg.output_dir).string() << '\n';
  return 0;
}
