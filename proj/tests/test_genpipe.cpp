#include <catch_amalgamated.hpp>

#include <set>

#include "cure/adapters/mock.hpp"
#include "cure/genpipe.hpp"
#include "support.hpp"

using namespace cure;
using cure::test::artifact;
using cure::test::TempDir;

namespace {

RetryPolicy no_wait() {
  RetryPolicy r;
  r.sleep = [](std::chrono::milliseconds) {};
  return r;
}

/// Scripted backend: outcome chosen per seed, records every call.
class ScriptedBackend : public T2IBackend {
 public:
  std::function<GenerationOutcome(const std::string&, std::uint64_t)> script;
  bool seeded = true;
  std::vector<std::pair<std::string, std::uint64_t>> calls;
  std::mutex mu;

  std::string system_id() const override { return "scripted"; }
  bool supports_seed() const override { return seeded; }
  GenerationOutcome generate(const std::string& prompt, std::uint64_t seed) override {
    {
      std::lock_guard lock(mu);
      calls.emplace_back(prompt, seed);
    }
    return script(prompt, seed);
  }
};

GenerationOutcome tiny_png() { return GenerationOutcome::image(encode_png(mock::to_image(mock::render("x", 1)))); }

}  // namespace

TEST_CASE("seed policy") {
  SeedPolicy p;
  CHECK(p.count_for("SDXL", PromptStyle::NC) == 20);
  CHECK(p.count_for("sd-1.5", PromptStyle::N) == 20);
  CHECK(p.count_for("Stable Diffusion XL", PromptStyle::N) == 20);
  CHECK(p.count_for("dalle3", PromptStyle::NCR) == 4);
  CHECK(p.count_for("sdxl", PromptStyle::C) == 80);
  CHECK(p.seeds_for("dalle3", PromptStyle::N) == std::vector<std::uint64_t>{0, 1, 2, 3});
}

TEST_CASE("generation writes the store layout and returns one entry per seed") {
  TempDir tmp;
  mock::MockT2IBackend backend("mock-a");
  Generator gen(backend, ImageStore(tmp.path()), no_wait());
  auto a = artifact("Pierogi", "Dumpling", "Food", "Poland");
  auto set = gen.generate(a, PromptStyle::NC, {0, 1, 2, 3});
  REQUIRE(set.entries.size() == 4);
  CHECK(set.generated() == 4);
  for (const auto& e : set.entries) {
    REQUIRE(e.image_ref);
    CHECK(std::filesystem::exists(*e.image_ref));
    CHECK(std::filesystem::path(*e.image_ref).parent_path() == tmp.path() / "mock-a" / "Food" / "Pierogi" / "NC");
  }
}

TEST_CASE("cached images short-circuit the backend") {
  TempDir tmp;
  mock::MockT2IBackend backend("mock-a");
  auto a = artifact("Pierogi", "Dumpling", "Food", "Poland");
  Generator first(backend, ImageStore(tmp.path()), no_wait());
  auto s1 = first.generate(a, PromptStyle::N, {0, 1, 2});
  CHECK(first.backend_calls() == 3);

  Generator second(backend, ImageStore(tmp.path()), no_wait());
  auto s2 = second.generate(a, PromptStyle::N, {0, 1, 2, 3});
  CHECK(second.backend_calls() == 1);
  for (std::size_t i = 0; i < 3; ++i) CHECK(s1.entries[i] == s2.entries[i]);
}

TEST_CASE("seeded generation is deterministic") {
  TempDir t1, t2;
  mock::MockT2IBackend backend("mock-a");
  auto a = artifact("Banku", "Dumpling", "Food", "Ghana");
  auto s1 = generate_images(backend, a, PromptStyle::NR, {5, 6}, ImageStore(t1.path()), no_wait());
  auto s2 = generate_images(backend, a, PromptStyle::NR, {5, 6}, ImageStore(t2.path()), no_wait());
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(util::read_bytes(*s1.entries[i].image_ref) == util::read_bytes(*s2.entries[i].image_ref));
  }
  CHECK(util::read_bytes(*s1.entries[0].image_ref) != util::read_bytes(*s1.entries[1].image_ref));
}

TEST_CASE("refusals are recorded, persisted, and not retried") {
  TempDir tmp;
  ScriptedBackend b;
  b.script = [](const std::string&, std::uint64_t seed) {
    return seed == 1 ? GenerationOutcome::refused("policy") : tiny_png();
  };
  auto a = artifact("Sombrero", "Hat", "Clothing", "Mexico");
  Generator gen(b, ImageStore(tmp.path()), no_wait());
  auto set = gen.generate(a, PromptStyle::N, {0, 1, 2});
  CHECK(gen.backend_calls() == 3);
  CHECK(set.entries[1].refused);
  CHECK_FALSE(set.entries[1].image_ref);
  CHECK(set.entries[1].message == "policy");

  Generator again(b, ImageStore(tmp.path()), no_wait());
  auto cached = again.generate(a, PromptStyle::N, {0, 1, 2});
  CHECK(again.backend_calls() == 0);
  CHECK(cached.entries[1].refused);
}

TEST_CASE("transport errors retry, then mark failed (distinct from refusal)") {
  TempDir tmp;
  ScriptedBackend b;
  b.script = [](const std::string&, std::uint64_t) -> GenerationOutcome { throw std::runtime_error("503"); };
  std::vector<std::chrono::milliseconds> sleeps;
  RetryPolicy r;
  r.sleep = [&](std::chrono::milliseconds d) { sleeps.push_back(d); };
  Generator gen(b, ImageStore(tmp.path()), r);
  auto set = gen.generate(artifact("Kente", "Textile", "Clothing", "Ghana"), PromptStyle::N, {0});
  CHECK(gen.backend_calls() == 3);
  CHECK(set.entries[0].failed);
  CHECK_FALSE(set.entries[0].refused);
  CHECK(set.entries[0].message == "503");
  CHECK(sleeps == std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(500), std::chrono::milliseconds(1000)});
}

TEST_CASE("a transient error followed by success yields an image") {
  TempDir tmp;
  ScriptedBackend b;
  int n = 0;
  b.script = [&](const std::string&, std::uint64_t) { return n++ == 0 ? GenerationOutcome::error("flaky") : tiny_png(); };
  Generator gen(b, ImageStore(tmp.path()), no_wait());
  auto set = gen.generate(artifact("Kente", "Textile", "Clothing", "Ghana"), PromptStyle::N, {0});
  CHECK(set.entries[0].image_ref);
  CHECK_FALSE(set.entries[0].failed);
}

TEST_CASE("seedless backends receive the seed in the prompt") {
  TempDir tmp;
  ScriptedBackend b;
  b.seeded = false;
  b.script = [](const std::string&, std::uint64_t) { return tiny_png(); };
  Generator gen(b, ImageStore(tmp.path()), no_wait());
  gen.generate(artifact("Kente", "Textile", "Clothing", "Ghana"), PromptStyle::N, {7});
  REQUIRE(b.calls.size() == 1);
  CHECK(b.calls[0].first == "An image of Kente (random seed: 7)");
}

TEST_CASE("empty seed list is rejected") {
  TempDir tmp;
  mock::MockT2IBackend backend("m");
  Generator gen(backend, ImageStore(tmp.path()), no_wait());
  CHECK_THROWS_AS(gen.generate(artifact("Kente", "Textile", "Clothing", "Ghana"), PromptStyle::N, {}), Error);
}

TEST_CASE("acceptance rate") {
  GeneratedImageSet s;
  s.supercategory = "Food";
  for (std::uint64_t i = 0; i < 4; ++i) {
    GeneratedEntry e;
    e.seed = i;
    if (i == 2) e.refused = true;
    else e.image_ref = "x.png";
    s.entries.push_back(e);
  }
  CHECK(acceptance_rate({s}, "food") == Catch::Approx(75.0));
  CHECK_THROWS_MATCHES(acceptance_rate({s}, "Clothing"), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.kind() == ErrorKind::UndefinedRate;
                       }));
}

TEST_CASE("category and region prompts share one slot across artifacts") {
  auto a = artifact("Pierogi", "Dumpling", "Food", "Poland");
  auto b = artifact("Banku", "Dumpling", "Food", "Ghana");
  CHECK(artifact_slot(a, PromptStyle::C) == artifact_slot(b, PromptStyle::C));
  CHECK(artifact_slot(a, PromptStyle::R) != artifact_slot(b, PromptStyle::R));
  CHECK(artifact_slot(a, PromptStyle::NC) == "Pierogi");
}

TEST_CASE("parallel generation matches sequential") {
  TempDir t1, t2;
  mock::MockT2IBackend backend("mock-a", {{}, {2}});
  std::vector<ArtifactRecord> arts = {artifact("Pierogi", "Dumpling", "Food", "Poland"),
                                      artifact("Banku", "Dumpling", "Food", "Ghana"),
                                      artifact("Kente", "Textile", "Clothing", "Ghana")};
  std::vector<GenerationJob> jobs;
  for (const auto& a : arts) {
    for (auto st : kBenchmarkStyles) jobs.push_back({&a, st, {0, 1, 2, 3}});
  }
  Generator g1(backend, ImageStore(t1.path()), no_wait());
  Generator g2(backend, ImageStore(t2.path()), no_wait());
  auto seq = generate_all(g1, jobs, 1);
  auto par = generate_all(g2, jobs, 4);
  REQUIRE(seq.size() == par.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    CHECK(seq[i].artifact == par[i].artifact);
    CHECK(seq[i].style == par[i].style);
    CHECK(seq[i].generated() == 3);
    for (std::size_t k = 0; k < 4; ++k) CHECK(seq[i].entries[k].refused == par[i].entries[k].refused);
  }
  CHECK(acceptance_rate(par, "Food") == Catch::Approx(75.0));
}

TEST_CASE("generation manifest round-trips") {
  GeneratedImageSet s;
  s.system_id = "m";
  s.artifact = "Kente";
  s.supercategory = "Clothing";
  s.style = PromptStyle::NCR;
  s.entries.push_back({0, "a.png", false, false, ""});
  s.entries.push_back({1, std::nullopt, true, false, "policy"});
  s.entries.push_back({2, std::nullopt, false, true, "timeout"});
  auto back = generated_set_from_json(to_json(s));
  CHECK(back.entries == s.entries);
  CHECK(back.style == PromptStyle::NCR);

  auto bad = to_json(s);
  bad["entries"][1]["image_ref"] = "b.png";
  CHECK_THROWS_AS(generated_set_from_json(bad), Error);
}
