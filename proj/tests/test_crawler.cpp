#include <catch_amalgamated.hpp>

#include "cure/crawler.hpp"
#include "support.hpp"

using namespace cure;

namespace {

const std::string kApi = "https://commons.wikimedia.org/w/api.php";

// Builds recorded API responses for a small category tree.
struct FakeWiki {
  FixtureClient client;

  void category(const std::string& title, bool exists = true) {
    nlohmann::json page = {{"title", title}};
    if (!exists) page["missing"] = "";
    client.record_json(mediawiki::category_info_url(kApi, title), {{"query", {{"pages", {{"1", page}}}}}});
  }

  void members(const std::string& title, const std::string& type, const std::vector<std::string>& titles,
               std::size_t page_size = 500) {
    std::string cont;
    for (std::size_t start = 0;; start += page_size) {
      nlohmann::json list = nlohmann::json::array();
      for (std::size_t i = start; i < std::min(titles.size(), start + page_size); ++i) list.push_back({{"title", titles[i]}});
      nlohmann::json resp = {{"query", {{"categorymembers", list}}}};
      std::string next = start + page_size < titles.size() ? "page" + std::to_string(start + page_size) : "";
      if (!next.empty()) resp["continue"] = {{"cmcontinue", next}};
      client.record_json(mediawiki::members_url(kApi, title, type, cont), resp);
      if (next.empty()) break;
      cont = next;
    }
  }

  std::vector<std::string> files(const std::string& stem, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back("File:" + stem + " " + std::to_string(i) + ".jpg");
    return out;
  }

  void image(const std::string& file_title, const std::vector<std::uint8_t>& bytes, bool poisoned = false) {
    auto url = "https://upload.example.org/" + util::sha256_hex(file_title).substr(0, 8) + ".jpg";
    client.record_json(mediawiki::imageinfo_url(kApi, file_title),
                       {{"query", {{"pages", {{"7", {{"imageinfo", {{{"url", url}}}}}}}}}}});
    if (!poisoned) client.record_bytes(url, bytes);
  }
};

CrawlSpec dumplings() {
  CrawlSpec s;
  s.supercategory = "Food";
  s.category = "Dumplings";
  s.api = kApi;
  return s;
}

}  // namespace

TEST_CASE("country titles resolve through of/in/from phrasing") {
  CHECK(detail::country_from_title("Category:Dumplings of Poland")->name == "Poland");
  CHECK(detail::country_from_title("Category:Houses in the United States")->name == "United States");
  CHECK(detail::country_from_title("Category:Hats from Mexico")->name == "Mexico");
  CHECK_FALSE(detail::country_from_title("Category:Dumplings of Narnia"));
}

TEST_CASE("crawl builds candidates and skips thin or unknown entries") {
  test::TempDir tmp;
  FakeWiki w{FixtureClient(tmp.path())};
  auto spec = dumplings();
  w.category(spec.root_title());
  w.members(spec.root_title(), "subcat",
            {"Category:Dumplings of Poland", "Category:Dumplings of Ghana", "Category:Dumplings of Narnia",
             "Category:Dumplings of Chile"});
  w.members("Category:Dumplings of Poland", "subcat", {"Category:Pierogi"});
  w.members("Category:Pierogi", "file", w.files("Pierogi", 5));
  w.members("Category:Dumplings of Ghana", "subcat", {"Category:Banku", "Category:Kenkey"});
  w.members("Category:Banku", "file", w.files("Banku", 3));
  w.members("Category:Kenkey", "file", w.files("Kenkey", 4), 2);  // paginated
  w.members("Category:Dumplings of Chile", "subcat", {});

  auto r = crawl_category(spec, w.client);
  REQUIRE(r.candidates.size() == 2);
  CHECK(r.candidates[0].name == "Kenkey");  // sorted by (region, name): Ghana < Poland
  CHECK(r.candidates[0].ground_truth.size() == 4);
  CHECK(r.candidates[1].name == "Pierogi");
  CHECK(r.candidates[1].ground_truth.size() == 5);
  CHECK(r.candidates[1].global_bucket == GlobalBucket::GN);
  CHECK_FALSE(r.candidates[1].ambiguous);

  std::map<std::string, std::string> why;
  for (const auto& s : r.skipped) why[s.entry] = s.reason;
  CHECK(why["Category:Banku"] == "insufficient-images");
  CHECK(why["Category:Dumplings of Narnia"] == "unknown-region");
  CHECK(why["Category:Dumplings of Chile"] == "no-artifacts");

  for (const auto& c : r.candidates) CHECK(c.ground_truth.size() >= spec.min_images);

  // Deterministic replay.
  auto again = crawl_category(spec, w.client);
  CHECK(again.candidates == r.candidates);
  CHECK(again.skipped == r.skipped);
}

TEST_CASE("empty category yields an empty result") {
  test::TempDir tmp;
  FakeWiki w{FixtureClient(tmp.path())};
  auto spec = dumplings();
  w.category(spec.root_title());
  w.members(spec.root_title(), "subcat", {});
  auto r = crawl_category(spec, w.client);
  CHECK(r.candidates.empty());
  CHECK(r.skipped.empty());
}

TEST_CASE("missing root category is NotFound; unrecorded request is Transport") {
  test::TempDir tmp;
  FakeWiki w{FixtureClient(tmp.path())};
  auto spec = dumplings();
  w.category(spec.root_title(), false);
  try {
    crawl_category(spec, w.client);
    FAIL("expected NotFound");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotFound);
  }
  spec.category = "Hats";
  try {
    crawl_category(spec, w.client);
    FAIL("expected Transport");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Transport);
  }
}

TEST_CASE("max_artifacts caps candidates deterministically") {
  test::TempDir tmp;
  FakeWiki w{FixtureClient(tmp.path())};
  auto spec = dumplings();
  spec.max_artifacts = 1;
  w.category(spec.root_title());
  w.members(spec.root_title(), "subcat", {"Category:Dumplings of Poland"});
  w.members("Category:Dumplings of Poland", "subcat", {"Category:Uszka", "Category:Pierogi"});
  w.members("Category:Pierogi", "file", w.files("Pierogi", 4));
  w.members("Category:Uszka", "file", w.files("Uszka", 4));
  auto r = crawl_category(spec, w.client);
  REQUIRE(r.candidates.size() == 1);
  CHECK(r.candidates[0].name == "Pierogi");
  REQUIRE(r.skipped.size() == 1);
  CHECK(r.skipped[0].reason == "over-max-artifacts");
}

TEST_CASE("crawl spec from JSON validates min_images") {
  CHECK_THROWS_AS(crawl_spec_from_json({{"supercategory", "Food"}, {"category", "Dumplings"}, {"min_images", 0}}), Error);
  auto s = crawl_spec_from_json({{"supercategory", "Food"}, {"category", "Dumplings"}});
  CHECK(s.root_title() == "Category:Dumplings by country");
}

TEST_CASE("fetch_ground_truth truncates, caches, and enforces the threshold") {
  test::TempDir tmp;
  FakeWiki w{FixtureClient(tmp / "fixtures")};
  auto bytes = encode_png(mock::to_image(mock::render("pierogi", 1)));

  auto rec = test::artifact("Pierogi", "Dumpling", "Food", "Poland");

  SECTION("six available, k = 4") {
    rec.ground_truth = w.files("Pierogi", 6);
    for (const auto& f : rec.ground_truth) w.image(f, bytes);
    auto r = fetch_ground_truth(rec, w.client, 4, tmp / "gt", kApi);
    REQUIRE(r.record.ground_truth.size() == 4);
    for (const auto& p : r.record.ground_truth) CHECK(std::filesystem::exists(p));
    CHECK(r.download_errors.empty());
  }
  SECTION("three available") {
    rec.ground_truth = w.files("Pierogi", 3);
    for (const auto& f : rec.ground_truth) w.image(f, bytes);
    try {
      fetch_ground_truth(rec, w.client, 4, tmp / "gt", kApi);
      FAIL("expected BelowThreshold");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::BelowThreshold);
    }
  }
  SECTION("four available, one poisoned") {
    rec.ground_truth = w.files("Pierogi", 4);
    for (std::size_t i = 0; i < 4; ++i) w.image(rec.ground_truth[i], bytes, i == 2);
    try {
      fetch_ground_truth(rec, w.client, 4, tmp / "gt", kApi);
      FAIL("expected BelowThreshold");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::BelowThreshold);
      CHECK(std::string(e.what()).find("Pierogi 2") != std::string::npos);
    }
  }
  SECTION("k below 4 is rejected") {
    CHECK_THROWS_AS(fetch_ground_truth(rec, w.client, 3, tmp / "gt", kApi), Error);
  }
}

TEST_CASE("recording client captures responses for offline replay") {
  test::TempDir tmp;
  FakeWiki source{FixtureClient(tmp / "src")};
  auto spec = dumplings();
  source.category(spec.root_title());
  source.members(spec.root_title(), "subcat", {});
  RecordingClient rec(source.client, tmp / "copy");
  crawl_category(spec, rec);
  FixtureClient replay(tmp / "copy");
  CHECK(crawl_category(spec, replay).candidates.empty());
}
