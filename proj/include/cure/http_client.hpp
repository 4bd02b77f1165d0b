#pragma once

// Live MediaWiki transport. Only the CLI includes this header, so the library
// proper does not depend on cpp-httplib or OpenSSL's TLS layer.

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "cure/crawler.hpp"
#include "cure/rate_limit.hpp"

namespace cure {

class HttpClient : public KnowledgeGraphClient {
 public:
  explicit HttpClient(double requests_per_sec = 1.0, int attempts = 3) : attempts_(attempts), rps_(requests_per_sec) {}

  nlohmann::json get_json(const std::string& url) override {
    auto body = fetch(url);
    try {
      return nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorKind::Parse, url + ": " + e.what());
    }
  }

  std::vector<std::uint8_t> get_bytes(const std::string& url) override {
    auto body = fetch(url);
    return {body.begin(), body.end()};
  }

 private:
  std::string fetch(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) fail(ErrorKind::InvalidArgument, "not a URL: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    std::string host = url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    HostSlot& slot = slot_for(host);
    std::lock_guard in_flight(slot.in_flight);
    std::string last_error;
    for (int attempt = 0; attempt < attempts_; ++attempt) {
      if (attempt) std::this_thread::sleep_for(std::chrono::milliseconds(500 << attempt));
      slot.bucket.acquire();
      httplib::Client cli(host);
      cli.set_follow_location(true);
      cli.set_connection_timeout(10);
      cli.set_read_timeout(60);
      httplib::Headers headers = {{"User-Agent", "cure-bench/1.0 (benchmark crawler)"}};
      auto res = cli.Get(path, headers);
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status == 404) fail(ErrorKind::NotFound, url);
      if (res->status >= 200 && res->status < 300) return res->body;
      last_error = "HTTP " + std::to_string(res->status);
      if (res->status < 500 && res->status != 429) break;
    }
    fail(ErrorKind::Transport, url + ": " + last_error);
  }

  struct HostSlot {
    explicit HostSlot(double rps) : bucket(rps) {}
    TokenBucket bucket;
    std::mutex in_flight;  // at most one request per host
  };

  HostSlot& slot_for(const std::string& host) {
    std::lock_guard lock(mu_);
    auto& s = hosts_[host];
    if (!s) s = std::make_unique<HostSlot>(rps_);
    return *s;
  }

  int attempts_;
  double rps_;
  std::mutex mu_;
  std::map<std::string, std::unique_ptr<HostSlot>> hosts_;
};

}  // namespace cure
