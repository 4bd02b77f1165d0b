#pragma once

#include <algorithm>
#include <chrono>
#include <functional>
#include <mutex>
#include <thread>

namespace cure {

/// Token bucket. `acquire` blocks until a token is available. The clock and
/// sleep hooks are injectable so tests run without real waiting.
class TokenBucket {
 public:
  using Clock = std::chrono::steady_clock;
  using Sleeper = std::function<void(Clock::duration)>;
  using Now = std::function<Clock::time_point()>;

  TokenBucket(double rate_per_sec, double burst = 1.0, Now now = Clock::now,
              Sleeper sleep = [](Clock::duration d) { std::this_thread::sleep_for(d); })
      : rate_(rate_per_sec), burst_(std::max(1.0, burst)), tokens_(burst_), now_(std::move(now)),
        sleep_(std::move(sleep)), last_(now_()) {}

  void acquire() {
    std::unique_lock lock(mu_);
    if (rate_ <= 0) return;  // unlimited
    while (true) {
      refill();
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
      lock.unlock();
      sleep_(std::chrono::duration_cast<Clock::duration>(wait));
      lock.lock();
    }
  }

  double rate() const { return rate_; }

 private:
  void refill() {
    auto t = now_();
    double elapsed = std::chrono::duration<double>(t - last_).count();
    last_ = t;
    tokens_ = std::min(burst_, tokens_ + elapsed * rate_);
  }

  double rate_;
  double burst_;
  double tokens_;
  Now now_;
  Sleeper sleep_;
  Clock::time_point last_;
  std::mutex mu_;
};

}  // namespace cure
