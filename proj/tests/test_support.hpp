#pragma once

// Shared unit-test shims: a Context that captures sends and timers so the
// protocol state machines can be driven step by step without a network.

#include <algorithm>
#include <functional>
#include <map>
#include <vector>

#include "stratus/context.hpp"

namespace stratus::testing {

class TestContext : public Context {
 public:
  TestContext(ReplicaId self, std::int32_t n, std::uint64_t seed = 42)
      : self_(self), n_(n), rng_(seed) {}

  struct Sent {
    ReplicaId to;
    MsgBody body;
  };
  std::vector<Sent> sent;

  SimTime now() const override { return now_; }
  void send(ReplicaId to, MsgBody body) override { sent.push_back({to, std::move(body)}); }
  void broadcast(MsgBody body) override {
    for (ReplicaId r = 0; r < n_; ++r) {
      if (r != self_) sent.push_back({r, body});
    }
  }
  void after(Duration d, std::function<void()> fn) override {
    timers_.emplace_back(now_ + d, std::move(fn));
  }
  Rng& rng() override { return rng_; }

  // Advance the clock, firing due timers in order.
  void advance(Duration d) {
    const SimTime until = now_ + d;
    while (true) {
      auto it = std::min_element(timers_.begin(), timers_.end(),
                                 [](const auto& a, const auto& b) { return a.first < b.first; });
      if (it == timers_.end() || it->first > until) break;
      now_ = it->first;
      auto fn = std::move(it->second);
      timers_.erase(it);
      fn();
    }
    now_ = until;
  }

  std::size_t count_kind(MsgKind k) const {
    std::size_t c = 0;
    for (const auto& s : sent) c += kind_of(s.body) == k ? 1 : 0;
    return c;
  }
  std::vector<Sent> take() {
    auto out = std::move(sent);
    sent.clear();
    return out;
  }
  std::size_t pending_timers() const { return timers_.size(); }

 private:
  ReplicaId self_;
  std::int32_t n_;
  SimTime now_ = 0;
  Rng rng_;
  std::vector<std::pair<SimTime, std::function<void()>>> timers_;
};

}  // namespace stratus::testing
