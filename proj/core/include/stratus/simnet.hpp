#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <vector>

#include "stratus/envelope.hpp"
#include "stratus/rng.hpp"
#include "stratus/time.hpp"

namespace stratus {

// One model for every link; delays are one-way.
struct LinkModel {
  Duration base_delay = msec(50);
  Duration jitter = 0;  // uniform in [-jitter, +jitter]
  double bandwidth_bits_per_s = 100e6;
  double loss = 0.0;

  void validate() const;
};

struct SimBudgetExceeded : std::runtime_error {
  explicit SimBudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

// Deterministic discrete-event simulator: a single (time, seq)-ordered event
// queue, one egress port per replica (serialization at link bandwidth,
// strict consensus-over-data priority, token-bucket pacing for data), and a
// jitter/fluctuation/loss model on the propagation leg.
class SimNet {
 public:
  SimNet(std::int32_t n, LinkModel link, std::uint64_t seed, double token_fraction = 0.8,
         std::uint64_t token_burst_bytes = 1'000'000);

  // Consensus-message prioritization and the data-token limiter are Stratus
  // optimizations; baselines run a single plain FIFO per egress port.
  void set_optimizations(bool enabled) { optimizations_ = enabled; }

  // Handler invoked at the destination when an envelope is delivered.
  void attach(std::int32_t node, std::function<void(const MessageEnvelope&)> handler);

  SimTime now() const { return now_; }
  void at(SimTime t, std::function<void()> fn);
  void after(Duration d, std::function<void()> fn) { at(now_ + d, std::move(fn)); }

  void send(MessageEnvelope env);

  // Temporary delay window: while active, the propagation delay of every
  // message is drawn uniformly from [lo, hi] instead of base +- jitter.
  void inject_fluctuation(SimTime start, Duration duration, Duration lo, Duration hi);

  // Nodes whose egress is suppressed entirely (silent Byzantine behavior).
  void set_silent(std::int32_t node, bool silent);

  void set_trace(std::ostream* out) { trace_ = out; }

  // Drains events with time <= until. Throws SimBudgetExceeded after
  // max_events (livelock guard).
  void run(SimTime until, std::uint64_t max_events = 500'000'000);

  struct Counters {
    std::uint64_t sent = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped_loss = 0;
    std::uint64_t suppressed_silent = 0;
  };
  const Counters& counters() const { return counters_; }

  std::uint64_t egress_bytes(std::int32_t node, ByteCategory c) const {
    return egress_bytes_[static_cast<std::size_t>(node)][static_cast<std::size_t>(c)];
  }
  std::uint64_t egress_total(std::int32_t node) const;

  std::int32_t size() const { return n_; }

 private:
  struct Event {
    SimTime at;
    std::uint64_t seq;
    std::function<void()> fn;
  };
  struct EventOrder {
    bool operator()(const Event& a, const Event& b) const {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };

  struct TokenBucket {
    double tokens = 0;
    double rate_bytes_per_ns = 0;
    double burst_bytes = 0;
    SimTime last_refill = 0;

    void refill(SimTime now) {
      tokens = std::min(burst_bytes, tokens + rate_bytes_per_ns * static_cast<double>(now - last_refill));
      last_refill = now;
    }
    // Time at which `need` tokens will be available.
    SimTime ready_at(SimTime now, double need) const {
      if (tokens >= need) return now;
      return now + static_cast<SimTime>((need - tokens) / rate_bytes_per_ns) + 1;
    }
  };

  struct Egress {
    std::deque<MessageEnvelope> consensus_q;
    std::deque<MessageEnvelope> data_q;
    bool busy = false;
    bool wake_pending = false;
    TokenBucket bucket;
  };

  void pump(std::int32_t node);
  void begin_serialization(std::int32_t node, MessageEnvelope env);
  Duration propagation_delay(SimTime at);
  void trace_line(const MessageEnvelope& env, SimTime t);

  std::int32_t n_;
  LinkModel link_;
  double token_fraction_;
  bool optimizations_ = true;
  SimTime now_ = 0;
  std::uint64_t seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, EventOrder> queue_;
  std::vector<std::function<void(const MessageEnvelope&)>> handlers_;
  std::vector<Egress> egress_;
  std::vector<bool> silent_;
  std::vector<std::array<std::uint64_t, 4>> egress_bytes_;
  Rng rng_;
  Counters counters_;
  std::ostream* trace_ = nullptr;

  struct Window {
    SimTime start;
    SimTime end;
    Duration lo;
    Duration hi;
  };
  std::vector<Window> fluctuations_;
};

}  // namespace stratus
