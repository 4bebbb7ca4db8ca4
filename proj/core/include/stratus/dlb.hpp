#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "stratus/context.hpp"
#include "stratus/types.hpp"

namespace stratus {

// Stable-time (ST) workload estimator: the percentile of broadcast-to-proof
// durations over a sliding window of this replica's own PAB instances.
// baseline/epsilon come from config when given, otherwise from a warm-up
// (median and standard deviation of the first warmup samples).
class StEstimator {
 public:
  StEstimator(const ProtocolParams& params)
      : window_capacity_(params.window_size),
        percentile_(params.percentile),
        beta_(params.st_beta),
        baseline_(params.st_baseline >= 0 ? std::optional<Duration>(params.st_baseline)
                                          : std::nullopt),
        epsilon_(params.st_epsilon >= 0 ? std::optional<Duration>(params.st_epsilon)
                                        : std::nullopt),
        warmup_target_(params.st_warmup_samples) {}

  void record(Duration st);

  // Nearest-rank percentile over the window; empty window -> nullopt.
  std::optional<Duration> current_st() const { return current_st_; }

  // Busy iff current_st > baseline + epsilon + beta (strict). Cold start and
  // un-calibrated estimators report not-busy.
  bool busy() const;

  // NULL when busy; otherwise the current ST (0 with an empty window, which
  // advertises idle capacity).
  std::optional<Duration> load_status() const;

  std::optional<Duration> baseline() const { return baseline_; }
  std::optional<Duration> epsilon() const { return epsilon_; }

 private:
  void recompute();

  std::int32_t window_capacity_;
  std::int32_t percentile_;
  Duration beta_;
  std::deque<Duration> window_;
  std::optional<Duration> current_st_;

  std::optional<Duration> baseline_;
  std::optional<Duration> epsilon_;
  std::int32_t warmup_target_;
  std::vector<Duration> warmup_;
};

// Alg. 4: busy replicas forward fresh microblocks to sampled proxies; the
// proxy runs the PAB push phase and hands the proof back; censoring proxies
// end up on the banList and the forward is retried elsewhere.
class LoadBalancer {
 public:
  struct Hooks {
    // Forward path decided against forwarding (not busy, no candidates, all
    // replies NULL, rejection): broadcast the microblock ourselves.
    std::function<void(const MicroblockPtr&)> self_broadcast;
    // Query-side load status.
    std::function<std::optional<Duration>()> load_status;
    // Proxy-side: run the push phase for a forwarded microblock.
    std::function<void(const MicroblockPtr&)> proxy_broadcast;
    // Origin-side: a timely proof arrived; take over the recovery phase.
    std::function<void(const Digest&, const AvailabilityProof&)> take_over_recovery;
    std::function<void(ReplicaId)> misbehavior;
  };

  LoadBalancer(ReplicaId self, const ProtocolParams& params, Context& ctx, Hooks hooks)
      : self_(self), params_(params), ctx_(ctx), hooks_(std::move(hooks)) {}

  // NewMB routing: forward when busy (and the batch is worth forwarding),
  // otherwise broadcast directly.
  void on_new_microblock(const MicroblockPtr& mb, bool busy);

  void forward_load(const MicroblockPtr& mb);
  void on_query(const Digest& id, PeerId from);
  void on_info(const LbInfoBody& info, PeerId from);
  void on_forward(const MicroblockPtr& mb, PeerId from);

  // Called for every incoming PAB-Proof; returns true when it settles an
  // in-flight forward (proxy unbanned, recovery taken over by this origin).
  bool on_proof_arrival(const Digest& id, const AvailabilityProof& proof);

  void reset_ban_list();

  // d distinct replicas, uniform over everyone but self (banList applied by
  // the caller). Exposed for the sampling-distribution tests.
  std::vector<ReplicaId> sample_targets(std::int32_t d);

  const std::set<ReplicaId>& ban_list() const { return ban_list_; }
  bool has_pending(const Digest& id) const { return pending_.count(id) > 0; }
  std::uint64_t forward_attempts = 0;
  std::uint64_t forward_timeouts = 0;

 private:
  struct PendingForward {
    MicroblockPtr mb;
    std::vector<ReplicaId> queried;                       // K of this round
    std::map<ReplicaId, std::optional<Duration>> samples; // replies
    std::optional<ReplicaId> proxy;                       // set once forwarded
    SimTime deadline = 0;                                 // tau' deadline
    std::uint64_t gen = 0;                                // timer invalidation
  };

  void decide(const Digest& id);
  void arm_sample_timer(const Digest& id, std::uint64_t gen);
  void arm_forward_timer(const Digest& id, std::uint64_t gen);

  ReplicaId self_;
  const ProtocolParams& params_;
  Context& ctx_;
  Hooks hooks_;

  std::map<Digest, PendingForward> pending_;
  std::set<ReplicaId> ban_list_;
};

}  // namespace stratus
