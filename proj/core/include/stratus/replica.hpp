#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <vector>

#include "stratus/consensus.hpp"
#include "stratus/context.hpp"
#include "stratus/dlb.hpp"
#include "stratus/mempool.hpp"
#include "stratus/pab.hpp"
#include "stratus/simnet.hpp"

namespace stratus {

enum class AdversaryBehavior : std::uint8_t {
  None,
  Silent,              // sends nothing at all
  SelectiveBroadcast,  // pushes microblocks to a chosen subset only, serves no fetches
  CensoringProxy,      // accepts forwards, never disseminates them
  FakeLowLoad,         // always reports load 0, censors forwards
  DuplicateForward,    // forwards every batch to two proxies at once
};

AdversaryBehavior adversary_behavior_from(const std::string& name);

struct AdversaryConfig {
  AdversaryBehavior behavior = AdversaryBehavior::None;
  // SelectiveBroadcast push targets in Stratus modes (picked at setup: just
  // enough correct replicas for a quorum). Best-effort mode targets the
  // current leader dynamically.
  std::vector<ReplicaId> push_targets;
};

// Harness callbacks; every field is optional.
struct Observer {
  std::function<void(ReplicaId, const Transaction&, SimTime)> tx_executed;
  std::function<void(ReplicaId, std::size_t height, const ProposalPtr&)> block_executed;
  std::function<void(ReplicaId, const ProposalPtr&)> block_committed;
  std::function<void(ReplicaId, View)> view_change;
  std::function<void(ReplicaId, const Digest&)> fetch_started;
  std::function<void(ReplicaId, const Digest&)> content_delivered;
  std::function<void(ReplicaId, const Digest&)> proven;
};

// One protocol node: mempool + PAB + DLB + consensus engine glued onto the
// simulated network, with the per-mode wiring differences (what a microblock
// broadcast means, when a replica may vote, where missing content is fetched
// from) and optional Byzantine behavior.
class Replica : public Context {
 public:
  Replica(ReplicaId self, MempoolMode mode, const ProtocolParams& params,
          const SignatureScheme& scheme, SimNet& net, std::uint64_t seed,
          AdversaryConfig adversary = {}, const Observer* observer = nullptr);

  void start();
  void on_envelope(const MessageEnvelope& env);
  void submit_tx(Transaction tx);

  // Context
  SimTime now() const override { return net_.now(); }
  void send(ReplicaId to, MsgBody body) override;
  void broadcast(MsgBody body) override;
  void after(Duration d, std::function<void()> fn) override { net_.after(d, std::move(fn)); }
  Rng& rng() override { return rng_; }

  Mempool& mempool() { return *mempool_; }
  PabEndpoint& pab() { return *pab_; }
  LoadBalancer& dlb() { return *dlb_; }
  ConsensusEngine& consensus() { return *consensus_; }
  StEstimator& estimator() { return *estimator_; }

  ReplicaId id() const { return self_; }
  bool correct() const { return adversary_.behavior == AdversaryBehavior::None; }
  std::size_t executed_height() const { return executed_; }
  const std::vector<ProposalPtr>& commit_order() const { return commit_order_; }
  std::uint64_t misbehavior_count = 0;
  std::uint64_t censored_forwards = 0;

 private:
  void wire();
  void broadcast_microblock(const MicroblockPtr& mb);
  void deliver_content(const MicroblockPtr& mb);
  ProposalVerdict validate_proposal(const ProposalPtr& p);
  void schedule_vote(const ProposalPtr& p);
  void on_committed(const ProposalPtr& p);
  void try_execute();
  void route_new_microblock(const MicroblockPtr& mb);
  void besteffort_fetch(const Digest& id, ReplicaId proposer);
  void besteffort_fetch_round(const Digest& id, std::uint64_t gen);
  void besteffort_deliver(const MicroblockPtr& mb, PeerId from);
  void arm_banlist_reset();

  ReplicaId self_;
  MempoolMode mode_;
  const ProtocolParams& params_;
  const SignatureScheme& scheme_;
  SimNet& net_;
  Rng rng_;
  AdversaryConfig adversary_;
  const Observer* observer_;

  std::unique_ptr<StEstimator> estimator_;
  std::unique_ptr<Mempool> mempool_;
  std::unique_ptr<PabEndpoint> pab_;
  std::unique_ptr<LoadBalancer> dlb_;
  std::unique_ptr<ConsensusEngine> consensus_;

  // execution pipeline: consensus commit order, executed when full
  std::vector<ProposalPtr> commit_order_;
  std::size_t executed_ = 0;
  std::set<Digest> committed_payload_;  // ids in committed (possibly unexecuted) blocks
  std::set<Digest> pending_vote_;       // best-effort: vote once filled

  // best-effort leader-fetch (the bottleneck under test in that mode)
  struct BeFetch {
    ReplicaId proposer;
    std::uint64_t gen = 0;
  };
  std::map<Digest, BeFetch> be_fetch_;

  // microblocks handed to a proxy, kept until proven or self-broadcast
  std::map<Digest, MicroblockPtr> forward_stash_;
};

}  // namespace stratus
