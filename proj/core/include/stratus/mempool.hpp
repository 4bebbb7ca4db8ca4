#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "stratus/chain.hpp"
#include "stratus/context.hpp"
#include "stratus/signature.hpp"
#include "stratus/types.hpp"

namespace stratus {

enum class MempoolMode : std::uint8_t { Native, BestEffortSMP, Stratus, StratusNoDLB };

const char* mempool_mode_name(MempoolMode m);
bool mode_uses_microblocks(MempoolMode m);
bool mode_uses_proofs(MempoolMode m);
bool mode_uses_dlb(MempoolMode m);

enum class ProposalVerdict : std::uint8_t { EnterCommit, ViewChange };

// Per-replica shared-mempool state: transaction intake and batching, the
// proven-id queue consumed by proposals, proposal filling, and
// commit-triggered garbage collection.
class Mempool {
 public:
  struct Hooks {
    // A batch sealed; the load balancer decides self-broadcast vs forward.
    std::function<void(const MicroblockPtr&)> new_microblock;
    // A fill needs content for id; proposer given as the fetch hint for the
    // best-effort (leader-fetch) mode.
    std::function<void(const Digest& id, ReplicaId proposer)> fetch_missing;
    // All content for the proposal arrived (CE-Full).
    std::function<void(const ProposalPtr&)> fill_complete;
    // A transaction reached execution; reported once per replica.
    std::function<void(const Transaction&, SimTime commit_time)> tx_executed;
  };

  Mempool(ReplicaId self, MempoolMode mode, const ProtocolParams& params,
          const SignatureScheme& scheme, Context& ctx, Hooks hooks)
      : self_(self), mode_(mode), params_(params), scheme_(scheme), ctx_(ctx),
        hooks_(std::move(hooks)) {}

  // --- intake ---------------------------------------------------------
  void receive_tx(Transaction tx);

  // --- PAB-facing bookkeeping -----------------------------------------
  void on_deliver(const MicroblockPtr& mb);
  void on_proven(const Digest& id, const AvailabilityProof& proof);
  MicroblockPtr content(const Digest& id) const;
  bool executed(const Digest& id) const { return committed_mb_.count(id) > 0; }

  // --- propose phase ---------------------------------------------------
  // Pops proven ids (skipping ids pending in uncommitted ancestors) and
  // pairs them with their stored proofs. Native mode pulls raw txs instead.
  Proposal make_proposal(View view, const Digest& parent,
                         const std::set<Digest>& exclude_mb,
                         const std::set<std::string>& exclude_tx);

  // Verifies the payload (proof quorums in Stratus modes) and, on success,
  // starts the fill. Never blocks: missing content is fetched via hooks.
  ProposalVerdict on_proposal(const ProposalPtr& p);

  bool is_filled(const Digest& proposal_id) const { return filled_.count(proposal_id) > 0; }

  // Executes a committed, filled proposal: records tx commits, prunes
  // mbMap/pMap, and remembers committed ids so replays are ignored.
  void execute(const ProposalPtr& p);

  // A proposal lost its fork; recycle its payload so the ids/txs can be
  // proposed again (keeps SMP-Inclusion through view changes). Ids in `skip`
  // are already riding a committed block and must not re-enter the queue.
  void recycle(const ProposalPtr& p, const std::set<Digest>& skip);

  // --- introspection ----------------------------------------------------
  std::size_t ava_queue_size() const;
  bool in_ava_queue(const Digest& id) const { return in_queue_.count(id) > 0; }
  std::size_t mb_map_size() const { return mb_map_.size(); }
  bool has_proof(const Digest& id) const { return p_map_.count(id) > 0; }
  std::uint64_t duplicate_txs_dropped = 0;

 private:
  void seal_batch();
  void arm_batch_timer();
  void complete_fill(const Digest& proposal_id);

  ReplicaId self_;
  MempoolMode mode_;
  const ProtocolParams& params_;
  const SignatureScheme& scheme_;
  Context& ctx_;
  Hooks hooks_;

  // intake
  std::vector<Transaction> pending_;
  std::uint64_t pending_bytes_ = 0;
  std::uint64_t batch_gen_ = 0;
  bool batch_timer_armed_ = false;
  std::set<std::string> seen_tx_;

  // Alg. 3 bookkeeping
  std::map<Digest, MicroblockPtr> mb_map_;
  std::map<Digest, AvailabilityProof> p_map_;
  std::deque<Digest> ava_queue_;  // FIFO of proven ids; lazily scrubbed
  std::set<Digest> in_queue_;

  // fills in flight, by proposal digest
  struct Fill {
    ProposalPtr proposal;
    std::set<Digest> missing;
  };
  std::map<Digest, Fill> fills_;
  std::set<Digest> filled_;

  // commit-triggered GC keeps only the id filters
  std::set<Digest> committed_mb_;
  std::set<std::string> committed_tx_;  // native-mode dedup/recycle filter
};

}  // namespace stratus
