#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "stratus/chain.hpp"
#include "stratus/context.hpp"
#include "stratus/mempool.hpp"

namespace stratus {

// Minimal chained, leader-rotating quorum-certificate BFT engine with the
// three-chain commit rule and a timeout pacemaker. The mempool plugs in via
// hooks: proposals are built from the proven-id queue, validated against
// their proofs before any vote, and handed back in commit order.
class ConsensusEngine {
 public:
  struct Hooks {
    std::function<Proposal(View, const Digest& parent)> build_proposal;
    std::function<ProposalVerdict(const ProposalPtr&)> validate;
    // Ask the replica to vote for p (now, or once its fill completes).
    std::function<void(const ProposalPtr&)> schedule_vote;
    // Proposal reached the three-chain commit point (called in chain order).
    std::function<void(const ProposalPtr&)> committed;
    // Proposal lost its fork to a committed sibling; payload is recyclable.
    std::function<void(const ProposalPtr&)> abandoned;
    std::function<void(View)> view_change;  // pacemaker fired
  };

  ConsensusEngine(ReplicaId self, const ProtocolParams& params, const SignatureScheme& scheme,
                  Context& ctx, Hooks hooks)
      : self_(self), params_(params), quorum_(2 * params.f + 1), scheme_(scheme), ctx_(ctx),
        hooks_(std::move(hooks)), high_qc_(genesis_qc()), locked_qc_(genesis_qc()) {}

  void start();

  ReplicaId leader_of(View v) const {
    return static_cast<ReplicaId>(v % params_.n_replicas);
  }

  void on_propose(const CeProposeBody& body, PeerId from);
  void on_vote(const CeVoteBody& body, PeerId from);
  void on_new_view(const CeNewViewBody& body, PeerId from);

  // Vote for p if it is current, safe, and not yet voted. Called back by the
  // replica after schedule_vote (immediately, or after the fill in the
  // best-effort mode where missing content blocks voting).
  void try_vote(const ProposalPtr& p);

  View current_view() const { return current_view_; }
  const QuorumCert& high_qc() const { return high_qc_; }
  const QuorumCert& locked_qc() const { return locked_qc_; }
  const std::vector<Digest>& committed_sequence() const { return committed_seq_; }
  ProposalPtr proposal(const Digest& id) const;

  // Microblock ids sitting in uncommitted ancestors of `tip`; the leader
  // skips them when building, so one id never rides two chained proposals.
  std::set<Digest> pending_ancestor_ids(const Digest& tip) const;

  std::uint64_t local_view_changes = 0;

 private:
  void propose(View v);
  void handle_proposal(const ProposalPtr& p, const QuorumCert& justify, PeerId from);
  void handle_vote(const CeVoteBody& body);
  void process_qc(const QuorumCert& qc);
  void advance_to(View v);
  void arm_pacemaker();
  void on_pacemaker();
  void commit_chain(const ProposalPtr& b0);
  bool extends(const ProposalPtr& p, const Digest& ancestor) const;
  const QuorumCert* justify_of(const Digest& proposal_id) const;

  ReplicaId self_;
  const ProtocolParams& params_;
  std::int32_t quorum_;
  const SignatureScheme& scheme_;
  Context& ctx_;
  Hooks hooks_;

  View current_view_ = 0;
  QuorumCert high_qc_;
  QuorumCert locked_qc_;
  View last_vote_view_ = 0;
  View committed_view_ = 0;

  std::map<Digest, ProposalPtr> proposals_;
  std::map<Digest, QuorumCert> justify_;          // proposal id -> carried QC
  std::map<View, std::vector<Digest>> by_view_;
  std::set<View> proposed_;
  std::map<std::pair<View, Digest>, std::map<ReplicaId, SignatureShare>> votes_;
  std::set<Digest> committed_ids_;
  std::vector<Digest> committed_seq_;
  std::uint64_t pacemaker_gen_ = 0;
};

}  // namespace stratus
