#include "stratus/consensus.hpp"

#include <algorithm>

namespace stratus {

ProposalPtr ConsensusEngine::proposal(const Digest& id) const {
  auto it = proposals_.find(id);
  return it == proposals_.end() ? nullptr : it->second;
}

const QuorumCert* ConsensusEngine::justify_of(const Digest& proposal_id) const {
  auto it = justify_.find(proposal_id);
  return it == justify_.end() ? nullptr : &it->second;
}

void ConsensusEngine::start() {
  committed_ids_.insert(kZeroDigest);
  advance_to(1);
  if (leader_of(1) == self_) propose(1);  // justified by the genesis QC
}

void ConsensusEngine::propose(View v) {
  if (!proposed_.insert(v).second) return;
  Proposal p = hooks_.build_proposal(v, high_qc_.block);
  auto sp = std::make_shared<const Proposal>(std::move(p));
  ctx_.broadcast(CeProposeBody{sp, high_qc_});
  handle_proposal(sp, high_qc_, PeerId::replica_id(self_));
}

void ConsensusEngine::on_propose(const CeProposeBody& body, PeerId from) {
  if (body.proposal == nullptr || from.is_client()) return;
  handle_proposal(body.proposal, body.justify, from);
}

void ConsensusEngine::handle_proposal(const ProposalPtr& p, const QuorumCert& justify,
                                      PeerId from) {
  if (proposals_.count(p->id)) return;
  if (p->view < 1) return;
  if (p->proposer != leader_of(p->view) || p->proposer != from.replica()) return;
  if (p->parent != justify.block) return;  // proposals chain on their justify
  if (!verify_qc(justify, quorum_, scheme_)) return;

  proposals_.emplace(p->id, p);
  justify_.emplace(p->id, justify);
  by_view_[p->view].push_back(p->id);

  process_qc(justify);

  // Validate (and start the fill) even for views we already left: the block
  // may still land on the committed chain and must become executable.
  const ProposalVerdict verdict = hooks_.validate(p);
  if (verdict == ProposalVerdict::ViewChange) return;  // no vote; pacemaker replaces the leader
  hooks_.schedule_vote(p);
}

void ConsensusEngine::try_vote(const ProposalPtr& p) {
  if (p->view != current_view_) return;
  if (p->view <= last_vote_view_) return;
  const QuorumCert* j = justify_of(p->id);
  if (j == nullptr) return;
  if (!extends(p, locked_qc_.block) && j->view <= locked_qc_.view) return;  // safeNode

  last_vote_view_ = p->view;
  const SignatureShare share = scheme_.sign(self_, vote_digest(p->view, p->id));
  const CeVoteBody vote{p->view, p->id, share};
  // Votes are broadcast and every replica aggregates QCs locally. Routing
  // votes only to the next leader starves the three-chain rule whenever a
  // permanently silent replica owns a fixed rotation slot (at N=4 every
  // cycle loses its third QC to the dead collector), so small networks
  // would never commit. Vote messages are small; the quadratic cost is
  // noise next to microblock dissemination.
  ctx_.broadcast(vote);
  handle_vote(vote);
  advance_to(p->view + 1);
}

void ConsensusEngine::on_vote(const CeVoteBody& body, PeerId from) {
  if (from.is_client()) return;
  if (body.share.signer != from.replica()) return;
  handle_vote(body);
}

void ConsensusEngine::handle_vote(const CeVoteBody& body) {
  if (body.share.over != vote_digest(body.view, body.block)) return;
  if (!scheme_.verify(body.share)) return;

  auto& bucket = votes_[{body.view, body.block}];
  bucket.emplace(body.share.signer, body.share);
  if (static_cast<std::int32_t>(bucket.size()) != quorum_) return;

  QuorumCert qc;
  qc.view = body.view;
  qc.block = body.block;
  qc.shares.reserve(bucket.size());
  for (const auto& [signer, share] : bucket) qc.shares.push_back(share);
  process_qc(qc);
}

void ConsensusEngine::on_new_view(const CeNewViewBody& body, PeerId from) {
  if (from.is_client()) return;
  process_qc(body.high_qc);
}

void ConsensusEngine::process_qc(const QuorumCert& qc) {
  if (!qc.is_genesis() && !verify_qc(qc, quorum_, scheme_)) return;
  if (qc.view > high_qc_.view) high_qc_ = qc;

  // Three-chain walk: qc certifies b2; b2's justify certifies b1 (lock);
  // b1's justify certifies b0 (decide when the three views are consecutive).
  ProposalPtr b2 = proposal(qc.block);
  if (b2 != nullptr) {
    const QuorumCert* j2 = justify_of(b2->id);
    if (j2 != nullptr) {
      if (j2->view > locked_qc_.view) locked_qc_ = *j2;
      ProposalPtr b1 = proposal(j2->block);
      if (b1 != nullptr) {
        const QuorumCert* j1 = justify_of(b1->id);
        ProposalPtr b0 = j1 != nullptr ? proposal(j1->block) : nullptr;
        if (b0 != nullptr && b2->view == b1->view + 1 && b1->view == b0->view + 1) {
          commit_chain(b0);
        }
      }
    }
  }

  if (qc.view >= current_view_) advance_to(qc.view + 1);
  // Happy path: entering the view right after a fresh QC, its leader
  // proposes immediately. Stale-QC proposals happen only via the pacemaker.
  if (current_view_ == qc.view + 1 && leader_of(current_view_) == self_) {
    propose(current_view_);
  }
}

void ConsensusEngine::commit_chain(const ProposalPtr& b0) {
  if (committed_ids_.count(b0->id)) return;
  std::vector<ProposalPtr> chain;
  ProposalPtr cur = b0;
  while (cur != nullptr && !committed_ids_.count(cur->id)) {
    chain.push_back(cur);
    cur = proposal(cur->parent);
  }
  std::reverse(chain.begin(), chain.end());
  for (const ProposalPtr& p : chain) {
    committed_ids_.insert(p->id);
    committed_seq_.push_back(p->id);
    hooks_.committed(p);
  }
  committed_view_ = b0->view;

  // Sibling branches at or below the committed view lost; recycle them.
  for (auto it = by_view_.begin();
       it != by_view_.end() && it->first <= committed_view_; it = by_view_.erase(it)) {
    for (const Digest& id : it->second) {
      if (committed_ids_.count(id)) continue;
      auto pit = proposals_.find(id);
      if (pit == proposals_.end()) continue;
      hooks_.abandoned(pit->second);
      proposals_.erase(pit);
      justify_.erase(id);
    }
  }
  // Stale vote buckets can no longer form useful QCs.
  for (auto it = votes_.begin(); it != votes_.end();) {
    it = it->first.first <= committed_view_ ? votes_.erase(it) : std::next(it);
  }
}

bool ConsensusEngine::extends(const ProposalPtr& p, const Digest& ancestor) const {
  if (ancestor == kZeroDigest) return true;
  Digest d = p->parent;
  for (int hops = 0; hops < 1024; ++hops) {
    if (d == ancestor) return true;
    if (d == kZeroDigest) return false;
    ProposalPtr pp = proposal(d);
    if (pp == nullptr) return false;
    d = pp->parent;
  }
  return false;
}

std::set<Digest> ConsensusEngine::pending_ancestor_ids(const Digest& tip) const {
  std::set<Digest> out;
  Digest d = tip;
  while (d != kZeroDigest && !committed_ids_.count(d)) {
    ProposalPtr p = proposal(d);
    if (p == nullptr) break;
    for (const auto& [mb_id, proof] : p->payload) out.insert(mb_id);
    d = p->parent;
  }
  return out;
}

void ConsensusEngine::advance_to(View v) {
  if (v <= current_view_) return;
  current_view_ = v;
  arm_pacemaker();
  // A proposal for this view may have arrived while we lagged one timeout
  // behind; give it a second chance to collect our vote.
  auto it = by_view_.find(v);
  if (it != by_view_.end() && !it->second.empty()) {
    ProposalPtr p = proposal(it->second.front());
    if (p != nullptr) hooks_.schedule_vote(p);
  }
}

void ConsensusEngine::arm_pacemaker() {
  const std::uint64_t gen = ++pacemaker_gen_;
  ctx_.after(params_.view_timeout, [this, gen] {
    if (pacemaker_gen_ != gen) return;
    on_pacemaker();
  });
}

void ConsensusEngine::on_pacemaker() {
  ++local_view_changes;
  hooks_.view_change(current_view_);
  advance_to(current_view_ + 1);
  ctx_.broadcast(CeNewViewBody{current_view_, high_qc_});
  if (leader_of(current_view_) == self_) propose(current_view_);
}

}  // namespace stratus
