#include "stratus/mempool.hpp"

#include <algorithm>

namespace stratus {

const char* mempool_mode_name(MempoolMode m) {
  switch (m) {
    case MempoolMode::Native: return "native";
    case MempoolMode::BestEffortSMP: return "besteffort";
    case MempoolMode::Stratus: return "stratus";
    case MempoolMode::StratusNoDLB: return "stratus-nodlb";
  }
  return "?";
}

bool mode_uses_microblocks(MempoolMode m) { return m != MempoolMode::Native; }
bool mode_uses_proofs(MempoolMode m) {
  return m == MempoolMode::Stratus || m == MempoolMode::StratusNoDLB;
}
bool mode_uses_dlb(MempoolMode m) { return m == MempoolMode::Stratus; }

void Mempool::receive_tx(Transaction tx) {
  if (!seen_tx_.insert(tx.id).second) {
    ++duplicate_txs_dropped;
    return;
  }
  if (mode_ == MempoolMode::Native) {
    pending_.push_back(std::move(tx));
    return;  // the leader path drains this buffer directly
  }
  pending_bytes_ += tx.payload_bytes;
  pending_.push_back(std::move(tx));
  if (pending_bytes_ >= params_.batch_size_bytes) {
    seal_batch();
  } else if (!batch_timer_armed_) {
    arm_batch_timer();
  }
}

void Mempool::arm_batch_timer() {
  batch_timer_armed_ = true;
  const std::uint64_t gen = ++batch_gen_;
  ctx_.after(params_.batch_timeout, [this, gen] {
    if (batch_gen_ != gen || pending_.empty()) return;
    seal_batch();
  });
}

void Mempool::seal_batch() {
  batch_timer_armed_ = false;
  ++batch_gen_;  // invalidate a pending timer
  if (pending_.empty()) return;
  auto mb = make_microblock(std::move(pending_), self_, ctx_.now());
  pending_.clear();
  pending_bytes_ = 0;
  hooks_.new_microblock(mb);
}

void Mempool::on_deliver(const MicroblockPtr& mb) {
  if (committed_mb_.count(mb->id)) return;  // replay of a GC'd microblock
  if (!mb_map_.emplace(mb->id, mb).second) return;

  if (!mode_uses_proofs(mode_) && mode_uses_microblocks(mode_)) {
    // Best-effort mempool: delivery alone makes an id proposable.
    if (in_queue_.insert(mb->id).second) ava_queue_.push_back(mb->id);
  }

  // Advance fills waiting on this content.
  std::vector<Digest> done;
  for (auto& [pid, fill] : fills_) {
    if (fill.missing.erase(mb->id) > 0 && fill.missing.empty()) done.push_back(pid);
  }
  for (const Digest& pid : done) complete_fill(pid);
}

void Mempool::on_proven(const Digest& id, const AvailabilityProof& proof) {
  if (committed_mb_.count(id)) return;  // already committed and pruned
  if (!mode_uses_proofs(mode_)) return;
  if (p_map_.count(id)) return;  // re-proofs are ignored, queue unchanged
  p_map_.emplace(id, proof);
  if (in_queue_.insert(id).second) ava_queue_.push_back(id);
}

MicroblockPtr Mempool::content(const Digest& id) const {
  auto it = mb_map_.find(id);
  return it == mb_map_.end() ? nullptr : it->second;
}

std::size_t Mempool::ava_queue_size() const { return in_queue_.size(); }

Proposal Mempool::make_proposal(View view, const Digest& parent,
                                const std::set<Digest>& exclude_mb,
                                const std::set<std::string>& exclude_tx) {
  Proposal p;
  p.view = view;
  p.parent = parent;
  p.proposer = self_;

  if (mode_ == MempoolMode::Native) {
    // Full transactions straight from the local buffer, one batch worth.
    // Popped txs leave the buffer; dead forks put them back via recycle().
    (void)exclude_tx;
    std::uint64_t bytes = 0;
    std::size_t taken = 0;
    while (taken < pending_.size() && bytes < params_.batch_size_bytes) {
      const Transaction& tx = pending_[taken];
      bytes += tx.payload_bytes;
      p.full_txs.push_back(tx);
      ++taken;
    }
    pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(taken));
    p.finalize();
    return p;
  }

  std::deque<Digest> deferred;
  while (static_cast<std::int32_t>(p.payload.size()) < params_.block_size &&
         !ava_queue_.empty()) {
    Digest id = ava_queue_.front();
    ava_queue_.pop_front();
    if (!in_queue_.count(id)) continue;  // scrub: removed earlier
    if (exclude_mb.count(id)) {
      deferred.push_back(id);  // proposed by an uncommitted ancestor
      continue;
    }
    in_queue_.erase(id);
    if (mode_uses_proofs(mode_)) {
      auto it = p_map_.find(id);
      if (it == p_map_.end()) continue;
      p.payload.emplace_back(id, it->second);
    } else {
      p.payload.emplace_back(id, AvailabilityProof{id, {}});
    }
  }
  // Deferred ids keep their queue position relative to each other.
  for (auto it = deferred.rbegin(); it != deferred.rend(); ++it) ava_queue_.push_front(*it);
  p.finalize();
  return p;
}

ProposalVerdict Mempool::on_proposal(const ProposalPtr& p) {
  if (mode_uses_proofs(mode_)) {
    if (static_cast<std::int32_t>(p->payload.size()) > params_.block_size)
      return ProposalVerdict::ViewChange;
    for (const auto& [id, proof] : p->payload) {
      if (!verify_proof(proof, id, params_.q, scheme_)) return ProposalVerdict::ViewChange;
    }
  }

  // Start the fill; consensus is never blocked on it.
  Fill fill;
  fill.proposal = p;
  for (const auto& [id, proof] : p->payload) {
    if (!mb_map_.count(id) && !committed_mb_.count(id)) fill.missing.insert(id);
  }
  const Digest pid = p->id;
  if (fill.missing.empty()) {
    fills_.emplace(pid, std::move(fill));
    complete_fill(pid);
  } else {
    std::set<Digest> missing = fill.missing;
    fills_.emplace(pid, std::move(fill));
    for (const Digest& id : missing) hooks_.fetch_missing(id, p->proposer);
  }
  return ProposalVerdict::EnterCommit;
}

void Mempool::complete_fill(const Digest& proposal_id) {
  auto it = fills_.find(proposal_id);
  if (it == fills_.end()) return;
  ProposalPtr p = it->second.proposal;
  fills_.erase(it);
  filled_.insert(proposal_id);
  // Dedup across replicas: filled ids leave the queue so no correct leader
  // re-proposes them (Alg. 3 avaQue.Remove).
  for (const auto& [id, proof] : p->payload) in_queue_.erase(id);
  hooks_.fill_complete(p);
}

void Mempool::execute(const ProposalPtr& p) {
  const SimTime t = ctx_.now();
  for (const auto& tx : p->full_txs) {
    committed_tx_.insert(tx.id);
    hooks_.tx_executed(tx, t);
  }
  for (const auto& [id, proof] : p->payload) {
    auto it = mb_map_.find(id);
    if (it != mb_map_.end()) {
      for (const auto& tx : it->second->txs) hooks_.tx_executed(tx, t);
      mb_map_.erase(it);
    }
    p_map_.erase(id);
    in_queue_.erase(id);
    committed_mb_.insert(id);
  }
  filled_.erase(p->id);
}

void Mempool::recycle(const ProposalPtr& p, const std::set<Digest>& skip) {
  for (const auto& tx : p->full_txs) {
    if (!committed_tx_.count(tx.id)) pending_.push_back(tx);
  }
  for (const auto& [id, proof] : p->payload) {
    if (committed_mb_.count(id) || skip.count(id)) continue;
    if (mode_uses_proofs(mode_)) {
      p_map_.emplace(id, proof);
      if (in_queue_.insert(id).second) ava_queue_.push_back(id);
    } else if (mb_map_.count(id)) {
      if (in_queue_.insert(id).second) ava_queue_.push_back(id);
    }
  }
  fills_.erase(p->id);
}

}  // namespace stratus
