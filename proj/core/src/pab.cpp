#include "stratus/pab.hpp"

#include <algorithm>

namespace stratus {

const PabEndpoint::SenderState* PabEndpoint::sender_state(const Digest& id) const {
  auto it = senders_.find(id);
  return it == senders_.end() ? nullptr : &it->second;
}

const PabEndpoint::ReceiverState* PabEndpoint::receiver_state(const Digest& id) const {
  auto it = receivers_.find(id);
  return it == receivers_.end() ? nullptr : &it->second;
}

void PabEndpoint::broadcast(const MicroblockPtr& mb, const std::vector<ReplicaId>* restrict_to) {
  auto [it, inserted] = senders_.try_emplace(mb->id);
  if (!inserted) return;  // duplicate broadcast of the same id is a no-op
  SenderState& st = it->second;
  st.broadcast_at = ctx_.now();

  // The sender holds the content and is its own first witness.
  if (!has_content(mb->id)) hooks_.deliver(mb, PeerId::replica_id(self_));
  st.acks.emplace(self_, scheme_.sign(self_, mb->id));

  if (restrict_to != nullptr) {
    for (ReplicaId r : *restrict_to)
      if (r != self_) ctx_.send(r, PabMsgBody{mb});
  } else {
    ctx_.broadcast(PabMsgBody{mb});
  }
  try_form_proof(mb->id, st);  // q == 1 degenerate case
}

void PabEndpoint::on_msg(const MicroblockPtr& mb, PeerId from) {
  if (mb->txs.empty() || mb->id != compute_microblock_id(mb->txs)) {
    hooks_.misbehavior(mb->creator);
    return;
  }
  ReceiverState& st = receivers_[mb->id];
  const bool first_msg = !st.msg_seen;
  st.msg_seen = true;
  if (!st.first_pusher) {
    st.first_pusher = from.is_client() ? mb->creator : from.replica();
  } else if (!from.is_client() && *st.first_pusher != from.replica()) {
    // Same id pushed by two different replicas: duplicate-forward by origin.
    hooks_.misbehavior(mb->creator);
  }

  if (!has_content(mb->id)) {
    hooks_.deliver(mb, from);
    content_arrived(mb->id);
  }
  if (!first_msg) return;
  if (from.is_client()) {
    broadcast(mb);  // share client submissions, never re-share replica pushes
  } else {
    ctx_.send(from.replica(), PabAckBody{mb->id, scheme_.sign(self_, mb->id)});
  }
}

void PabEndpoint::on_ack(const PabAckBody& ack, PeerId) {
  auto it = senders_.find(ack.over);
  if (it == senders_.end()) return;  // not the sender for this id
  if (ack.share.over != ack.over || !scheme_.verify(ack.share)) {
    ++invalid_acks;
    return;
  }
  SenderState& st = it->second;
  st.acks.emplace(ack.share.signer, ack.share);
  try_form_proof(ack.over, st);
}

void PabEndpoint::try_form_proof(const Digest& id, SenderState& st) {
  if (st.proven) return;  // proof emission is at-most-once per (sender, id)
  if (static_cast<std::int32_t>(st.acks.size()) < params_.q) return;
  std::vector<SignatureShare> shares;
  shares.reserve(st.acks.size());
  for (const auto& [signer, share] : st.acks) shares.push_back(share);
  auto agg = aggregate_proof(std::move(shares), params_.q);
  if (!agg.proof) return;
  st.proven = true;
  st.proof = *agg.proof;
  hooks_.stable_time(id, ctx_.now() - st.broadcast_at);
  // <PAB-Ava>: broadcast the proof; handle it locally as well so the
  // sender's own bookkeeping (pMap/avaQue) fills without a self-message.
  ctx_.broadcast(PabProofBody{id, *agg.proof});
  hooks_.proven(id, *agg.proof);
}

void PabEndpoint::on_proof(const Digest& id, const AvailabilityProof& proof, PeerId) {
  if (!verify_proof(proof, id, params_.q, scheme_)) {
    ++invalid_proofs;
    return;
  }
  ReceiverState& st = receivers_[id];
  for (ReplicaId r : proof.signers()) st.signers.insert(r);
  hooks_.proven(id, proof);
  if (!has_content(id)) fetch(id);
}

void PabEndpoint::fetch(const Digest& id) {
  auto it = receivers_.find(id);
  if (it == receivers_.end() || it->second.signers.empty()) return;
  if (has_content(id)) return;
  if (it->second.fetching) return;  // a round is already in flight
  it->second.fetching = true;
  hooks_.fetch_started(id);
  fetch_round(id);
}

void PabEndpoint::fetch_round(const Digest& id) {
  auto it = receivers_.find(id);
  if (it == receivers_.end()) return;
  ReceiverState& st = it->second;
  if (has_content(id)) {
    st.fetching = false;
    return;
  }
  ++fetch_rounds;

  std::vector<ReplicaId> candidates;
  for (ReplicaId r : st.signers)
    if (r != self_ && !st.requested.count(r)) candidates.push_back(r);
  if (candidates.empty()) {
    // Every signer has been tried; reset so retries keep making progress.
    st.requested.clear();
    for (ReplicaId r : st.signers)
      if (r != self_) candidates.push_back(r);
  }
  for (ReplicaId r : candidates) {
    if (ctx_.rng().unit() < params_.alpha_fetch) {
      st.requested.insert(r);
      ctx_.send(r, PabRequestBody{id});
    }
  }

  const std::uint64_t gen = ++st.fetch_gen;
  ctx_.after(params_.delta_fetch, [this, id, gen] {
    auto it2 = receivers_.find(id);
    if (it2 == receivers_.end() || !it2->second.fetching || it2->second.fetch_gen != gen) return;
    fetch_round(id);
  });
}

void PabEndpoint::on_request(const Digest& id, PeerId from) {
  if (from.is_client()) return;
  MicroblockPtr mb = hooks_.content(id);
  if (mb != nullptr) ctx_.send(from.replica(), PabResponseBody{mb});
}

void PabEndpoint::on_response(const MicroblockPtr& mb, PeerId from) {
  if (mb->txs.empty() || mb->id != compute_microblock_id(mb->txs)) {
    if (!from.is_client()) hooks_.misbehavior(from.replica());
    return;
  }
  if (has_content(mb->id)) return;
  hooks_.deliver(mb, from);
  content_arrived(mb->id);
}

void PabEndpoint::content_arrived(const Digest& id) {
  auto it = receivers_.find(id);
  if (it == receivers_.end()) return;
  it->second.fetching = false;
  ++it->second.fetch_gen;  // invalidate any pending retry timer
}

}  // namespace stratus
