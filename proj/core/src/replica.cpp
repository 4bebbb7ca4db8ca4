#include "stratus/replica.hpp"

#include <algorithm>

namespace stratus {

AdversaryBehavior adversary_behavior_from(const std::string& name) {
  if (name == "silent") return AdversaryBehavior::Silent;
  if (name == "selective") return AdversaryBehavior::SelectiveBroadcast;
  if (name == "censoring-proxy") return AdversaryBehavior::CensoringProxy;
  if (name == "fake-low-load") return AdversaryBehavior::FakeLowLoad;
  if (name == "duplicate-forward") return AdversaryBehavior::DuplicateForward;
  if (name == "none" || name.empty()) return AdversaryBehavior::None;
  throw ConfigError("adversary.behavior", "unknown behavior '" + name + "'");
}

Replica::Replica(ReplicaId self, MempoolMode mode, const ProtocolParams& params,
                 const SignatureScheme& scheme, SimNet& net, std::uint64_t seed,
                 AdversaryConfig adversary, const Observer* observer)
    : self_(self), mode_(mode), params_(params), scheme_(scheme), net_(net),
      rng_(Rng(seed).fork("replica" + std::to_string(self))), adversary_(std::move(adversary)),
      observer_(observer) {
  wire();
}

void Replica::wire() {
  estimator_ = std::make_unique<StEstimator>(params_);

  Mempool::Hooks mh;
  mh.new_microblock = [this](const MicroblockPtr& mb) { route_new_microblock(mb); };
  mh.fetch_missing = [this](const Digest& id, ReplicaId proposer) {
    if (mode_ == MempoolMode::BestEffortSMP) {
      besteffort_fetch(id, proposer);
    } else if (mode_uses_proofs(mode_)) {
      pab_->fetch(id);  // no-op until the proposal's proofs are processed
    }
  };
  mh.fill_complete = [this](const ProposalPtr& p) {
    if (pending_vote_.erase(p->id) > 0) consensus_->try_vote(p);
    try_execute();
  };
  mh.tx_executed = [this](const Transaction& tx, SimTime t) {
    if (observer_ != nullptr && observer_->tx_executed) observer_->tx_executed(self_, tx, t);
  };
  mempool_ = std::make_unique<Mempool>(self_, mode_, params_, scheme_, *this, std::move(mh));

  PabEndpoint::Hooks ph;
  ph.deliver = [this](const MicroblockPtr& mb, PeerId) { deliver_content(mb); };
  ph.proven = [this](const Digest& id, const AvailabilityProof& proof) {
    mempool_->on_proven(id, proof);
    if (observer_ != nullptr && observer_->proven) observer_->proven(self_, id);
  };
  ph.stable_time = [this](const Digest&, Duration st) { estimator_->record(st); };
  ph.content = [this](const Digest& id) { return mempool_->content(id); };
  ph.misbehavior = [this](ReplicaId) { ++misbehavior_count; };
  ph.fetch_started = [this](const Digest& id) {
    if (observer_ != nullptr && observer_->fetch_started) observer_->fetch_started(self_, id);
  };
  pab_ = std::make_unique<PabEndpoint>(self_, params_, scheme_, *this, std::move(ph));

  LoadBalancer::Hooks lh;
  lh.self_broadcast = [this](const MicroblockPtr& mb) {
    forward_stash_.erase(mb->id);
    broadcast_microblock(mb);
  };
  lh.load_status = [this] { return estimator_->load_status(); };
  lh.proxy_broadcast = [this](const MicroblockPtr& mb) {
    if (adversary_.behavior == AdversaryBehavior::CensoringProxy ||
        adversary_.behavior == AdversaryBehavior::FakeLowLoad) {
      ++censored_forwards;
      return;
    }
    pab_->broadcast(mb);
  };
  lh.take_over_recovery = [this](const Digest& id, const AvailabilityProof& proof) {
    auto it = forward_stash_.find(id);
    if (it != forward_stash_.end()) {
      deliver_content(it->second);  // the origin always holds its own batch
      forward_stash_.erase(it);
    }
    broadcast(PabProofBody{id, proof});
  };
  lh.misbehavior = [this](ReplicaId) { ++misbehavior_count; };
  dlb_ = std::make_unique<LoadBalancer>(self_, params_, *this, std::move(lh));

  ConsensusEngine::Hooks ch;
  ch.build_proposal = [this](View v, const Digest& parent) {
    std::set<Digest> exclude = consensus_->pending_ancestor_ids(parent);
    for (std::size_t i = executed_; i < commit_order_.size(); ++i)
      for (const auto& [id, proof] : commit_order_[i]->payload) exclude.insert(id);
    return mempool_->make_proposal(v, parent, exclude, {});
  };
  ch.validate = [this](const ProposalPtr& p) { return validate_proposal(p); };
  ch.schedule_vote = [this](const ProposalPtr& p) { schedule_vote(p); };
  ch.committed = [this](const ProposalPtr& p) { on_committed(p); };
  ch.abandoned = [this](const ProposalPtr& p) { mempool_->recycle(p, committed_payload_); };
  ch.view_change = [this](View v) {
    if (observer_ != nullptr && observer_->view_change) observer_->view_change(self_, v);
  };
  consensus_ = std::make_unique<ConsensusEngine>(self_, params_, scheme_, *this, std::move(ch));
}

void Replica::start() {
  consensus_->start();
  if (mode_uses_dlb(mode_)) arm_banlist_reset();
}

void Replica::arm_banlist_reset() {
  after(params_.banlist_reset_period, [this] {
    dlb_->reset_ban_list();
    arm_banlist_reset();
  });
}

void Replica::send(ReplicaId to, MsgBody body) {
  net_.send(make_envelope(PeerId::replica_id(self_), to, std::move(body), params_.share_bytes));
}

void Replica::broadcast(MsgBody body) {
  for (ReplicaId r = 0; r < params_.n_replicas; ++r) {
    if (r == self_) continue;
    send(r, body);
  }
}

void Replica::submit_tx(Transaction tx) { mempool_->receive_tx(std::move(tx)); }

void Replica::deliver_content(const MicroblockPtr& mb) {
  forward_stash_.erase(mb->id);
  mempool_->on_deliver(mb);
  if (observer_ != nullptr && observer_->content_delivered)
    observer_->content_delivered(self_, mb->id);
}

void Replica::route_new_microblock(const MicroblockPtr& mb) {
  if (adversary_.behavior == AdversaryBehavior::DuplicateForward && params_.n_replicas > 2) {
    // Byzantine origin: same batch to two proxies at once.
    auto targets = dlb_->sample_targets(2);
    for (ReplicaId r : targets) send(r, LbForwardBody{mb});
    return;
  }
  if (mode_uses_dlb(mode_)) {
    if (estimator_->busy()) forward_stash_[mb->id] = mb;
    dlb_->on_new_microblock(mb, estimator_->busy());
    return;
  }
  broadcast_microblock(mb);
}

void Replica::broadcast_microblock(const MicroblockPtr& mb) {
  if (mode_ == MempoolMode::BestEffortSMP) {
    // Plain best-effort fan-out: no acks, no proofs.
    deliver_content(mb);
    if (adversary_.behavior == AdversaryBehavior::SelectiveBroadcast) {
      send(consensus_->leader_of(consensus_->current_view()), PabMsgBody{mb});
      return;
    }
    broadcast(PabMsgBody{mb});
    return;
  }
  if (adversary_.behavior == AdversaryBehavior::SelectiveBroadcast) {
    pab_->broadcast(mb, &adversary_.push_targets);
    return;
  }
  pab_->broadcast(mb);
}

ProposalVerdict Replica::validate_proposal(const ProposalPtr& p) {
  const ProposalVerdict verdict = mempool_->on_proposal(p);
  if (verdict == ProposalVerdict::EnterCommit && mode_uses_proofs(mode_)) {
    // The proposal carries the availability proofs: process them exactly as
    // received PAB-Proof messages (fills pMap/avaQue, starts recovery for
    // content this replica is missing).
    for (const auto& [id, proof] : p->payload) {
      pab_->on_proof(id, proof, PeerId::replica_id(p->proposer));
    }
  }
  return verdict;
}

void Replica::schedule_vote(const ProposalPtr& p) {
  if (mode_ == MempoolMode::BestEffortSMP && !mempool_->is_filled(p->id)) {
    // Without availability proofs a replica cannot vouch for a proposal it
    // cannot reconstruct; voting waits for the missing content.
    pending_vote_.insert(p->id);
    return;
  }
  consensus_->try_vote(p);
}

void Replica::on_committed(const ProposalPtr& p) {
  commit_order_.push_back(p);
  for (const auto& [id, proof] : p->payload) committed_payload_.insert(id);
  pending_vote_.erase(p->id);
  if (observer_ != nullptr && observer_->block_committed) observer_->block_committed(self_, p);
  try_execute();
}

void Replica::try_execute() {
  while (executed_ < commit_order_.size()) {
    const ProposalPtr& p = commit_order_[executed_];
    if (!mempool_->is_filled(p->id)) return;
    mempool_->execute(p);
    if (observer_ != nullptr && observer_->block_executed)
      observer_->block_executed(self_, executed_, p);
    ++executed_;
  }
}

void Replica::besteffort_fetch(const Digest& id, ReplicaId proposer) {
  auto [it, inserted] = be_fetch_.try_emplace(id, BeFetch{proposer, 0});
  if (!inserted) return;
  if (observer_ != nullptr && observer_->fetch_started) observer_->fetch_started(self_, id);
  besteffort_fetch_round(id, ++it->second.gen);
}

void Replica::besteffort_fetch_round(const Digest& id, std::uint64_t gen) {
  auto it = be_fetch_.find(id);
  if (it == be_fetch_.end() || it->second.gen != gen) return;
  send(it->second.proposer, PabRequestBody{id});
  after(params_.delta_fetch, [this, id, gen] {
    auto it2 = be_fetch_.find(id);
    if (it2 == be_fetch_.end() || it2->second.gen != gen) return;
    besteffort_fetch_round(id, ++it2->second.gen);
  });
}

void Replica::besteffort_deliver(const MicroblockPtr& mb, PeerId from) {
  if (mb->txs.empty() || mb->id != compute_microblock_id(mb->txs)) {
    ++misbehavior_count;
    (void)from;
    return;
  }
  be_fetch_.erase(mb->id);
  deliver_content(mb);
}

void Replica::on_envelope(const MessageEnvelope& env) {
  switch (env.kind) {
    case MsgKind::PabMsg: {
      const auto& b = std::get<PabMsgBody>(env.body);
      if (mode_ == MempoolMode::BestEffortSMP) {
        besteffort_deliver(b.mb, env.from);
      } else {
        pab_->on_msg(b.mb, env.from);
      }
      break;
    }
    case MsgKind::PabAck: {
      if (mode_uses_proofs(mode_)) pab_->on_ack(std::get<PabAckBody>(env.body), env.from);
      break;
    }
    case MsgKind::PabProof: {
      if (!mode_uses_proofs(mode_)) break;
      const auto& b = std::get<PabProofBody>(env.body);
      if (mode_uses_dlb(mode_) &&
          verify_proof(b.proof, b.id, params_.q, scheme_)) {
        dlb_->on_proof_arrival(b.id, b.proof);
      }
      pab_->on_proof(b.id, b.proof, env.from);
      break;
    }
    case MsgKind::PabRequest: {
      if (adversary_.behavior == AdversaryBehavior::SelectiveBroadcast) break;  // withhold
      const auto& b = std::get<PabRequestBody>(env.body);
      if (mode_ == MempoolMode::BestEffortSMP) {
        MicroblockPtr mb = mempool_->content(b.id);
        if (mb != nullptr && !env.from.is_client())
          send(env.from.replica(), PabResponseBody{mb});
      } else {
        pab_->on_request(b.id, env.from);
      }
      break;
    }
    case MsgKind::PabResponse: {
      const auto& b = std::get<PabResponseBody>(env.body);
      if (mode_ == MempoolMode::BestEffortSMP) {
        besteffort_deliver(b.mb, env.from);
      } else {
        pab_->on_response(b.mb, env.from);
      }
      break;
    }
    case MsgKind::LbQuery: {
      if (!mode_uses_dlb(mode_)) break;
      const auto& b = std::get<LbQueryBody>(env.body);
      if (adversary_.behavior == AdversaryBehavior::FakeLowLoad) {
        if (!env.from.is_client())
          send(env.from.replica(), LbInfoBody{b.id, Duration{0}, false});
        break;
      }
      dlb_->on_query(b.id, env.from);
      break;
    }
    case MsgKind::LbInfo: {
      if (mode_uses_dlb(mode_)) dlb_->on_info(std::get<LbInfoBody>(env.body), env.from);
      break;
    }
    case MsgKind::LbForward: {
      if (mode_uses_proofs(mode_)) dlb_->on_forward(std::get<LbForwardBody>(env.body).mb, env.from);
      break;
    }
    case MsgKind::CePropose:
      consensus_->on_propose(std::get<CeProposeBody>(env.body), env.from);
      break;
    case MsgKind::CeVote:
      consensus_->on_vote(std::get<CeVoteBody>(env.body), env.from);
      break;
    case MsgKind::CeNewView:
      consensus_->on_new_view(std::get<CeNewViewBody>(env.body), env.from);
      break;
  }
}

}  // namespace stratus
