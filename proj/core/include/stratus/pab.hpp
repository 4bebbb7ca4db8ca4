#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "stratus/context.hpp"
#include "stratus/signature.hpp"
#include "stratus/types.hpp"

namespace stratus {

// Provably available broadcast, one endpoint per replica.
//
// Push phase: the sender fans a microblock out to all replicas and collects
// signed acks; q distinct signers yield an availability proof, which is then
// broadcast. Recovery phase: a replica holding a valid proof but not the
// content requests it from random signers until it arrives.
class PabEndpoint {
 public:
  struct Hooks {
    // First content arrival (push or recovery). Receiver stores the block.
    std::function<void(const MicroblockPtr&, PeerId from)> deliver;
    // A valid proof became known (locally aggregated or received).
    std::function<void(const Digest&, const AvailabilityProof&)> proven;
    // Sender-side: push phase completed; st = proof time - broadcast time.
    std::function<void(const Digest&, Duration st)> stable_time;
    // Content lookup (mempool mbMap). Used to serve requests and to decide
    // whether recovery is needed.
    std::function<MicroblockPtr(const Digest&)> content;
    // A peer misbehaved (id mismatch, duplicate push origin).
    std::function<void(ReplicaId)> misbehavior;
    // A fetch round started for an id this replica was missing (metrics).
    std::function<void(const Digest&)> fetch_started;
  };

  PabEndpoint(ReplicaId self, const ProtocolParams& params, const SignatureScheme& scheme,
              Context& ctx, Hooks hooks)
      : self_(self), params_(params), scheme_(scheme), ctx_(ctx), hooks_(std::move(hooks)) {}

  // <PAB-Broadcast|mb>: push to everyone. Idempotent per microblock id; the
  // sender's own ack counts toward the quorum without a self-message.
  // `restrict_to`: non-null for selective (Byzantine) pushes.
  void broadcast(const MicroblockPtr& mb, const std::vector<ReplicaId>* restrict_to = nullptr);

  void on_msg(const MicroblockPtr& mb, PeerId from);
  void on_ack(const PabAckBody& ack, PeerId from);
  void on_proof(const Digest& id, const AvailabilityProof& proof, PeerId from);
  void on_request(const Digest& id, PeerId from);
  void on_response(const MicroblockPtr& mb, PeerId from);

  // Starts (or continues) the recovery phase for id. No-op when the content
  // is already present or no proof is known yet.
  void fetch(const Digest& id);

  // Counters, exposed for metrics and tests.
  std::uint64_t invalid_proofs = 0;
  std::uint64_t invalid_acks = 0;
  std::uint64_t fetch_rounds = 0;

  struct SenderState {
    std::map<ReplicaId, SignatureShare> acks;  // S in the push phase
    std::optional<AvailabilityProof> proof;
    bool proven = false;
    SimTime broadcast_at = 0;
  };
  struct ReceiverState {
    std::set<ReplicaId> signers;    // union over valid proofs seen
    std::set<ReplicaId> requested;
    bool fetching = false;
    bool msg_seen = false;  // a PAB-Msg for this id arrived before
    std::uint64_t fetch_gen = 0;
    std::optional<ReplicaId> first_pusher;
  };

  const SenderState* sender_state(const Digest& id) const;
  const ReceiverState* receiver_state(const Digest& id) const;

 private:
  bool has_content(const Digest& id) const { return hooks_.content(id) != nullptr; }
  void try_form_proof(const Digest& id, SenderState& st);
  void content_arrived(const Digest& id);
  void fetch_round(const Digest& id);

  ReplicaId self_;
  const ProtocolParams& params_;
  const SignatureScheme& scheme_;
  Context& ctx_;
  Hooks hooks_;

  std::map<Digest, SenderState> senders_;
  std::map<Digest, ReceiverState> receivers_;
};

}  // namespace stratus
