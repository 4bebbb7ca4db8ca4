#include "stratus/envelope.hpp"

namespace stratus {

const char* msg_kind_name(MsgKind k) {
  switch (k) {
    case MsgKind::PabMsg: return "PAB-Msg";
    case MsgKind::PabAck: return "PAB-Ack";
    case MsgKind::PabProof: return "PAB-Proof";
    case MsgKind::PabRequest: return "PAB-Request";
    case MsgKind::PabResponse: return "PAB-Response";
    case MsgKind::LbQuery: return "LB-Query";
    case MsgKind::LbInfo: return "LB-Info";
    case MsgKind::LbForward: return "LB-Forward";
    case MsgKind::CePropose: return "CE-Propose";
    case MsgKind::CeVote: return "CE-Vote";
    case MsgKind::CeNewView: return "CE-NewView";
  }
  return "?";
}

MsgKind kind_of(const MsgBody& body) {
  return static_cast<MsgKind>(body.index());
}

ByteCategory category_of(MsgKind k) {
  switch (k) {
    case MsgKind::CePropose:
      return ByteCategory::Proposals;
    case MsgKind::PabMsg:
    case MsgKind::PabResponse:
    case MsgKind::LbForward:
      return ByteCategory::Microblocks;
    case MsgKind::CeVote:
    case MsgKind::CeNewView:
      return ByteCategory::Votes;
    default:
      return ByteCategory::Acks;  // PAB-Ack/Proof/Request, LB-Query/Info
  }
}

const char* category_name(ByteCategory c) {
  switch (c) {
    case ByteCategory::Proposals: return "proposals";
    case ByteCategory::Microblocks: return "microblocks";
    case ByteCategory::Votes: return "votes";
    case ByteCategory::Acks: return "acks";
  }
  return "?";
}

namespace {

struct SizeVisitor {
  std::uint64_t share_bytes;

  std::uint64_t operator()(const PabMsgBody& b) const { return b.mb->wire_bytes() + 32; }
  std::uint64_t operator()(const PabAckBody&) const { return 32 + share_bytes; }
  std::uint64_t operator()(const PabProofBody& b) const {
    return 32 + b.proof.wire_bytes(share_bytes);
  }
  std::uint64_t operator()(const PabRequestBody&) const { return 32; }
  std::uint64_t operator()(const PabResponseBody& b) const { return b.mb->wire_bytes() + 32; }
  std::uint64_t operator()(const LbQueryBody&) const { return 32; }
  std::uint64_t operator()(const LbInfoBody&) const { return 32 + 8; }
  std::uint64_t operator()(const LbForwardBody& b) const { return b.mb->wire_bytes() + 32; }
  std::uint64_t operator()(const CeProposeBody& b) const {
    return b.proposal->wire_bytes(share_bytes) + b.justify.wire_bytes(share_bytes);
  }
  std::uint64_t operator()(const CeVoteBody&) const { return 8 + 32 + share_bytes; }
  std::uint64_t operator()(const CeNewViewBody& b) const {
    return 8 + b.high_qc.wire_bytes(share_bytes);
  }
};

}  // namespace

std::uint64_t wire_size(const MsgBody& body, std::uint64_t share_bytes) {
  return kEnvelopeHeaderBytes + std::visit(SizeVisitor{share_bytes}, body);
}

MessageEnvelope make_envelope(PeerId from, ReplicaId to, MsgBody body,
                              std::uint64_t share_bytes) {
  MessageEnvelope env;
  env.kind = kind_of(body);
  env.from = from;
  env.to = to;
  env.size_bytes = wire_size(body, share_bytes);
  env.priority = priority_of(env.kind);
  env.body = std::move(body);
  return env;
}

}  // namespace stratus
