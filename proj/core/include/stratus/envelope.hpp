#pragma once

#include <cstdint>
#include <optional>
#include <variant>

#include "stratus/chain.hpp"
#include "stratus/signature.hpp"
#include "stratus/types.hpp"

namespace stratus {

enum class MsgKind : std::uint8_t {
  PabMsg,
  PabAck,
  PabProof,
  PabRequest,
  PabResponse,
  LbQuery,
  LbInfo,
  LbForward,
  CePropose,
  CeVote,
  CeNewView,
};

const char* msg_kind_name(MsgKind k);

enum class MsgPriority : std::uint8_t { Consensus, Data };

struct PabMsgBody {
  MicroblockPtr mb;
};
struct PabAckBody {
  Digest over{};
  SignatureShare share;
};
struct PabProofBody {
  Digest id{};
  AvailabilityProof proof;
};
struct PabRequestBody {
  Digest id{};
};
struct PabResponseBody {
  MicroblockPtr mb;
};
struct LbQueryBody {
  Digest id{};
};
struct LbInfoBody {
  Digest id{};
  std::optional<Duration> load;  // NULL means "busy"
  bool reject = false;           // undersized-forward rejection
};
struct LbForwardBody {
  MicroblockPtr mb;
};
struct CeProposeBody {
  ProposalPtr proposal;
  QuorumCert justify;
};
struct CeVoteBody {
  View view = 0;
  Digest block{};
  SignatureShare share;
};
struct CeNewViewBody {
  View view = 0;
  QuorumCert high_qc;
};

using MsgBody = std::variant<PabMsgBody, PabAckBody, PabProofBody, PabRequestBody,
                             PabResponseBody, LbQueryBody, LbInfoBody, LbForwardBody,
                             CeProposeBody, CeVoteBody, CeNewViewBody>;

MsgKind kind_of(const MsgBody& body);

// Consensus traffic (and proofs, which gate voting) preempts bulk data.
constexpr MsgPriority priority_of(MsgKind k) {
  switch (k) {
    case MsgKind::CePropose:
    case MsgKind::CeVote:
    case MsgKind::CeNewView:
    case MsgKind::PabProof:
      return MsgPriority::Consensus;
    default:
      return MsgPriority::Data;
  }
}

// Outbound byte-accounting categories (bandwidth table rows).
enum class ByteCategory : std::uint8_t { Proposals, Microblocks, Votes, Acks };
ByteCategory category_of(MsgKind k);
const char* category_name(ByteCategory c);

struct MessageEnvelope {
  MsgKind kind{};
  PeerId from{};
  ReplicaId to = 0;
  MsgBody body;
  std::uint64_t size_bytes = 0;
  MsgPriority priority = MsgPriority::Data;
};

inline constexpr std::uint64_t kEnvelopeHeaderBytes = 40;

std::uint64_t wire_size(const MsgBody& body, std::uint64_t share_bytes);

MessageEnvelope make_envelope(PeerId from, ReplicaId to, MsgBody body, std::uint64_t share_bytes);

}  // namespace stratus
