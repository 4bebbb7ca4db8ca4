#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "stratus/signature.hpp"
#include "stratus/types.hpp"

namespace stratus {

using View = std::int64_t;

// Ordered (microblock id, availability proof) pairs plus chain metadata.
// In native mode the payload is the raw transaction batch instead.
struct Proposal {
  Digest id{};  // content digest, set by finalize()
  View view = 0;
  std::vector<std::pair<Digest, AvailabilityProof>> payload;
  std::vector<Transaction> full_txs;  // native mode only
  Digest parent{};
  ReplicaId proposer = 0;

  void finalize();  // computes id over (view, parent, proposer, payload ids)
  std::uint64_t wire_bytes(std::uint64_t share_bytes) const;
};
using ProposalPtr = std::shared_ptr<const Proposal>;

struct Block {
  ProposalPtr proposal;
  std::vector<MicroblockPtr> microblocks;  // same order as payload
  bool full = false;
};

// 2f+1 distinct signers over (view, block digest).
struct QuorumCert {
  View view = 0;
  Digest block{};
  std::vector<SignatureShare> shares;

  bool is_genesis() const { return view == 0; }
  std::uint64_t wire_bytes(std::uint64_t share_bytes) const {
    return 8 + 32 + shares.size() * share_bytes;
  }
};

Digest vote_digest(View view, const Digest& block);

QuorumCert genesis_qc();

bool verify_qc(const QuorumCert& qc, std::int32_t quorum, const SignatureScheme& scheme);

}  // namespace stratus
