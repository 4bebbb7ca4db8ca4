#include "stratus/chain.hpp"

#include <algorithm>

namespace stratus {

void Proposal::finalize() {
  Hasher h;
  h.update("proposal");
  h.update_u64(static_cast<std::uint64_t>(view));
  h.update(parent);
  h.update_u64(static_cast<std::uint64_t>(proposer));
  for (const auto& [mb_id, proof] : payload) h.update(mb_id);
  for (const auto& tx : full_txs) h.update(tx.id);
  id = h.finish();
}

std::uint64_t Proposal::wire_bytes(std::uint64_t share_bytes) const {
  std::uint64_t n = 8 + 32 + 32;  // view + parent + id
  for (const auto& [mb_id, proof] : payload) n += mb_id.size() + proof.wire_bytes(share_bytes);
  for (const auto& tx : full_txs) n += tx.id.size() + tx.payload_bytes;
  return n;
}

Digest vote_digest(View view, const Digest& block) {
  Hasher h;
  h.update("vote");
  h.update_u64(static_cast<std::uint64_t>(view));
  h.update(block);
  return h.finish();
}

QuorumCert genesis_qc() { return QuorumCert{0, kZeroDigest, {}}; }

bool verify_qc(const QuorumCert& qc, std::int32_t quorum, const SignatureScheme& scheme) {
  if (qc.is_genesis()) return qc.block == kZeroDigest;
  const Digest want = vote_digest(qc.view, qc.block);
  std::vector<ReplicaId> valid;
  for (const auto& s : qc.shares) {
    if (s.over != want) continue;
    if (!scheme.verify(s)) continue;
    valid.push_back(s.signer);
  }
  std::sort(valid.begin(), valid.end());
  valid.erase(std::unique(valid.begin(), valid.end()), valid.end());
  return static_cast<std::int32_t>(valid.size()) >= quorum;
}

}  // namespace stratus
