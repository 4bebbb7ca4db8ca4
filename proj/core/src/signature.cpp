#include "stratus/signature.hpp"

#include <algorithm>

#include "stratus/rng.hpp"

namespace stratus {

MacScheme::MacScheme(std::uint64_t key_seed, std::int32_t n_replicas) {
  keys_.reserve(static_cast<std::size_t>(n_replicas));
  std::uint64_t x = key_seed;
  for (std::int32_t i = 0; i < n_replicas; ++i) {
    x = Rng::splitmix(x + 0x5bd1e995);
    keys_.push_back(x);
  }
}

std::uint64_t MacScheme::mac(ReplicaId signer, const Digest& over) const {
  Hasher h;
  h.update_u64(keys_[static_cast<std::size_t>(signer)]);
  h.update(over);
  Digest d = h.finish();
  std::uint64_t tag = 0;
  for (int i = 0; i < 8; ++i) tag |= static_cast<std::uint64_t>(d[i]) << (8 * i);
  return tag;
}

SignatureShare MacScheme::sign(ReplicaId signer, const Digest& over) const {
  return SignatureShare{signer, over, mac(signer, over)};
}

bool MacScheme::verify(const SignatureShare& share) const {
  if (share.signer < 0 || static_cast<std::size_t>(share.signer) >= keys_.size()) return false;
  return share.tag == mac(share.signer, share.over);
}

AggregateResult aggregate_proof(std::vector<SignatureShare> shares, std::int32_t q) {
  std::sort(shares.begin(), shares.end(),
            [](const SignatureShare& a, const SignatureShare& b) { return a.signer < b.signer; });
  shares.erase(std::unique(shares.begin(), shares.end(),
                           [](const SignatureShare& a, const SignatureShare& b) {
                             return a.signer == b.signer;
                           }),
               shares.end());
  if (shares.empty()) return {std::nullopt, ProofError::QuorumNotReached};
  const Digest& over = shares.front().over;
  for (const auto& s : shares)
    if (s.over != over) return {std::nullopt, ProofError::MixedDigest};
  if (static_cast<std::int32_t>(shares.size()) < q)
    return {std::nullopt, ProofError::QuorumNotReached};
  return {AvailabilityProof{over, std::move(shares)}, ProofError::None};
}

bool verify_proof(const AvailabilityProof& proof, const Digest& over, std::int32_t q,
                  const SignatureScheme& scheme) {
  if (proof.over != over) return false;
  std::vector<ReplicaId> valid;
  for (const auto& s : proof.shares) {
    if (s.over != over) continue;
    if (!scheme.verify(s)) continue;
    valid.push_back(s.signer);
  }
  std::sort(valid.begin(), valid.end());
  valid.erase(std::unique(valid.begin(), valid.end()), valid.end());
  return static_cast<std::int32_t>(valid.size()) >= q;
}

}  // namespace stratus
