#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "stratus/digest.hpp"
#include "stratus/types.hpp"

namespace stratus {

struct SignatureShare {
  ReplicaId signer = 0;
  Digest over{};
  std::uint64_t tag = 0;  // authenticator, opaque to everything but the scheme
  friend bool operator==(const SignatureShare&, const SignatureShare&) = default;
};

// Pluggable signature abstraction. Production deployments would back this
// with real asymmetric signatures; the simulation uses a deterministic
// keyed-MAC scheme that is unforgeable by construction within the harness
// (adversaries never learn other replicas' keys).
class SignatureScheme {
 public:
  virtual ~SignatureScheme() = default;
  virtual SignatureShare sign(ReplicaId signer, const Digest& over) const = 0;
  virtual bool verify(const SignatureShare& share) const = 0;
};

class MacScheme final : public SignatureScheme {
 public:
  MacScheme(std::uint64_t key_seed, std::int32_t n_replicas);
  SignatureShare sign(ReplicaId signer, const Digest& over) const override;
  bool verify(const SignatureShare& share) const override;

 private:
  std::uint64_t mac(ReplicaId signer, const Digest& over) const;
  std::vector<std::uint64_t> keys_;
};

// A quorum of shares over one microblock id. Shares are kept sorted by
// signer and deduplicated; signers() is exactly the set of share signers.
struct AvailabilityProof {
  Digest over{};
  std::vector<SignatureShare> shares;  // sorted by signer, distinct signers

  std::vector<ReplicaId> signers() const {
    std::vector<ReplicaId> out;
    out.reserve(shares.size());
    for (const auto& s : shares) out.push_back(s.signer);
    return out;
  }
  std::uint64_t wire_bytes(std::uint64_t share_bytes) const {
    return shares.size() * share_bytes;
  }
};

enum class ProofError { None, QuorumNotReached, MixedDigest };

struct AggregateResult {
  std::optional<AvailabilityProof> proof;
  ProofError error = ProofError::None;
};

// Collapses duplicate signers, fails with QuorumNotReached unless the number
// of distinct signers reaches q, and with MixedDigest if shares disagree on
// the digest. Shares are assumed verified by the caller (acks are checked on
// receipt); verify_proof re-checks everything.
AggregateResult aggregate_proof(std::vector<SignatureShare> shares, std::int32_t q);

// True iff proof.over == over and the proof carries >= q distinct signers
// with valid shares over that digest. Invalid or mismatched shares are
// ignored rather than poisoning an otherwise sufficient quorum.
bool verify_proof(const AvailabilityProof& proof, const Digest& over, std::int32_t q,
                  const SignatureScheme& scheme);

}  // namespace stratus
