#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace stratus {

// Content digests are SHA-256. The algorithm name is surfaced in metrics
// output so results can be tied to the exact content-addressing function.
using Digest = std::array<std::uint8_t, 32>;

inline constexpr const char* kDigestAlgo = "sha256";
inline constexpr Digest kZeroDigest{};

// Incremental SHA-256 (OpenSSL EVP underneath).
class Hasher {
 public:
  Hasher();
  ~Hasher();
  Hasher(const Hasher&) = delete;
  Hasher& operator=(const Hasher&) = delete;

  void update(const void* data, std::size_t len);
  void update(std::string_view s) { update(s.data(), s.size()); }
  void update_u64(std::uint64_t v);  // little-endian
  void update(const Digest& d) { update(d.data(), d.size()); }
  Digest finish();

 private:
  void* ctx_;
};

Digest sha256(std::string_view data);

std::string to_hex(const Digest& d);
std::string short_hex(const Digest& d);  // first 8 hex chars, for traces

}  // namespace stratus
