#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stratus/digest.hpp"
#include "stratus/time.hpp"

namespace stratus {

// Replicas are indexed 0..N-1; the index also defines the total order used
// for deterministic tie-breaks.
using ReplicaId = std::int32_t;

// Message origin: a replica index, or a client (negative ids).
struct PeerId {
  std::int32_t v = 0;
  bool is_client() const { return v < 0; }
  ReplicaId replica() const { return v; }
  static PeerId replica_id(ReplicaId r) { return PeerId{r}; }
  static PeerId client(std::int32_t c) { return PeerId{-1 - c}; }
  friend bool operator==(PeerId a, PeerId b) { return a.v == b.v; }
};

struct Transaction {
  std::string id;  // opaque, unique system-wide (client-assigned)
  std::uint32_t payload_bytes = 0;
  SimTime arrival_time = 0;  // first receipt at the origin replica
  ReplicaId origin = 0;
};

struct Microblock {
  Digest id{};  // digest over the tx id sequence, see compute_microblock_id
  std::vector<Transaction> txs;
  ReplicaId creator = 0;
  SimTime created_at = 0;

  std::uint64_t payload_bytes() const {
    std::uint64_t n = 0;
    for (const auto& tx : txs) n += tx.payload_bytes;
    return n;
  }
  std::uint64_t wire_bytes() const {
    std::uint64_t n = 0;
    for (const auto& tx : txs) n += tx.id.size() + tx.payload_bytes;
    return n;
  }
};
using MicroblockPtr = std::shared_ptr<const Microblock>;

// Order-sensitive digest over the transaction id sequence. Throws
// std::invalid_argument on an empty batch.
Digest compute_microblock_id(std::span<const Transaction> txs);

MicroblockPtr make_microblock(std::vector<Transaction> txs, ReplicaId creator, SimTime at);

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& field, const std::string& why)
      : std::runtime_error("config field '" + field + "': " + why), field(field) {}
  std::string field;
};

struct ProtocolParams {
  std::int32_t n_replicas = 4;  // N
  std::int32_t f = 1;           // max Byzantine
  std::int32_t q = 2;           // PAB quorum, f+1 <= q <= 2f+1
  std::int32_t d = 1;           // Pod sample size

  Duration delta_fetch = msec(200);    // fetch retry timer
  Duration tau_sample = msec(100);     // load-sample timeout
  Duration tau_forward = msec(400);    // forward (proof) timeout
  double alpha_fetch = 1.0;            // per-signer fetch-request probability

  std::uint64_t batch_size_bytes = 256'000;  // payload bytes per microblock
  Duration batch_timeout = msec(200);
  std::int32_t block_size = 100000;  // max microblock ids per proposal

  std::int32_t window_size = 100;  // ST sliding window
  std::int32_t percentile = 95;    // nearest-rank percentile for ST

  Duration view_timeout = msec(1000);
  Duration banlist_reset_period = msec(4000);

  std::uint64_t min_forward_batch_bytes = 1024;  // proxies reject smaller forwards

  // Busy detection: current_st > st_baseline + st_epsilon + st_beta.
  // baseline/epsilon < 0 means "learn during warm-up" (median / stddev of the
  // first st_warmup_samples stable times).
  Duration st_baseline = -1;
  Duration st_epsilon = -1;
  Duration st_beta = msec(20);
  std::int32_t st_warmup_samples = 20;

  std::uint64_t share_bytes = 64;  // wire size of one signature share

  void validate() const {
    if (n_replicas < 3 * f + 1)
      throw ConfigError("n_replicas", "requires n >= 3f+1");
    if (q < f + 1 || q > 2 * f + 1)
      throw ConfigError("q", "requires f+1 <= q <= 2f+1");
    if (d < 1 || d > n_replicas - 1)
      throw ConfigError("d", "requires 1 <= d <= n-1");
    if (window_size < 1) throw ConfigError("window_size", "requires >= 1");
    if (percentile < 1 || percentile > 100)
      throw ConfigError("percentile", "requires 1 <= percentile <= 100");
    if (alpha_fetch < 0.0 || alpha_fetch > 1.0)
      throw ConfigError("alpha_fetch", "requires probability in [0,1]");
    if (batch_size_bytes == 0) throw ConfigError("batch_size_bytes", "requires > 0");
    if (block_size < 1) throw ConfigError("block_size", "requires >= 1");
  }
};

}  // namespace stratus
