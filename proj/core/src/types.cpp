#include "stratus/types.hpp"

namespace stratus {

Digest compute_microblock_id(std::span<const Transaction> txs) {
  if (txs.empty()) throw std::invalid_argument("EmptyBatch: microblock needs at least one tx");
  Hasher h;
  for (const auto& tx : txs) h.update(tx.id);
  return h.finish();
}

MicroblockPtr make_microblock(std::vector<Transaction> txs, ReplicaId creator, SimTime at) {
  auto mb = std::make_shared<Microblock>();
  mb->id = compute_microblock_id(txs);
  mb->txs = std::move(txs);
  mb->creator = creator;
  mb->created_at = at;
  return mb;
}

}  // namespace stratus
