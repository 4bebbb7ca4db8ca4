#include "stratus/analytics.hpp"

#include <algorithm>

namespace stratus::analytics {

double tmax_lbft(double capacity, double tx_size, std::int32_t n) {
  if (n < 2) throw std::invalid_argument("tmax_lbft requires n >= 2");
  return capacity / (tx_size * static_cast<double>(n - 1));
}

double tmax_pbft_batched(double capacity, double tx_size, double proposal_size,
                         double vote_size, std::int32_t n) {
  const double nn = static_cast<double>(n);
  const double leader = nn * proposal_size + 4.0 * (nn - 1.0) * vote_size;
  const double follower = proposal_size + 4.0 * (nn - 1.0) * vote_size;
  return (proposal_size / tx_size) * std::min(capacity / leader, capacity / follower);
}

SmpWorkloads smp_workloads(double proposal_size, double mb_size, double id_size,
                           std::int32_t n) {
  const double nn = static_cast<double>(n);
  const double data = proposal_size * mb_size / id_size;  // K*eta/gamma
  return SmpWorkloads{data + (nn - 1.0) * proposal_size, 2.0 * data + proposal_size};
}

double tmax_smp(double capacity, double tx_size, double proposal_size, double mb_size,
                double id_size, std::int32_t n) {
  if (n < 3) throw std::invalid_argument("tmax_smp requires n >= 3");
  const SmpWorkloads w = smp_workloads(proposal_size, mb_size, id_size, n);
  const double txs_per_proposal = proposal_size * mb_size / (id_size * tx_size);
  return txs_per_proposal * std::min(capacity / w.leader, capacity / w.non_leader);
}

double optimal_eta(double id_size, std::int32_t n) {
  if (n < 3) throw std::invalid_argument("optimal_eta requires n >= 3");
  return static_cast<double>(n - 2) * id_size;
}

}  // namespace stratus::analytics
