#pragma once

#include <cstdint>
#include <stdexcept>

namespace stratus::analytics {

// Closed-form saturation-throughput models. All sizes in bits, capacity in
// bits per second, results in transactions per second. Every model is
// bounded above by C/B (each replica must at least receive every tx once).

// Single-leader dissemination: the leader pushes B(n-1) bits per tx.
//   T_max = C / (B (n-1))
double tmax_lbft(double capacity, double tx_size, std::int32_t n);

// PBFT with K-bit batched proposals and sigma-bit votes:
//   T_max = (K/B) * min{ C / (nK + 4(n-1)s),  C / (K + 4(n-1)s) }
double tmax_pbft_batched(double capacity, double tx_size, double proposal_size,
                         double vote_size, std::int32_t n);

// Shared mempool: microblocks of eta bits identified by gamma-bit ids,
// disseminated by all replicas; the leader proposes ids only.
//   T_max = (K eta / (gamma B)) * min{ C / (K eta/gamma + (n-1)K),
//                                      C / (2K eta/gamma + K) }
double tmax_smp(double capacity, double tx_size, double proposal_size, double mb_size,
                double id_size, std::int32_t n);

// Leader and non-leader workloads balance at eta = (n-2) gamma, where
// tmax_smp collapses to C(n-2)/(B(2n-3)) -> C/(2B) for large n.
double optimal_eta(double id_size, std::int32_t n);

// The two min-branch workloads of the SMP model (exposed so the branch
// switch at the optimum is checkable directly).
struct SmpWorkloads {
  double leader;
  double non_leader;
};
SmpWorkloads smp_workloads(double proposal_size, double mb_size, double id_size, std::int32_t n);

}  // namespace stratus::analytics
