#include "stratus/workload.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace stratus {

ZipfSampler::ZipfSampler(double s, double v, std::int32_t n) {
  pmf_.resize(static_cast<std::size_t>(n));
  cdf_.resize(static_cast<std::size_t>(n));
  double total = 0;
  for (std::int32_t r = 1; r <= n; ++r) {
    const double w = std::pow(v + static_cast<double>(r), -(1.0 + s));
    pmf_[static_cast<std::size_t>(r - 1)] = w;
    total += w;
  }
  double acc = 0;
  for (std::size_t i = 0; i < pmf_.size(); ++i) {
    pmf_[i] /= total;
    acc += pmf_[i];
    cdf_[i] = acc;
  }
  cdf_.back() = 1.0;
}

ReplicaId ZipfSampler::sample(Rng& rng) const {
  const double u = rng.unit();
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<ReplicaId>(it - cdf_.begin());
}

double ZipfSampler::top_share(std::int32_t k) const {
  double m = 0;
  for (std::int32_t i = 0; i < k && i < static_cast<std::int32_t>(pmf_.size()); ++i)
    m += pmf_[static_cast<std::size_t>(i)];
  return m;
}

WorkloadGenerator::WorkloadGenerator(const WorkloadSpec& spec, std::int32_t n_replicas,
                                     std::uint64_t seed)
    : spec_(spec), n_(n_replicas), assign_rng_(Rng(seed).fork("workload-assign")),
      time_rng_(Rng(seed).fork("workload-time")) {
  spec_.validate();
  if (spec_.assignment == WorkloadSpec::Assignment::Zipf) {
    zipf_ = std::make_unique<ZipfSampler>(spec_.zipf_s, spec_.zipf_v, n_);
  }
}

ReplicaId WorkloadGenerator::assign_replica(std::uint64_t) {
  if (zipf_ != nullptr) return zipf_->sample(assign_rng_);
  return static_cast<ReplicaId>(assign_rng_.below(static_cast<std::uint64_t>(n_)));
}

bool WorkloadGenerator::next(Arrival& out) {
  if (next_at_ >= spec_.duration) return false;
  out.at = next_at_;
  out.tx.id = "tx" + std::to_string(k_);
  out.tx.payload_bytes = spec_.payload_bytes;
  out.tx.arrival_time = next_at_;  // re-stamped at receipt by the harness
  out.tx.origin = assign_replica(k_);
  ++k_;

  const double gap_ns = 1e9 / spec_.rate_tx_per_s;
  if (spec_.poisson) {
    double u = time_rng_.unit();
    if (u <= 0) u = 1e-18;
    next_at_ += static_cast<SimTime>(std::llround(-std::log(u) * gap_ns));
  } else {
    next_at_ = static_cast<SimTime>(std::llround(static_cast<double>(k_) * gap_ns));
  }
  return true;
}

}  // namespace stratus
