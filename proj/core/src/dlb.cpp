#include "stratus/dlb.hpp"

#include <algorithm>
#include <cmath>

namespace stratus {

void StEstimator::record(Duration st) {
  window_.push_back(st);
  if (static_cast<std::int32_t>(window_.size()) > window_capacity_) window_.pop_front();
  recompute();

  if (!baseline_ || !epsilon_) {
    warmup_.push_back(st);
    if (static_cast<std::int32_t>(warmup_.size()) >= warmup_target_) {
      std::vector<Duration> sorted = warmup_;
      std::sort(sorted.begin(), sorted.end());
      if (!baseline_) baseline_ = sorted[sorted.size() / 2];
      if (!epsilon_) {
        double mean = 0;
        for (Duration v : warmup_) mean += static_cast<double>(v);
        mean /= static_cast<double>(warmup_.size());
        double var = 0;
        for (Duration v : warmup_) {
          const double dv = static_cast<double>(v) - mean;
          var += dv * dv;
        }
        var /= static_cast<double>(warmup_.size());
        epsilon_ = static_cast<Duration>(std::sqrt(var));
      }
      warmup_.clear();
    }
  }
}

void StEstimator::recompute() {
  std::vector<Duration> sorted(window_.begin(), window_.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  // Nearest-rank: the ceil(p/100 * n)-th smallest value.
  std::size_t rank = (static_cast<std::size_t>(percentile_) * n + 99) / 100;
  if (rank < 1) rank = 1;
  current_st_ = sorted[rank - 1];
}

bool StEstimator::busy() const {
  if (!current_st_ || !baseline_ || !epsilon_) return false;
  return *current_st_ > *baseline_ + *epsilon_ + beta_;
}

std::optional<Duration> StEstimator::load_status() const {
  if (busy()) return std::nullopt;
  return current_st_.value_or(0);
}

void LoadBalancer::on_new_microblock(const MicroblockPtr& mb, bool busy) {
  // Forwarding an undersized batch would be rejected by the proxy anyway.
  if (!busy || mb->payload_bytes() < params_.min_forward_batch_bytes ||
      params_.n_replicas < 2) {
    hooks_.self_broadcast(mb);
    return;
  }
  forward_load(mb);
}

std::vector<ReplicaId> LoadBalancer::sample_targets(std::int32_t d) {
  std::vector<ReplicaId> pool;
  pool.reserve(static_cast<std::size_t>(params_.n_replicas) - 1);
  for (ReplicaId r = 0; r < params_.n_replicas; ++r)
    if (r != self_) pool.push_back(r);
  std::vector<ReplicaId> picked;
  const std::int32_t count = std::min<std::int32_t>(d, static_cast<std::int32_t>(pool.size()));
  for (std::int32_t i = 0; i < count; ++i) {
    const std::size_t j = i + ctx_.rng().below(pool.size() - static_cast<std::size_t>(i));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    picked.push_back(pool[static_cast<std::size_t>(i)]);
  }
  return picked;
}

void LoadBalancer::forward_load(const MicroblockPtr& mb) {
  ++forward_attempts;
  PendingForward& pf = pending_[mb->id];
  // Bookkeeping step: any still-unproven proxy stays banned across resets.
  for (const auto& [id, other] : pending_)
    if (other.proxy) ban_list_.insert(*other.proxy);

  pf.mb = mb;
  pf.queried.clear();
  pf.samples.clear();
  pf.proxy.reset();
  const std::uint64_t gen = ++pf.gen;

  for (ReplicaId r : sample_targets(params_.d))
    if (!ban_list_.count(r)) pf.queried.push_back(r);
  for (ReplicaId r : pf.queried) ctx_.send(r, LbQueryBody{mb->id});
  // tau runs even when every sampled target was banned; the timeout then
  // falls back to self-broadcast (no replies can come).
  arm_sample_timer(mb->id, gen);
}

void LoadBalancer::arm_sample_timer(const Digest& id, std::uint64_t gen) {
  ctx_.after(params_.tau_sample, [this, id, gen] {
    auto it = pending_.find(id);
    if (it == pending_.end() || it->second.gen != gen || it->second.proxy) return;
    decide(id);
  });
}

void LoadBalancer::on_query(const Digest& id, PeerId from) {
  if (from.is_client()) return;
  // NULL is sent rather than staying silent so the querier can tell busy
  // from unreachable.
  ctx_.send(from.replica(), LbInfoBody{id, hooks_.load_status(), false});
}

void LoadBalancer::on_info(const LbInfoBody& info, PeerId from) {
  if (from.is_client()) return;
  auto it = pending_.find(info.id);
  if (it == pending_.end()) return;
  PendingForward& pf = it->second;

  if (info.reject) {
    // Undersized-forward rejection from the chosen proxy: broadcast it
    // ourselves; the proxy was not at fault.
    if (pf.proxy && *pf.proxy == from.replica()) {
      ban_list_.erase(*pf.proxy);
      MicroblockPtr mb = pf.mb;
      pending_.erase(it);
      hooks_.self_broadcast(mb);
    }
    return;
  }

  if (pf.proxy) return;  // decision already made
  if (std::find(pf.queried.begin(), pf.queried.end(), from.replica()) == pf.queried.end())
    return;  // unsolicited
  pf.samples[from.replica()] = info.load;
  if (pf.samples.size() == pf.queried.size()) {
    ++pf.gen;  // cancel tau
    decide(info.id);
  }
}

void LoadBalancer::decide(const Digest& id) {
  auto it = pending_.find(id);
  if (it == pending_.end()) return;
  PendingForward& pf = it->second;

  std::optional<ReplicaId> best;
  Duration best_w = 0;
  for (const auto& [r, w] : pf.samples) {
    if (!w) continue;  // NULL replies are non-candidates
    if (!best || *w < best_w) {  // ties resolve to the lowest id (map order)
      best = r;
      best_w = *w;
    }
  }
  if (!best) {
    MicroblockPtr mb = pf.mb;
    pending_.erase(it);
    hooks_.self_broadcast(mb);
    return;
  }

  pf.proxy = *best;
  pf.deadline = ctx_.now() + params_.tau_forward;
  ban_list_.insert(*best);  // every proxy is banned until its proof arrives
  const std::uint64_t gen = ++pf.gen;
  ctx_.send(*best, LbForwardBody{pf.mb});
  arm_forward_timer(id, gen);
}

void LoadBalancer::arm_forward_timer(const Digest& id, std::uint64_t gen) {
  ctx_.after(params_.tau_forward, [this, id, gen] {
    auto it = pending_.find(id);
    if (it == pending_.end() || it->second.gen != gen) return;
    // No proof in time: the proxy stays banned, resample and retry.
    ++forward_timeouts;
    forward_load(it->second.mb);
  });
}

void LoadBalancer::on_forward(const MicroblockPtr& mb, PeerId from) {
  if (from.is_client()) return;
  if (mb->payload_bytes() < params_.min_forward_batch_bytes) {
    ctx_.send(from.replica(), LbInfoBody{mb->id, std::nullopt, true});
    return;
  }
  hooks_.proxy_broadcast(mb);
}

bool LoadBalancer::on_proof_arrival(const Digest& id, const AvailabilityProof& proof) {
  auto it = pending_.find(id);
  if (it == pending_.end() || !it->second.proxy) return false;
  if (ctx_.now() > it->second.deadline) return false;  // late; re-forward owns it
  ban_list_.erase(*it->second.proxy);
  ++it->second.gen;  // cancel tau'
  pending_.erase(it);
  hooks_.take_over_recovery(id, proof);
  return true;
}

void LoadBalancer::reset_ban_list() {
  ban_list_.clear();
  // Re-add in-flight proxies immediately: the banList invariant holds at
  // every observable instant.
  for (const auto& [id, pf] : pending_)
    if (pf.proxy) ban_list_.insert(*pf.proxy);
}

}  // namespace stratus
