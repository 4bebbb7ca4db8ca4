#include "stratus/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace stratus {

ScenarioRun::ScenarioRun(const Scenario& scenario) : scenario_(scenario) {
  scenario_.validate();
  const ProtocolParams& p = scenario_.params;

  scheme_ = std::make_unique<MacScheme>(Rng(scenario_.seed).fork("keys").next(), p.n_replicas);
  net_ = std::make_unique<SimNet>(p.n_replicas, scenario_.link, scenario_.seed,
                                  scenario_.token_fraction, scenario_.token_burst_bytes);
  net_->set_optimizations(mode_uses_proofs(scenario_.mode));

  first_adversary_ = p.n_replicas - scenario_.adversary.count;
  const AdversaryBehavior behavior = adversary_behavior_from(scenario_.adversary.behavior);
  if (scenario_.adversary.count > 0 && behavior == AdversaryBehavior::None)
    throw ConfigError("adversary.behavior", "count > 0 needs a behavior");

  // Selective senders push to just enough correct replicas for a quorum
  // (themselves included); the leader learns ids via the proof broadcast.
  std::vector<ReplicaId> push_targets;
  const std::int32_t push_count =
      scenario_.adversary.push_count >= 0 ? scenario_.adversary.push_count : p.q - 1;
  for (ReplicaId r = 0; r < first_adversary_ && static_cast<std::int32_t>(push_targets.size()) < push_count; ++r)
    push_targets.push_back(r);

  wire_observer();

  for (ReplicaId i = 0; i < p.n_replicas; ++i) {
    AdversaryConfig cfg;
    if (i >= first_adversary_) {
      cfg.behavior = behavior;
      cfg.push_targets = push_targets;
      if (behavior == AdversaryBehavior::Silent) net_->set_silent(i, true);
    }
    replicas_.push_back(std::make_unique<Replica>(i, scenario_.mode, scenario_.params, *scheme_,
                                                  *net_, scenario_.seed, cfg, &observer_));
    net_->attach(i, [this, i](const MessageEnvelope& env) {
      replicas_[static_cast<std::size_t>(i)]->on_envelope(env);
    });
  }

  delivered_.resize(static_cast<std::size_t>(p.n_replicas));
  commit_heights_.assign(static_cast<std::size_t>(p.n_replicas), 0);
  buckets_.assign(static_cast<std::size_t>(scenario_.horizon / kSecond) + 1, 0);

  if (scenario_.fluctuation.enabled) {
    net_->inject_fluctuation(scenario_.fluctuation.start, scenario_.fluctuation.duration,
                             scenario_.fluctuation.lo, scenario_.fluctuation.hi);
  }
}

ScenarioRun::~ScenarioRun() = default;

void ScenarioRun::wire_observer() {
  observer_.tx_executed = [this](ReplicaId r, const Transaction& tx, SimTime t) {
    if (r != reference()) return;
    latency_ms_.push_back(to_ms(t - tx.arrival_time));
    const std::size_t bucket = static_cast<std::size_t>(t / kSecond);
    if (bucket < buckets_.size()) ++buckets_[bucket];
    if (tx.id.size() > 2 && tx.id[0] == 't' && tx.id[1] == 'x') {
      const std::uint64_t k = std::strtoull(tx.id.c_str() + 2, nullptr, 10);
      if (k < tx_committed_.size()) tx_committed_[k] = true;
    }
  };
  observer_.block_committed = [this](ReplicaId r, const ProposalPtr& p) {
    if (!is_correct(r)) return;
    const std::uint64_t h = commit_heights_[static_cast<std::size_t>(r)]++;
    if (h < canonical_.size()) {
      if (canonical_[h] != p->id) {
        throw SafetyViolation("commit logs diverge at height " + std::to_string(h) +
                              " (replica " + std::to_string(r) + ")");
      }
    } else if (h == canonical_.size()) {
      canonical_.push_back(p->id);
    } else {
      throw SafetyViolation("commit height gap at replica " + std::to_string(r));
    }
    if (r == reference()) ++ref_commit_blocks_;
  };
  observer_.view_change = [this](ReplicaId r, View) {
    if (is_correct(r)) ++view_changes_;
  };
  observer_.fetch_started = [this](ReplicaId r, const Digest&) {
    if (is_correct(r)) ++fetches_;
  };
  observer_.content_delivered = [this](ReplicaId r, const Digest& id) {
    delivered_[static_cast<std::size_t>(r)].insert(id);
  };
}

void ScenarioRun::schedule_workload() {
  generator_ = std::make_unique<WorkloadGenerator>(scenario_.workload,
                                                   scenario_.params.n_replicas, scenario_.seed);
  const std::uint64_t expected = static_cast<std::uint64_t>(
      scenario_.workload.rate_tx_per_s * to_sec(scenario_.workload.duration)) + 2;
  tx_origin_.reserve(expected);
  tx_committed_.reserve(expected);

  // Chained scheduling keeps the event heap small at high rates: handling
  // arrival k also enqueues the generation of arrival k+1.
  struct Chain {
    ScenarioRun* run;
    void operator()() const {
      ScenarioRun* r = run;
      WorkloadGenerator::Arrival a;
      if (!r->generator_->next(a)) return;
      a.tx.arrival_time = a.at;
      r->tx_origin_.push_back(a.tx.origin);
      r->tx_committed_.push_back(false);
      ++r->submitted_;
      const ReplicaId origin = a.tx.origin;
      const SimTime at = a.at;
      r->net_->at(at, [r, origin, tx = std::move(a.tx)]() mutable {
        r->replicas_[static_cast<std::size_t>(origin)]->submit_tx(std::move(tx));
      });
      r->net_->at(at, Chain{r});
    }
  };
  net_->at(0, Chain{this});
}

void ScenarioRun::start() {
  if (started_) return;
  started_ = true;
  schedule_workload();
  for (auto& r : replicas_) r->start();
}

void ScenarioRun::run_until(SimTime t) { net_->run(t, scenario_.event_budget); }

MetricsReport ScenarioRun::run() {
  start();
  run_until(scenario_.horizon);
  return collect();
}

MetricsReport ScenarioRun::collect() {
  MetricsReport r;
  r.scenario = scenario_.name;
  r.mode = mempool_mode_name(scenario_.mode);
  r.seed = scenario_.seed;
  r.n = scenario_.params.n_replicas;
  r.f = scenario_.params.f;
  r.q = scenario_.params.q;
  r.d = scenario_.params.d;
  r.horizon_s = to_sec(scenario_.horizon);

  r.committed_txs = latency_ms_.size();
  r.committed_blocks = ref_commit_blocks_;
  r.throughput_tx_s = static_cast<double>(r.committed_txs) / r.horizon_s;
  if (!latency_ms_.empty()) {
    std::vector<double> sorted = latency_ms_;
    std::sort(sorted.begin(), sorted.end());
    double sum = 0;
    for (double v : sorted) sum += v;
    r.latency_mean_ms = sum / static_cast<double>(sorted.size());
    auto rank = [&sorted](int p) {
      std::size_t i = (static_cast<std::size_t>(p) * sorted.size() + 99) / 100;
      return sorted[std::max<std::size_t>(i, 1) - 1];
    };
    r.latency_p50_ms = rank(50);
    r.latency_p95_ms = rank(95);
  }
  r.view_changes = view_changes_;
  r.missing_fetches = fetches_;
  r.per_second_commits = buckets_;

  for (std::int32_t i = 0; i < scenario_.params.n_replicas; ++i) {
    r.egress_bytes.push_back({net_->egress_bytes(i, ByteCategory::Proposals),
                              net_->egress_bytes(i, ByteCategory::Microblocks),
                              net_->egress_bytes(i, ByteCategory::Votes),
                              net_->egress_bytes(i, ByteCategory::Acks)});
  }
  r.sent = net_->counters().sent;
  r.delivered = net_->counters().delivered;
  r.dropped_loss = net_->counters().dropped_loss;
  r.suppressed = net_->counters().suppressed_silent;

  // SMP-Inclusion: every tx received by a correct replica is committed.
  for (std::size_t k = 0; k < tx_origin_.size(); ++k) {
    if (tx_origin_[k] < first_adversary_ && !tx_committed_[k]) {
      r.inclusion_ok = false;
      break;
    }
  }
  // SMP-Stability: every committed microblock id is content-delivered at
  // every correct replica (execution also implies delivery, but laggards
  // holding only the content still count).
  for (const Digest& block_id : canonical_) {
    ProposalPtr p = replicas_[0]->consensus().proposal(block_id);
    if (p == nullptr) continue;
    for (const auto& [mb_id, proof] : p->payload) {
      for (std::int32_t i = 0; i < first_adversary_; ++i) {
        const auto& d = delivered_[static_cast<std::size_t>(i)];
        if (!d.count(mb_id)) {
          r.stability_ok = false;
          break;
        }
      }
      if (!r.stability_ok) break;
    }
    if (!r.stability_ok) break;
  }
  return r;
}

MetricsReport run_scenario(const Scenario& scenario) { return ScenarioRun(scenario).run(); }

Scenario apply_axis(Scenario s, const std::string& axis, const std::string& value) {
  auto as_i = [&value] { return static_cast<std::int32_t>(std::stol(value)); };
  auto as_u = [&value] { return static_cast<std::uint64_t>(std::stoull(value)); };
  auto as_d = [&value] { return std::stod(value); };
  if (axis == "n") {
    s.params.n_replicas = as_i();
    s.params.f = (s.params.n_replicas - 1) / 3;
    s.params.q = s.params.f + 1;
  } else if (axis == "batch_size") {
    s.params.batch_size_bytes = as_u();
  } else if (axis == "rate") {
    s.workload.rate_tx_per_s = as_d();
  } else if (axis == "zipf") {
    if (value == "uniform") {
      s.workload.assignment = WorkloadSpec::Assignment::Uniform;
    } else if (value == "zipf1") {
      s.workload.assignment = WorkloadSpec::Assignment::Zipf;
      s.workload.zipf_s = 1.01;
      s.workload.zipf_v = 1.0;
    } else if (value == "zipf10") {
      s.workload.assignment = WorkloadSpec::Assignment::Zipf;
      s.workload.zipf_s = 1.01;
      s.workload.zipf_v = 10.0;
    } else {
      throw ConfigError("axis.zipf", "values: uniform|zipf1|zipf10");
    }
  } else if (axis == "byz") {
    s.adversary.count = as_i();
  } else if (axis == "d") {
    s.params.d = as_i();
  } else if (axis == "q") {
    s.params.q = as_i();
  } else if (axis == "mode") {
    s.mode = mempool_mode_from(value);
  } else if (axis == "seed") {
    s.seed = as_u();
  } else {
    throw ConfigError("axis", "unknown axis '" + axis + "'");
  }
  s.name += "-" + axis + value;
  return s;
}

std::vector<SweepRow> sweep(const Scenario& base, const std::string& axis,
                            const std::vector<std::string>& values) {
  std::vector<SweepRow> rows;
  for (const std::string& v : values) {
    SweepRow row;
    row.value = v;
    try {
      row.report = run_scenario(apply_axis(base, axis, v));
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_metrics_header(std::ostream& out, bool with_axis) {
  if (with_axis) out << "axis,";
  out << "scenario,mode,seed,n,f,q,d,horizon_s,committed_txs,committed_blocks,"
         "throughput_tx_s,latency_mean_ms,latency_p50_ms,latency_p95_ms,view_changes,"
         "missing_fetches,sent,delivered,dropped_loss,suppressed,safety_ok,inclusion_ok,"
         "stability_ok,digest_algo\n";
}

void write_metrics_row(std::ostream& out, const MetricsReport& r, const std::string& axis_value,
                       bool with_axis) {
  if (with_axis) out << axis_value << ',';
  out << r.scenario << ',' << r.mode << ',' << r.seed << ',' << r.n << ',' << r.f << ',' << r.q
      << ',' << r.d << ',' << format_double(r.horizon_s) << ',' << r.committed_txs << ','
      << r.committed_blocks << ',' << format_double(r.throughput_tx_s) << ','
      << format_double(r.latency_mean_ms) << ',' << format_double(r.latency_p50_ms) << ','
      << format_double(r.latency_p95_ms) << ',' << r.view_changes << ',' << r.missing_fetches
      << ',' << r.sent << ',' << r.delivered << ',' << r.dropped_loss << ',' << r.suppressed
      << ',' << (r.safety_ok ? 1 : 0) << ',' << (r.inclusion_ok ? 1 : 0) << ','
      << (r.stability_ok ? 1 : 0) << ',' << r.digest_algo << '\n';
}

void write_timeseries_csv(std::ostream& out, const MetricsReport& r) {
  out << "t_s,committed_txs\n";
  for (std::size_t i = 0; i < r.per_second_commits.size(); ++i) {
    out << i << ',' << r.per_second_commits[i] << '\n';
  }
}

void write_bandwidth_csv(std::ostream& out, const MetricsReport& r) {
  out << "replica,proposals_bytes,microblocks_bytes,votes_bytes,acks_bytes,total_bytes,"
         "avg_mbps\n";
  for (std::size_t i = 0; i < r.egress_bytes.size(); ++i) {
    const auto& e = r.egress_bytes[i];
    const std::uint64_t total = e[0] + e[1] + e[2] + e[3];
    out << i << ',' << e[0] << ',' << e[1] << ',' << e[2] << ',' << e[3] << ',' << total << ','
        << format_double(static_cast<double>(total) * 8.0 / 1e6 / r.horizon_s) << '\n';
  }
}

}  // namespace stratus
