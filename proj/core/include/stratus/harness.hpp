#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "stratus/replica.hpp"
#include "stratus/scenario.hpp"
#include "stratus/signature.hpp"
#include "stratus/simnet.hpp"

namespace stratus {

struct SafetyViolation : std::runtime_error {
  explicit SafetyViolation(const std::string& what) : std::runtime_error(what) {}
};

struct MetricsReport {
  std::string scenario;
  std::string mode;
  std::uint64_t seed = 0;
  std::int32_t n = 0, f = 0, q = 0, d = 0;
  double horizon_s = 0;

  std::uint64_t committed_txs = 0;     // at the reference correct replica
  std::uint64_t committed_blocks = 0;
  double throughput_tx_s = 0;
  double latency_mean_ms = 0;
  double latency_p50_ms = 0;
  double latency_p95_ms = 0;
  std::uint64_t view_changes = 0;      // pacemaker firings at correct replicas
  std::uint64_t missing_fetches = 0;   // fetch episodes at correct replicas
  std::vector<std::uint64_t> per_second_commits;  // txs executed per 1s bucket

  std::vector<std::array<std::uint64_t, 4>> egress_bytes;  // per replica x category
  std::uint64_t sent = 0, delivered = 0, dropped_loss = 0, suppressed = 0;

  bool safety_ok = true;
  bool inclusion_ok = true;  // every correct-origin tx committed
  bool stability_ok = true;  // every committed id delivered at every correct replica
  std::string digest_algo = kDigestAlgo;
};

// Builds the whole system for one scenario, runs it to the horizon, checks
// the cross-replica invariants, and collects the metrics.
class ScenarioRun {
 public:
  explicit ScenarioRun(const Scenario& scenario);
  ~ScenarioRun();

  MetricsReport run();  // throws SafetyViolation on a prefix-consistency break

  // Drive manually (used by property tests that inspect mid-run state).
  void start();
  void run_until(SimTime t);
  MetricsReport collect();

  SimNet& net() { return *net_; }
  Replica& replica(std::int32_t i) { return *replicas_[static_cast<std::size_t>(i)]; }
  std::int32_t n() const { return scenario_.params.n_replicas; }
  bool is_correct(std::int32_t i) const { return i < first_adversary_; }
  ReplicaId reference() const { return 0; }
  const Scenario& scenario() const { return scenario_; }

  // Canonical committed chain (prefix-checked across correct replicas).
  const std::vector<Digest>& canonical_chain() const { return canonical_; }

 private:
  void wire_observer();
  void schedule_workload();

  Scenario scenario_;
  std::unique_ptr<SignatureScheme> scheme_;
  std::unique_ptr<SimNet> net_;
  Observer observer_;
  std::vector<std::unique_ptr<Replica>> replicas_;
  std::int32_t first_adversary_ = 0;

  std::unique_ptr<WorkloadGenerator> generator_;
  std::vector<ReplicaId> tx_origin_;      // by tx index
  std::vector<bool> tx_committed_;        // by tx index, at the reference replica
  std::uint64_t submitted_ = 0;

  std::vector<double> latency_ms_;        // reference replica samples
  std::vector<std::uint64_t> buckets_;
  std::uint64_t ref_commit_blocks_ = 0;
  std::uint64_t view_changes_ = 0;
  std::uint64_t fetches_ = 0;

  std::vector<Digest> canonical_;
  std::vector<std::uint64_t> commit_heights_;
  std::vector<std::set<Digest>> delivered_;  // per replica content ids
  bool started_ = false;
};

MetricsReport run_scenario(const Scenario& scenario);

// One run per axis value applied onto the base scenario; failures are
// recorded per row and the sweep continues.
struct SweepRow {
  std::string value;
  bool ok = false;
  std::string error;
  MetricsReport report;
};
std::vector<SweepRow> sweep(const Scenario& base, const std::string& axis,
                            const std::vector<std::string>& values);
Scenario apply_axis(Scenario s, const std::string& axis, const std::string& value);

// CSV emission; stable column order, fixed number formatting.
void write_metrics_header(std::ostream& out, bool with_axis);
void write_metrics_row(std::ostream& out, const MetricsReport& r, const std::string& axis_value,
                       bool with_axis);
void write_timeseries_csv(std::ostream& out, const MetricsReport& r);
void write_bandwidth_csv(std::ostream& out, const MetricsReport& r);

std::string format_double(double v);

}  // namespace stratus
