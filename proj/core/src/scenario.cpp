#include "stratus/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace stratus {

using nlohmann::json;

MempoolMode mempool_mode_from(const std::string& name) {
  if (name == "native") return MempoolMode::Native;
  if (name == "besteffort") return MempoolMode::BestEffortSMP;
  if (name == "stratus") return MempoolMode::Stratus;
  if (name == "stratus-nodlb") return MempoolMode::StratusNoDLB;
  throw ConfigError("mode", "unknown mode '" + name + "'");
}

void Scenario::validate() const {
  params.validate();
  link.validate();
  workload.validate();
  if (horizon <= 0) throw ConfigError("horizon_s", "requires > 0");
  if (workload.duration > horizon)
    throw ConfigError("workload.duration_s", "must not exceed horizon_s");
  if (token_fraction <= 0 || token_fraction > 1)
    throw ConfigError("token_fraction", "requires (0,1]");
  if (adversary.count < 0 || adversary.count > params.f)
    throw ConfigError("adversary.count", "requires 0 <= count <= f");
  if (fluctuation.enabled && fluctuation.duration <= 0)
    throw ConfigError("fluctuation.duration_s", "requires > 0");
  if (fluctuation.enabled && (fluctuation.lo < 0 || fluctuation.hi < fluctuation.lo))
    throw ConfigError("fluctuation.delay_ms", "requires 0 <= min <= max");
}

namespace {

Duration ms_field(const json& j, const char* key, Duration fallback) {
  if (!j.contains(key)) return fallback;
  return static_cast<Duration>(j.at(key).get<double>() * kMillisecond);
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError(where + key, "unknown field");
  }
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<json>", e.what());
  }

  reject_unknown(j, {"name", "mode", "n_replicas", "f", "q", "d", "alpha_fetch",
                     "delta_fetch_ms", "tau_sample_ms", "tau_forward_ms", "batch_size_bytes",
                     "batch_timeout_ms", "block_size", "window_size", "percentile",
                     "view_timeout_ms", "banlist_reset_ms", "min_forward_batch_bytes",
                     "st_baseline_ms", "st_epsilon_ms", "st_beta_ms", "st_warmup_samples",
                     "share_bytes", "link", "token_fraction", "token_burst_bytes", "adversary",
                     "fluctuation", "workload", "horizon_s", "seed", "event_budget"},
                 "");

  Scenario s;
  s.name = j.value("name", std::string("scenario"));
  s.mode = mempool_mode_from(j.value("mode", std::string("stratus")));

  ProtocolParams& p = s.params;
  p.n_replicas = j.value("n_replicas", p.n_replicas);
  p.f = j.contains("f") ? j.at("f").get<std::int32_t>() : (p.n_replicas - 1) / 3;
  p.q = j.contains("q") ? j.at("q").get<std::int32_t>() : p.f + 1;
  p.d = j.value("d", p.d);
  p.alpha_fetch = j.value("alpha_fetch", p.alpha_fetch);
  p.batch_size_bytes = j.value("batch_size_bytes", p.batch_size_bytes);
  p.batch_timeout = ms_field(j, "batch_timeout_ms", p.batch_timeout);
  p.block_size = j.value("block_size", p.block_size);
  p.window_size = j.value("window_size", p.window_size);
  p.percentile = j.value("percentile", p.percentile);
  p.view_timeout = ms_field(j, "view_timeout_ms", p.view_timeout);
  p.min_forward_batch_bytes = j.value("min_forward_batch_bytes", p.min_forward_batch_bytes);
  p.st_baseline = ms_field(j, "st_baseline_ms", p.st_baseline);
  p.st_epsilon = ms_field(j, "st_epsilon_ms", p.st_epsilon);
  p.st_beta = ms_field(j, "st_beta_ms", p.st_beta);
  p.st_warmup_samples = j.value("st_warmup_samples", p.st_warmup_samples);
  p.share_bytes = j.value("share_bytes", p.share_bytes);

  if (j.contains("link")) {
    const json& l = j.at("link");
    reject_unknown(l, {"base_delay_ms", "jitter_ms", "bandwidth_mbps", "loss"}, "link.");
    s.link.base_delay = ms_field(l, "base_delay_ms", s.link.base_delay);
    s.link.jitter = ms_field(l, "jitter_ms", s.link.jitter);
    if (l.contains("bandwidth_mbps")) s.link.bandwidth_bits_per_s = l.at("bandwidth_mbps").get<double>() * 1e6;
    s.link.loss = l.value("loss", s.link.loss);
  }

  // Timer defaults derive from the link: one fetch round is about a round
  // trip plus slack, a load sample is a round trip, and the forward timeout
  // covers one push round trip plus a fetch round.
  p.delta_fetch = ms_field(j, "delta_fetch_ms", 4 * s.link.base_delay);
  p.tau_sample = ms_field(j, "tau_sample_ms", 2 * s.link.base_delay + s.link.jitter);
  p.tau_forward = ms_field(j, "tau_forward_ms", 2 * s.link.base_delay + p.delta_fetch);
  p.banlist_reset_period = ms_field(j, "banlist_reset_ms", 10 * p.tau_forward);

  s.token_fraction = j.value("token_fraction", s.token_fraction);
  s.token_burst_bytes = j.value("token_burst_bytes", s.token_burst_bytes);

  if (j.contains("adversary")) {
    const json& a = j.at("adversary");
    reject_unknown(a, {"behavior", "count", "push_count"}, "adversary.");
    s.adversary.behavior = a.value("behavior", s.adversary.behavior);
    s.adversary.count = a.value("count", s.adversary.count);
    s.adversary.push_count = a.value("push_count", s.adversary.push_count);
  }

  if (j.contains("fluctuation")) {
    const json& fl = j.at("fluctuation");
    reject_unknown(fl, {"start_s", "duration_s", "min_delay_ms", "max_delay_ms"}, "fluctuation.");
    s.fluctuation.enabled = true;
    s.fluctuation.start = static_cast<SimTime>(fl.value("start_s", 0.0) * kSecond);
    s.fluctuation.duration = static_cast<Duration>(fl.value("duration_s", 0.0) * kSecond);
    s.fluctuation.lo = ms_field(fl, "min_delay_ms", 0);
    s.fluctuation.hi = ms_field(fl, "max_delay_ms", 0);
  }

  if (j.contains("workload")) {
    const json& w = j.at("workload");
    reject_unknown(w, {"rate_tx_per_s", "payload_bytes", "assignment", "zipf_s", "zipf_v",
                       "duration_s", "poisson"},
                   "workload.");
    s.workload.rate_tx_per_s = w.value("rate_tx_per_s", s.workload.rate_tx_per_s);
    s.workload.payload_bytes = w.value("payload_bytes", s.workload.payload_bytes);
    const std::string assign = w.value("assignment", std::string("uniform"));
    if (assign == "uniform") {
      s.workload.assignment = WorkloadSpec::Assignment::Uniform;
    } else if (assign == "zipf") {
      s.workload.assignment = WorkloadSpec::Assignment::Zipf;
    } else {
      throw ConfigError("workload.assignment", "must be 'uniform' or 'zipf'");
    }
    s.workload.zipf_s = w.value("zipf_s", s.workload.zipf_s);
    s.workload.zipf_v = w.value("zipf_v", s.workload.zipf_v);
    s.workload.duration = static_cast<Duration>(w.value("duration_s", 10.0) * kSecond);
    s.workload.poisson = w.value("poisson", false);
  }

  s.horizon = static_cast<Duration>(j.value("horizon_s", 10.0) * kSecond);
  s.seed = j.value("seed", s.seed);
  s.event_budget = j.value("event_budget", s.event_budget);

  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace stratus
