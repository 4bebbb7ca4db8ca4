#pragma once

#include <cstdint>
#include <string>

#include "stratus/mempool.hpp"
#include "stratus/simnet.hpp"
#include "stratus/types.hpp"
#include "stratus/workload.hpp"

namespace stratus {

struct AdversarySpec {
  std::string behavior = "none";
  std::int32_t count = 0;   // adversaries occupy the highest replica indices
  std::int32_t push_count = -1;  // selective pushes; -1 means q-1
};

struct FluctuationSpec {
  bool enabled = false;
  SimTime start = 0;
  Duration duration = 0;
  Duration lo = 0;
  Duration hi = 0;
};

// A named, fully deterministic experiment configuration.
struct Scenario {
  std::string name = "scenario";
  MempoolMode mode = MempoolMode::Stratus;
  ProtocolParams params;
  LinkModel link;
  double token_fraction = 0.8;
  std::uint64_t token_burst_bytes = 1'000'000;
  AdversarySpec adversary;
  FluctuationSpec fluctuation;
  WorkloadSpec workload;
  Duration horizon = sec(10);
  std::uint64_t seed = 1;
  std::uint64_t event_budget = 500'000'000;

  void validate() const;
};

MempoolMode mempool_mode_from(const std::string& name);

// JSON scenario files; unknown keys are rejected so typos surface as
// diagnostics naming the field.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text);

}  // namespace stratus
