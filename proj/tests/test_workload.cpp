#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "stratus/workload.hpp"

using namespace stratus;

TEST_CASE("uniform assignment is balanced over 100k draws") {
  WorkloadSpec spec;
  spec.assignment = WorkloadSpec::Assignment::Uniform;
  WorkloadGenerator gen(spec, 4, 42);
  std::vector<int> counts(4, 0);
  for (int i = 0; i < 100'000; ++i) ++counts[static_cast<std::size_t>(gen.assign_replica(0))];
  for (int c : counts) {
    CHECK(c > 100'000 / 4 * 0.99);
    CHECK(c < 100'000 / 4 * 1.01);
  }
}

TEST_CASE("zipf top-decile mass: heavy for v=1, strictly flatter for v=10") {
  ZipfSampler z1(1.01, 1.0, 100);
  ZipfSampler z10(1.01, 10.0, 100);
  // Oracle values from an exact mass computation of the normalized pmf.
  CHECK(z1.top_share(10) == doctest::Approx(0.8808152601777611).epsilon(1e-12));
  CHECK(z10.top_share(10) == doctest::Approx(0.5412014898212651).epsilon(1e-12));
  CHECK(z1.top_share(10) > 0.85);
  CHECK(z10.top_share(10) < z1.top_share(10));
}

TEST_CASE("zipf empirical frequencies pass chi-square against the pmf at 1e6 samples") {
  const int n = 100;
  ZipfSampler z(1.01, 1.0, n);
  Rng rng(4242);
  const int samples = 1'000'000;
  std::vector<int> counts(n, 0);
  for (int i = 0; i < samples; ++i) ++counts[static_cast<std::size_t>(z.sample(rng))];
  double chi2 = 0;
  for (int r = 0; r < n; ++r) {
    const double expected = z.pmf(r) * samples;
    const double d = counts[static_cast<std::size_t>(r)] - expected;
    chi2 += d * d / expected;
  }
  // dof = 99, critical value at p = 0.01 is 134.6416
  CHECK(chi2 < 134.6416);
}

TEST_CASE("fixed spacing schedules rate*duration txs at exact gaps") {
  WorkloadSpec spec;
  spec.rate_tx_per_s = 1000;
  spec.duration = sec(10);
  WorkloadGenerator gen(spec, 4, 7);
  WorkloadGenerator::Arrival a;
  std::size_t count = 0;
  SimTime last = -1;
  while (gen.next(a)) {
    if (count > 0) CHECK(a.at - last == msec(1));
    last = a.at;
    ++count;
  }
  CHECK(count == 10'000);
}

TEST_CASE("same seed gives identical schedules, ids unique") {
  WorkloadSpec spec;
  spec.rate_tx_per_s = 500;
  spec.duration = sec(2);
  spec.assignment = WorkloadSpec::Assignment::Zipf;
  spec.poisson = true;

  auto draw = [&spec] {
    WorkloadGenerator gen(spec, 8, 123);
    std::vector<std::pair<SimTime, ReplicaId>> out;
    WorkloadGenerator::Arrival a;
    std::set<std::string> ids;
    while (gen.next(a)) {
      out.emplace_back(a.at, a.tx.origin);
      CHECK(ids.insert(a.tx.id).second);  // globally unique
    }
    return out;
  };
  CHECK(draw() == draw());
}

TEST_CASE("poisson arrivals hit the configured rate within 5%") {
  WorkloadSpec spec;
  spec.rate_tx_per_s = 2000;
  spec.duration = sec(30);
  spec.poisson = true;
  WorkloadGenerator gen(spec, 4, 99);
  WorkloadGenerator::Arrival a;
  std::size_t count = 0;
  while (gen.next(a)) ++count;
  CHECK(std::abs(static_cast<double>(count) - 60000.0) / 60000.0 < 0.05);
}
