// Command-line front end: run one scenario, sweep an axis, or emit the
// analytic throughput-model curves. All outputs are CSV files with stable
// columns; identical (config, seed) pairs produce byte-identical files.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "stratus/analytics.hpp"
#include "stratus/harness.hpp"
#include "stratus/scenario.hpp"

#include <json.hpp>

namespace fs = std::filesystem;
using namespace stratus;

namespace {

std::ofstream open_out(const fs::path& dir, const std::string& file) {
  fs::create_directories(dir);
  std::ofstream out(dir / file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / file).string());
  return out;
}

void print_summary(const MetricsReport& r) {
  std::cout << "scenario " << r.scenario << " mode=" << r.mode << " seed=" << r.seed
            << " n=" << r.n << "\n"
            << "  committed " << r.committed_txs << " txs in " << r.committed_blocks
            << " blocks (" << format_double(r.throughput_tx_s) << " tx/s)\n"
            << "  latency ms mean/p50/p95: " << format_double(r.latency_mean_ms) << " / "
            << format_double(r.latency_p50_ms) << " / " << format_double(r.latency_p95_ms) << "\n"
            << "  view_changes=" << r.view_changes << " missing_fetches=" << r.missing_fetches
            << " safety=" << (r.safety_ok ? "ok" : "VIOLATED") << "\n";
}

std::vector<std::string> split_values(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_run(const std::string& config, std::uint64_t seed_override, bool has_seed,
            const std::string& out_dir, const std::string& trace_path) {
  Scenario s = load_scenario(config);
  if (has_seed) s.seed = seed_override;

  ScenarioRun run(s);
  std::ofstream trace;
  if (!trace_path.empty()) {
    trace.open(trace_path, std::ios::binary);
    run.net().set_trace(&trace);
  }
  MetricsReport r = run.run();
  print_summary(r);

  auto metrics = open_out(out_dir, s.name + "-metrics.csv");
  write_metrics_header(metrics, false);
  write_metrics_row(metrics, r, "", false);
  auto ts = open_out(out_dir, s.name + "-timeseries.csv");
  write_timeseries_csv(ts, r);
  auto bw = open_out(out_dir, s.name + "-bandwidth.csv");
  write_bandwidth_csv(bw, r);
  return r.safety_ok ? 0 : 2;
}

int cmd_sweep(const std::string& config, const std::string& axis, const std::string& values,
              std::uint64_t seed_override, bool has_seed, const std::string& out_dir) {
  Scenario base = load_scenario(config);
  if (has_seed) base.seed = seed_override;
  const auto rows = sweep(base, axis, split_values(values));

  auto out = open_out(out_dir, base.name + "-sweep-" + axis + ".csv");
  write_metrics_header(out, true);
  bool all_ok = true;
  for (const auto& row : rows) {
    if (row.ok) {
      write_metrics_row(out, row.report, row.value, true);
      print_summary(row.report);
    } else {
      all_ok = false;
      out << row.value << ",ERROR," << row.error << "\n";
      std::cerr << "axis " << axis << "=" << row.value << " failed: " << row.error << "\n";
    }
  }
  return all_ok ? 0 : 2;
}

struct AnalyticParams {
  double capacity_bits = 100e6;
  double tx_bits = 1024;        // 128-byte transactions
  double proposal_bits = 8e6;   // 1 MB proposals
  double vote_bits = 800;       // ~100-byte votes
  double id_bits = 256;         // 32-byte ids
  std::vector<std::int32_t> n_values = {4, 8, 16, 32, 64, 128, 256};
};

int cmd_analytic(const AnalyticParams& p, const std::string& out_dir,
                 const std::string& name) {
  auto out = open_out(out_dir, name + ".csv");
  out << "n,tmax_lbft,tmax_pbft_batched,tmax_smp_opt,optimal_eta_bits\n";
  for (std::int32_t n : p.n_values) {
    const double eta = analytics::optimal_eta(p.id_bits, n);
    out << n << ',' << format_double(analytics::tmax_lbft(p.capacity_bits, p.tx_bits, n)) << ','
        << format_double(analytics::tmax_pbft_batched(p.capacity_bits, p.tx_bits,
                                                      p.proposal_bits, p.vote_bits, n))
        << ','
        << format_double(analytics::tmax_smp(p.capacity_bits, p.tx_bits, p.proposal_bits, eta,
                                             p.id_bits, n))
        << ',' << format_double(eta) << '\n';
  }
  std::cout << "wrote " << (fs::path(out_dir) / (name + ".csv")).string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stratus shared-mempool simulation harness"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir = "out";
  std::string trace_path;
  std::uint64_t seed = 0;

  auto* run_cmd = app.add_subcommand("run", "run one scenario config");
  run_cmd->add_option("config", config, "scenario JSON file")->required();
  auto* run_seed = run_cmd->add_option("--seed", seed, "override the scenario seed");
  run_cmd->add_option("--out", out_dir, "output directory");
  run_cmd->add_option("--trace", trace_path, "write a message trace (t,kind,from,to,size,tag)");

  std::string axis;
  std::string values;
  auto* sweep_cmd = app.add_subcommand("sweep", "run a scenario once per axis value");
  sweep_cmd->add_option("config", config, "scenario JSON file")->required();
  sweep_cmd->add_option("--axis", axis, "n|batch_size|rate|zipf|byz|d|q|mode|seed")->required();
  sweep_cmd->add_option("--values", values, "comma-separated axis values")->required();
  auto* sweep_seed = sweep_cmd->add_option("--seed", seed, "override the scenario seed");
  sweep_cmd->add_option("--out", out_dir, "output directory");

  AnalyticParams ap;
  std::string analytic_config;
  std::string analytic_name = "analytic-sweep";
  auto* an_cmd = app.add_subcommand("analytic", "emit the closed-form model curves as CSV");
  an_cmd->add_option("--config", analytic_config, "JSON with the fields of the flags below");
  an_cmd->add_option("--capacity-bits", ap.capacity_bits, "per-replica capacity C (bits/s)");
  an_cmd->add_option("--tx-bits", ap.tx_bits, "transaction size B (bits)");
  an_cmd->add_option("--proposal-bits", ap.proposal_bits, "proposal size K (bits)");
  an_cmd->add_option("--vote-bits", ap.vote_bits, "vote size sigma (bits)");
  an_cmd->add_option("--id-bits", ap.id_bits, "microblock id size gamma (bits)");
  std::string n_values;
  an_cmd->add_option("--n-values", n_values, "comma-separated replica counts");
  an_cmd->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      return cmd_run(config, seed, run_seed->count() > 0, out_dir, trace_path);
    }
    if (sweep_cmd->parsed()) {
      return cmd_sweep(config, axis, values, seed, sweep_seed->count() > 0, out_dir);
    }
    if (an_cmd->parsed()) {
      if (!analytic_config.empty()) {
        std::ifstream in(analytic_config);
        if (!in) throw std::runtime_error("cannot open " + analytic_config);
        nlohmann::json j = nlohmann::json::parse(in);
        ap.capacity_bits = j.value("capacity_bits", ap.capacity_bits);
        ap.tx_bits = j.value("tx_bits", ap.tx_bits);
        ap.proposal_bits = j.value("proposal_bits", ap.proposal_bits);
        ap.vote_bits = j.value("vote_bits", ap.vote_bits);
        ap.id_bits = j.value("id_bits", ap.id_bits);
        if (j.contains("n_values")) ap.n_values = j.at("n_values").get<std::vector<std::int32_t>>();
        if (j.contains("name")) analytic_name = j.at("name").get<std::string>();
      }
      if (!n_values.empty()) {
        ap.n_values.clear();
        for (const auto& v : split_values(n_values)) ap.n_values.push_back(std::stoi(v));
      }
      return cmd_analytic(ap, out_dir, analytic_name);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const SafetyViolation& e) {
    std::cerr << "SAFETY VIOLATION: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
