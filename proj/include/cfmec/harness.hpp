#pragma once

#include <map>
#include <string>
#include <vector>

#include "cfmec/association.hpp"
#include "cfmec/config.hpp"
#include "cfmec/jpca.hpp"
#include "cfmec/scenario.hpp"

namespace cfmec {

/// Fractional power initialization from aggregate serving gains.
RealVector init_fractional_powers(const NetworkSnapshot& snapshot,
                                  const ServingTopology& topology,
                                  const SystemConfig& cfg);

struct UserRecord {
  int snapshot = 0;
  int realization = 0;
  int user = 0;
  bool feasible = false;
  double p = 0.0;
  double f = 0.0;         // cycles/s allocated to the user
  double se = 0.0;
  double lat_tx = 0.0;
  double lat_comp = 0.0;
  double lat_fh = 0.0;
  double lat_total = 0.0;
  double energy_mbit = 0.0;
};

struct TraceRow {
  int snapshot = 0;
  int realization = 0;
  int iteration = 0;
  double objective = 0.0;
  double max_power_change = 0.0;
  double kkt_residual = 0.0;
};

struct FeasibilityRow {
  int snapshot = 0;
  int realization = 0;
  std::string stage;
  std::string verdict;
  double rho = 0.0;
  int iterations = 0;
};

struct ServerLoadRow {
  int snapshot = 0;
  int realization = 0;
  std::string server;  // "cpu" or "ap<l>"
  double load = 0.0;
  double capacity = 0.0;
};

struct CampaignResult {
  std::vector<UserRecord> records;
  std::vector<TraceRow> traces;
  std::vector<FeasibilityRow> feasibility;
  std::vector<ServerLoadRow> server_loads;
  int n_feasible = 0;
  int n_infeasible = 0;
  int n_runs = 0;
  std::vector<int> sca_iterations;  // per feasible run
};

CampaignResult run_campaign(const SystemConfig& cfg);

/// Empirical CDF support points for one metric.
std::vector<std::pair<double, double>> empirical_cdf(
    const std::vector<double>& values);

/// Writes records.csv, cdf_<metric>.csv, trace.csv, feasibility.csv and
/// meta.json under out_dir.
void write_outputs(const CampaignResult& result, const SystemConfig& cfg,
                   const std::string& out_dir);

struct ModeSummary {
  std::string mode;
  double median_total_power = 0.0;
  double median_user_power = 0.0;
  double median_latency = 0.0;
  double median_energy = 0.0;
  double median_se = 0.0;
  int n_feasible = 0;
  int n_runs = 0;
};

struct CompareResult {
  std::vector<ModeSummary> summaries;
  std::map<std::string, CampaignResult> campaigns;
};

/// Runs the same seeded snapshots under cell-free, cellular and C-RAN.
CompareResult compare_modes(const SystemConfig& base);

void write_compare(const CompareResult& result, const SystemConfig& cfg,
                   const std::string& out_dir);

/// Topology-aware snapshot build: cellular mode swaps in the BS grid.
struct SnapshotBundle {
  NetworkSnapshot snapshot;
  ServingTopology topology;
  RealVector f_servers;  // f_ap (cell-free/C-RAN) or f_bs (cellular)
};
SnapshotBundle make_bundle(const SystemConfig& cfg, int snapshot_index);

/// CSV dump of beta and the correlation matrices (interleaved re/im).
void dump_snapshot(const NetworkSnapshot& snapshot, const std::string& path);

}  // namespace cfmec
