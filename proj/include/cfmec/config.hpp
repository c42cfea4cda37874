#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cfmec {

enum class NetworkMode { CellFree, Cellular, Cran };

enum class ApSelectionKind { Dcc, Fcc, Lsfbs };

struct ApSelection {
  ApSelectionKind kind = ApSelectionKind::Dcc;
  int fcc_g = 5;                  // number of APs kept per user under FCC
  double lsfbs_threshold = 0.95;  // channel-gain fraction kept under LSFBS
};

enum class FeasibilityMode { Rough, Accurate, RoughThenAccurate };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// All scenario constants: geometry, radio, compute, latency, solver knobs.
/// Loadable from a flat JSON file (unknown keys rejected).
struct SystemConfig {
  // Geometry
  double area_side = 1000.0;  // m
  int n_aps = 25;             // L, must be a perfect square
  int antennas_per_ap = 4;    // M
  int n_users = 8;            // K
  double ap_height = 10.0;    // m
  double user_height = 1.5;   // m
  double min_dist_2d = 10.0;  // m, floor before pathloss

  // Radio
  double bandwidth = 20e6;        // Hz
  double carrier_freq = 2e9;      // Hz
  double noise_power = 3.9810717055349565e-13;  // W (-94 dBm)
  double p_max = 0.1;             // W
  int tau_c = 200;                // samples per coherence block
  int tau_p = 5;                  // training samples (tau_u = tau_c - tau_p)
  double shadow_std_db = 4.0;     // lognormal shadowing std
  double asd_azimuth_deg = 15.0;  // sigma_phi
  double asd_elevation_deg = 15.0;  // sigma_theta
  double antenna_spacing = 0.5;   // horizontal ULA spacing in wavelengths

  // Fronthaul and compute
  double fronthaul_capacity = 1e10;  // bit/s
  int quant_bits = 16;               // xi
  double f_cpu = 1e10;               // cycles/s at the central server
  double f_ap_min = 2e9;             // per-AP compute, uniform integer range
  double f_ap_max = 4e9;

  // Offloading demands
  double latency_budget = 0.2;        // s (cell-free / C-RAN)
  double latency_budget_cell = 0.3;   // s (cellular)
  double task_bits_min = 1e6;         // bit
  double task_bits_max = 4e6;
  double cycles_per_bit = 50.0;       // alpha

  // Objective weights
  double omega_p = 1.0;
  double omega_se = 1.0;

  // Mode. n_aps / antennas_per_ap always describe the cell-free layout;
  // cellular mode derives its BS grid from them keeping L*M fixed.
  int cellular_n_bs = 4;
  NetworkMode mode = NetworkMode::CellFree;
  ApSelection ap_selection;
  FeasibilityMode feasibility = FeasibilityMode::Rough;

  // Monte Carlo
  std::uint64_t rng_seed = 1;
  int n_snapshots = 50;
  int n_realizations = 20;
  int n_workers = 1;
  std::string preset = "desk";

  // Solver tolerances
  double sca_power_tol = 0.005;
  int sca_max_iter = 50;
  double kkt_tol = 1e-7;
  double bisect_eps = 0.005;   // epsilon in the upper-bound init
  double bisect_gap = 1e-5;    // terminal interval width
  double pc_tol = 0.005;       // power-control relative change threshold
  int pc_max_iter = 500;
  double f_min = 1.0;          // cycles/s lower bound keeping the set closed

  int tau_u() const { return tau_c - tau_p; }
  double prelog() const { return static_cast<double>(tau_u()) / tau_c; }
  double asd_azimuth() const;    // radians
  double asd_elevation() const;  // radians

  /// Throws ConfigError on violated invariants.
  void validate() const;

  /// Applies the "loose", "strict" or "desk" preset on top of defaults.
  void apply_preset(const std::string& name);
};

SystemConfig load_config(const std::string& path);
std::string config_to_json(const SystemConfig& cfg);
SystemConfig config_from_json(const std::string& json_text);

NetworkMode parse_mode(const std::string& s);
std::string mode_name(NetworkMode m);
ApSelection parse_ap_selection(const std::string& s);
std::string ap_selection_name(const ApSelection& s);

}  // namespace cfmec
