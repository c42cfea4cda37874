#include "cfmec/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace cfmec {

namespace {

bool is_perfect_square(int n) {
  if (n < 1) return false;
  const int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  return r * r == n;
}

}  // namespace

double SystemConfig::asd_azimuth() const {
  return asd_azimuth_deg * M_PI / 180.0;
}

double SystemConfig::asd_elevation() const {
  return asd_elevation_deg * M_PI / 180.0;
}

void SystemConfig::validate() const {
  if (!is_perfect_square(n_aps))
    throw ConfigError("n_aps must be a perfect square for the grid layout");
  if (area_side <= 0) throw ConfigError("area_side must be positive");
  if (antennas_per_ap < 1 || n_users < 1)
    throw ConfigError("antennas_per_ap and n_users must be >= 1");
  if (bandwidth <= 0 || carrier_freq <= 0 || noise_power <= 0)
    throw ConfigError("bandwidth, carrier_freq, noise_power must be positive");
  if (p_max <= 0) throw ConfigError("p_max must be positive");
  if (tau_p < 1 || tau_p >= tau_c)
    throw ConfigError("need 1 <= tau_p < tau_c (tau_d = 0)");
  if (fronthaul_capacity <= 0 || f_cpu <= 0 || f_ap_min <= 0 ||
      f_ap_max < f_ap_min)
    throw ConfigError("compute and fronthaul capacities must be positive");
  if (latency_budget <= 0 || latency_budget_cell <= 0)
    throw ConfigError("latency budgets must be positive");
  if (task_bits_min <= 0 || task_bits_max < task_bits_min)
    throw ConfigError("invalid task bits range");
  if (cycles_per_bit <= 0) throw ConfigError("cycles_per_bit must be positive");
  if (omega_p < 0 || omega_p > 1 || omega_se < 0 || omega_se > 1)
    throw ConfigError("omega_p, omega_se must lie in [0,1]");
  if (omega_p == 0 && omega_se == 0)
    throw ConfigError("omega_p and omega_se cannot both be zero");
  if (ap_selection.kind == ApSelectionKind::Fcc && ap_selection.fcc_g < 1)
    throw ConfigError("FCC G must be >= 1");
  if (ap_selection.kind == ApSelectionKind::Lsfbs &&
      (ap_selection.lsfbs_threshold <= 0 || ap_selection.lsfbs_threshold > 1))
    throw ConfigError("LSFBS threshold must lie in (0,1]");
  if (mode == NetworkMode::Cellular) {
    if (cellular_n_bs < 1 || !is_perfect_square(cellular_n_bs))
      throw ConfigError("cellular_n_bs must be a perfect square >= 1");
    if ((n_aps * antennas_per_ap) % cellular_n_bs != 0)
      throw ConfigError("total antennas not divisible by cellular_n_bs");
  }
  if (n_snapshots < 1 || n_realizations < 1 || n_workers < 1)
    throw ConfigError("n_snapshots, n_realizations, n_workers must be >= 1");
}

void SystemConfig::apply_preset(const std::string& name) {
  if (name == "desk") {
    n_aps = 25;
    antennas_per_ap = 4;
    n_users = 8;
    n_snapshots = 50;
    n_realizations = 20;
    task_bits_min = 1e6;
    task_bits_max = 4e6;
  } else if (name == "loose") {
    task_bits_min = 1e6;
    task_bits_max = 4e6;
  } else if (name == "strict") {
    task_bits_min = 5e6;
    task_bits_max = 10e6;
  } else if (name == "paper") {
    n_aps = 100;
    antennas_per_ap = 4;
    n_users = 20;
    n_snapshots = 200;
    n_realizations = 200;
  } else {
    throw ConfigError("unknown preset: " + name);
  }
  preset = name;
}

NetworkMode parse_mode(const std::string& s) {
  if (s == "cellfree") return NetworkMode::CellFree;
  if (s == "cellular") return NetworkMode::Cellular;
  if (s == "cran") return NetworkMode::Cran;
  throw ConfigError("unknown mode: " + s);
}

std::string mode_name(NetworkMode m) {
  switch (m) {
    case NetworkMode::CellFree: return "cellfree";
    case NetworkMode::Cellular: return "cellular";
    case NetworkMode::Cran: return "cran";
  }
  return "?";
}

ApSelection parse_ap_selection(const std::string& s) {
  ApSelection sel;
  if (s == "dcc") {
    sel.kind = ApSelectionKind::Dcc;
  } else if (s.rfind("fcc:", 0) == 0) {
    sel.kind = ApSelectionKind::Fcc;
    sel.fcc_g = std::stoi(s.substr(4));
  } else if (s.rfind("lsfbs:", 0) == 0) {
    sel.kind = ApSelectionKind::Lsfbs;
    sel.lsfbs_threshold = std::stod(s.substr(6));
  } else if (s == "fcc") {
    sel.kind = ApSelectionKind::Fcc;
  } else if (s == "lsfbs") {
    sel.kind = ApSelectionKind::Lsfbs;
  } else {
    throw ConfigError("unknown ap_selection: " + s);
  }
  return sel;
}

std::string ap_selection_name(const ApSelection& s) {
  switch (s.kind) {
    case ApSelectionKind::Dcc: return "dcc";
    case ApSelectionKind::Fcc: return "fcc:" + std::to_string(s.fcc_g);
    case ApSelectionKind::Lsfbs: {
      std::ostringstream os;
      os << "lsfbs:" << s.lsfbs_threshold;
      return os.str();
    }
  }
  return "?";
}

namespace {

std::string feas_name(FeasibilityMode f) {
  switch (f) {
    case FeasibilityMode::Rough: return "rough";
    case FeasibilityMode::Accurate: return "accurate";
    case FeasibilityMode::RoughThenAccurate: return "rough-then-accurate";
  }
  return "?";
}

FeasibilityMode parse_feas(const std::string& s) {
  if (s == "rough") return FeasibilityMode::Rough;
  if (s == "accurate") return FeasibilityMode::Accurate;
  if (s == "rough-then-accurate") return FeasibilityMode::RoughThenAccurate;
  throw ConfigError("unknown feasibility mode: " + s);
}

}  // namespace

std::string config_to_json(const SystemConfig& c) {
  nlohmann::ordered_json j;
  j["area_side"] = c.area_side;
  j["n_aps"] = c.n_aps;
  j["antennas_per_ap"] = c.antennas_per_ap;
  j["n_users"] = c.n_users;
  j["ap_height"] = c.ap_height;
  j["user_height"] = c.user_height;
  j["min_dist_2d"] = c.min_dist_2d;
  j["bandwidth"] = c.bandwidth;
  j["carrier_freq"] = c.carrier_freq;
  j["noise_power"] = c.noise_power;
  j["p_max"] = c.p_max;
  j["tau_c"] = c.tau_c;
  j["tau_p"] = c.tau_p;
  j["shadow_std_db"] = c.shadow_std_db;
  j["asd_azimuth_deg"] = c.asd_azimuth_deg;
  j["asd_elevation_deg"] = c.asd_elevation_deg;
  j["antenna_spacing"] = c.antenna_spacing;
  j["fronthaul_capacity"] = c.fronthaul_capacity;
  j["quant_bits"] = c.quant_bits;
  j["f_cpu"] = c.f_cpu;
  j["f_ap_min"] = c.f_ap_min;
  j["f_ap_max"] = c.f_ap_max;
  j["latency_budget"] = c.latency_budget;
  j["latency_budget_cell"] = c.latency_budget_cell;
  j["task_bits_min"] = c.task_bits_min;
  j["task_bits_max"] = c.task_bits_max;
  j["cycles_per_bit"] = c.cycles_per_bit;
  j["omega_p"] = c.omega_p;
  j["omega_se"] = c.omega_se;
  j["cellular_n_bs"] = c.cellular_n_bs;
  j["mode"] = mode_name(c.mode);
  j["ap_selection"] = ap_selection_name(c.ap_selection);
  j["feasibility"] = feas_name(c.feasibility);
  j["rng_seed"] = c.rng_seed;
  j["n_snapshots"] = c.n_snapshots;
  j["n_realizations"] = c.n_realizations;
  j["n_workers"] = c.n_workers;
  j["preset"] = c.preset;
  j["sca_power_tol"] = c.sca_power_tol;
  j["sca_max_iter"] = c.sca_max_iter;
  j["kkt_tol"] = c.kkt_tol;
  j["bisect_eps"] = c.bisect_eps;
  j["bisect_gap"] = c.bisect_gap;
  j["pc_tol"] = c.pc_tol;
  j["pc_max_iter"] = c.pc_max_iter;
  j["f_min"] = c.f_min;
  return j.dump(2);
}

SystemConfig config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  static const std::set<std::string> known = {
      "area_side", "n_aps", "antennas_per_ap", "n_users", "ap_height",
      "user_height", "min_dist_2d", "bandwidth", "carrier_freq",
      "noise_power", "p_max", "tau_c", "tau_p", "shadow_std_db",
      "asd_azimuth_deg", "asd_elevation_deg", "antenna_spacing",
      "fronthaul_capacity", "quant_bits", "f_cpu", "f_ap_min", "f_ap_max",
      "latency_budget", "latency_budget_cell", "task_bits_min",
      "task_bits_max", "cycles_per_bit", "omega_p", "omega_se",
      "cellular_n_bs", "mode", "ap_selection", "feasibility", "rng_seed",
      "n_snapshots", "n_realizations", "n_workers", "preset",
      "sca_power_tol", "sca_max_iter", "kkt_tol", "bisect_eps",
      "bisect_gap", "pc_tol", "pc_max_iter", "f_min"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key()))
      throw ConfigError("unknown config key: " + it.key());
  }

  SystemConfig c;
  if (j.contains("preset")) c.apply_preset(j["preset"].get<std::string>());

  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j[key].get<std::decay_t<decltype(field)>>();
  };
  get("area_side", c.area_side);
  get("n_aps", c.n_aps);
  get("antennas_per_ap", c.antennas_per_ap);
  get("n_users", c.n_users);
  get("ap_height", c.ap_height);
  get("user_height", c.user_height);
  get("min_dist_2d", c.min_dist_2d);
  get("bandwidth", c.bandwidth);
  get("carrier_freq", c.carrier_freq);
  get("noise_power", c.noise_power);
  get("p_max", c.p_max);
  get("tau_c", c.tau_c);
  get("tau_p", c.tau_p);
  get("shadow_std_db", c.shadow_std_db);
  get("asd_azimuth_deg", c.asd_azimuth_deg);
  get("asd_elevation_deg", c.asd_elevation_deg);
  get("antenna_spacing", c.antenna_spacing);
  get("fronthaul_capacity", c.fronthaul_capacity);
  get("quant_bits", c.quant_bits);
  get("f_cpu", c.f_cpu);
  get("f_ap_min", c.f_ap_min);
  get("f_ap_max", c.f_ap_max);
  get("latency_budget", c.latency_budget);
  get("latency_budget_cell", c.latency_budget_cell);
  get("task_bits_min", c.task_bits_min);
  get("task_bits_max", c.task_bits_max);
  get("cycles_per_bit", c.cycles_per_bit);
  get("omega_p", c.omega_p);
  get("omega_se", c.omega_se);
  get("cellular_n_bs", c.cellular_n_bs);
  get("rng_seed", c.rng_seed);
  get("n_snapshots", c.n_snapshots);
  get("n_realizations", c.n_realizations);
  get("n_workers", c.n_workers);
  get("sca_power_tol", c.sca_power_tol);
  get("sca_max_iter", c.sca_max_iter);
  get("kkt_tol", c.kkt_tol);
  get("bisect_eps", c.bisect_eps);
  get("bisect_gap", c.bisect_gap);
  get("pc_tol", c.pc_tol);
  get("pc_max_iter", c.pc_max_iter);
  get("f_min", c.f_min);
  if (j.contains("mode")) c.mode = parse_mode(j["mode"].get<std::string>());
  if (j.contains("ap_selection"))
    c.ap_selection = parse_ap_selection(j["ap_selection"].get<std::string>());
  if (j.contains("feasibility"))
    c.feasibility = parse_feas(j["feasibility"].get<std::string>());
  c.validate();
  return c;
}

SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

}  // namespace cfmec
