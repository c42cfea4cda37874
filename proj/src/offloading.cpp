#include "cfmec/offloading.hpp"

#include <cmath>
#include <limits>

namespace cfmec {

OffloadingDemand generate_demands(const SystemConfig& cfg, Rng& rng) {
  const int K = cfg.n_users;
  OffloadingDemand d;
  d.bits.resize(K);
  d.cycles.resize(K);
  d.budget.resize(K);
  d.eff_budget.resize(K);
  const auto lo = static_cast<std::int64_t>(cfg.task_bits_min);
  const auto hi = static_cast<std::int64_t>(cfg.task_bits_max);
  const bool cellular = cfg.mode == NetworkMode::Cellular;
  const double fh_rate = 2.0 * cfg.antennas_per_ap * cfg.quant_bits /
                         cfg.fronthaul_capacity;  // s per task bit
  for (int k = 0; k < K; ++k) {
    d.bits(k) = static_cast<double>(rng.uniform_int(lo, hi));
    d.cycles(k) = cfg.cycles_per_bit * d.bits(k);
    if (cellular) {
      // the cellular benchmark excludes fronthaul signalling delay
      d.budget(k) = cfg.latency_budget_cell;
      d.eff_budget(k) = cfg.latency_budget_cell;
    } else {
      d.budget(k) = cfg.latency_budget;
      d.eff_budget(k) = cfg.latency_budget - fh_rate * d.bits(k);
    }
  }
  return d;
}

LatencyBreakdown latency_breakdown(double bits, double cycles, double se,
                                   double f_total, const SystemConfig& cfg) {
  const bool cellular = cfg.mode == NetworkMode::Cellular;
  const double budget =
      cellular ? cfg.latency_budget_cell : cfg.latency_budget;
  LatencyBreakdown out;
  out.fronthaul = cellular ? 0.0
                           : 2.0 * bits * cfg.antennas_per_ap *
                                 cfg.quant_bits / cfg.fronthaul_capacity;
  if (se <= 0 || f_total <= 0) {
    out.transmission = se <= 0 ? std::numeric_limits<double>::infinity()
                               : bits / (cfg.bandwidth * se);
    out.computational = f_total <= 0
                            ? std::numeric_limits<double>::infinity()
                            : cycles / f_total;
    out.total = std::numeric_limits<double>::infinity();
    out.violated = true;
    return out;
  }
  out.transmission = bits / (cfg.bandwidth * se);
  out.computational = cycles / f_total;
  out.total = out.transmission + out.computational + out.fronthaul;
  out.violated = out.total > budget;
  return out;
}

ObjectiveWeights objective_weights(const SystemConfig& cfg,
                                   const RealVector& se0) {
  const double se_max = se0.maxCoeff();
  if (se_max <= 0)
    throw ConfigError("objective_weights: initialization SE is all zero");
  const double K = static_cast<double>(cfg.n_users);
  ObjectiveWeights w;
  w.power = cfg.omega_p / (K * cfg.p_max);
  w.se = cfg.omega_se / (K * se_max);
  return w;
}

double energy_per_mbit(double p, double se, double bandwidth) {
  if (p == 0.0) return 0.0;
  if (se <= 0) return std::numeric_limits<double>::infinity();
  return 1e6 * p / (bandwidth * se);
}

}  // namespace cfmec
