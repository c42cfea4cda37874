#pragma once

#include "cfmec/config.hpp"
#include "cfmec/rng.hpp"
#include "cfmec/types.hpp"

namespace cfmec {

struct OffloadingDemand {
  RealVector bits;        // b_k
  RealVector cycles;      // w_k = alpha * b_k
  RealVector budget;      // L_k
  RealVector eff_budget;  // L_k minus the fronthaul term (cellular: L_cell)
};

OffloadingDemand generate_demands(const SystemConfig& cfg, Rng& rng);

struct LatencyBreakdown {
  double transmission = 0.0;
  double computational = 0.0;
  double fronthaul = 0.0;
  double total = 0.0;
  bool violated = false;
};

/// Eq-of-motion of the latency budget: b/(B*SE) + w/f + fronthaul term.
/// Zero SE or compute yields an infinite-latency sentinel.
LatencyBreakdown latency_breakdown(double bits, double cycles, double se,
                                   double f_total, const SystemConfig& cfg);

struct ObjectiveWeights {
  double power = 0.0;  // varpi_p
  double se = 0.0;     // varpi_se
};

/// se0 = instantaneous SE at the initialization powers; cellular mode
/// passes the per-(BS,user) SE of the serving BS, so max_k covers max_{l,k}.
ObjectiveWeights objective_weights(const SystemConfig& cfg,
                                   const RealVector& se0);

/// Transmit energy per Mbit, J/Mbit.
double energy_per_mbit(double p, double se, double bandwidth);

}  // namespace cfmec
