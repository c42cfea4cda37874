#pragma once

#include <string>
#include <vector>

#include "cfmec/combining.hpp"
#include "cfmec/compute_model.hpp"
#include "cfmec/feasibility.hpp"
#include "cfmec/offloading.hpp"

namespace cfmec {

/// Affine-in-p SINR decomposition for one user at fixed combiners:
///   num + den = abar^T p + cbar,   den = a^T p + c.
struct SeAffine {
  RealVector abar;
  RealVector a;
  double cbar = 0.0;
  double c = 0.0;
  double prelog = 0.0;
};

std::vector<SeAffine> se_affine(const SinrCoefficients& coeffs,
                                const SystemConfig& cfg);

double se_value(const SeAffine& s, const RealVector& p);
RealVector se_gradient(const SeAffine& s, const RealVector& p);

/// Concave lower bound from linearizing -log2(den) around p0; tangent at
/// p = p0 with matching gradient.
double se_lower_bound(const SeAffine& s, const RealVector& p,
                      const RealVector& p0, RealVector* grad = nullptr);

struct SubproblemSpec {
  std::vector<SeAffine> se;
  RealVector p0;
  double weight_power = 0.0;  // varpi_p
  double weight_se = 0.0;     // varpi_se
  RealVector task_bits;
  RealVector task_cycles;
  RealVector eff_budget;
  const ComputeModel* compute = nullptr;
  const SystemConfig* cfg = nullptr;
};

struct SubproblemResult {
  bool solved = false;
  bool infeasible = false;
  std::string status;
  RealVector p;
  RealVector f_active;
  RealVector nu;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int newton_iters = 0;
};

/// Log-barrier Newton interior-point solve of the convex subproblem on
/// normalized variables; KKT residual reported on the normalized problem.
SubproblemResult solve_subproblem(const SubproblemSpec& spec,
                                  const RealVector& init_p,
                                  const RealVector& init_f);

struct AllocationResult {
  bool feasible = false;
  bool converged = false;
  std::string status;
  RealVector p;
  RealVector f_full;  // K + K*L layout, rounded
  RealVector nu;
  RealVector se;      // true instantaneous SE at the final point
  std::vector<double> objective_trace;
  std::vector<double> kkt_trace;
  std::vector<double> power_change_trace;
  int iterations = 0;
  bool constraints_ok = false;
  bool rounding_gap = false;
  std::vector<LatencyBreakdown> latency;
};

/// Outer SCA loop (combiners rebuilt from the previous iterate's powers).
/// The cellular variant is selected by topology + compute model; C-RAN
/// passes the support-restricted compute model.
AllocationResult run_sca(const RealVector& init_p,
                         const ServingTopology& topology,
                         const ChannelEstimate& estimates,
                         const OffloadingDemand& demand,
                         const ComputeModel& compute,
                         const ObjectiveWeights& weights,
                         const SystemConfig& cfg);

AllocationResult run_sca_cellular(const RealVector& init_p,
                                  const ServingTopology& topology,
                                  const ChannelEstimate& estimates,
                                  const OffloadingDemand& demand,
                                  const RealVector& f_bs,
                                  const ObjectiveWeights& weights,
                                  const SystemConfig& cfg);

AllocationResult run_sca_cran(const RealVector& init_p,
                              const ServingTopology& topology,
                              const ChannelEstimate& estimates,
                              const OffloadingDemand& demand,
                              const CranAssociation& assoc,
                              const RealVector& f_ap,
                              const ObjectiveWeights& weights,
                              const SystemConfig& cfg);

}  // namespace cfmec
