#pragma once

#include <string>

#include "cfmec/combining.hpp"
#include "cfmec/compute_model.hpp"
#include "cfmec/offloading.hpp"

namespace cfmec {

/// Necessary-but-not-sufficient conditions evaluated at a given power
/// allocation. A failed check is inconclusive, never a certificate.
struct RoughVerdict {
  bool pass = false;
  bool rate_ok = false;
  bool compute_ok = false;
};

RoughVerdict rough_check(const RealVector& rates,
                         const OffloadingDemand& demand,
                         const ComputeModel& compute);

/// Minimal-sum compute allocation meeting per-user demands b_k^T f >= d_k
/// under the budget caps. Each variable appears in exactly one demand row,
/// so the optimum is sum_k d_k whenever a capacity-respecting split exists;
/// solved as a bipartite flow with deterministic CPU-first augmentation.
struct LpResult {
  bool feasible = false;
  RealVector f_active;  // ComputeModel variable order
  double objective = 0.0;
};

LpResult min_compute_lp(const RealVector& demands, const ComputeModel& model);

/// Bisection on the epigraph form of the min-max rate-requirement problem.
struct BisectionResult {
  bool feasible = false;
  RealVector f_star;   // active variable order
  double t_star = 0.0;
  double interval = 0.0;
  int probes = 0;
};

BisectionResult min_max_rate_bisection(const OffloadingDemand& demand,
                                       const ComputeModel& model,
                                       const SystemConfig& cfg);

/// Perron-Frobenius eigenvalue of a nonnegative matrix via power
/// iteration, dense fallback for small K.
double spectral_radius(const RealMatrix& A, int max_iter = 200,
                       double tol = 1e-10);

/// SINR targets derived from f_star through the rate requirement.
RealVector sinr_targets(const OffloadingDemand& demand,
                        const ComputeModel& model, const RealVector& f_star,
                        const SystemConfig& cfg);

struct PowerControlResult {
  bool feasible = false;    // targets feasible and iteration converged
  bool within_box = true;   // p <= p_max at the fixed point
  RealVector p;
  int iterations = 0;
  double rho = 0.0;         // last spectral radius seen
  std::string verdict;
};

/// Fixed-point iteration p <- Upsilon G^-1 (Z p + sigma^2 u) with P-MMSE
/// combiners rebuilt after every accepted iterate.
PowerControlResult standard_power_control(const RealVector& gamma_targets,
                                          const ChannelEstimate& estimates,
                                          const ServingTopology& topology,
                                          const SystemConfig& cfg,
                                          const RealVector& init_p);

struct PipelineResult {
  bool feasible = false;
  std::string stage;        // stage that failed, empty on success
  RealVector p0;
  RealVector f_star;        // active variable order
  double rho = 0.0;
  int pc_iterations = 0;
};

/// LP -> bisection -> standard power control; on success p0 seeds the SCA.
PipelineResult accurate_pipeline(const OffloadingDemand& demand,
                                 const ComputeModel& model,
                                 const ChannelEstimate& estimates,
                                 const ServingTopology& topology,
                                 const SystemConfig& cfg,
                                 const RealVector& init_p);

/// Interference-function pieces at fixed combiners (exposed for the
/// property tests on monotonicity and scalability).
struct InterferenceOperator {
  RealVector gamma;   // targets
  RealVector g_diag;  // g_kk
  RealMatrix z;       // off-diagonal g+c
  RealVector c_diag;  // c_kk
  RealVector u;       // noise norms
  double noise = 0.0;

  bool gate(double* rho_out = nullptr) const;
  RealVector apply(const RealVector& p) const;
};

InterferenceOperator make_interference_operator(
    const SinrCoefficients& coeffs, const RealVector& gamma_targets,
    double noise_power);

}  // namespace cfmec
