#pragma once

#include <vector>

#include "cfmec/association.hpp"
#include "cfmec/config.hpp"
#include "cfmec/propagation.hpp"
#include "cfmec/types.hpp"

namespace cfmec {

/// Per-link linear MMSE channel estimates with pilot contamination.
struct ChannelEstimate {
  std::vector<std::vector<Vector>> h_hat;    // [l][k], M-dim
  std::vector<std::vector<Matrix>> err_cov;  // C_lk, M x M
  double pilot_power = 0.0;                  // p_p,k (same for all users)
};

/// Pilot-observation covariance Psi_lk = tau_p * sum_{j copilot} p_p R_lj
/// + sigma^2 I (orthonormal pilots).
Matrix pilot_covariance(const NetworkSnapshot& snapshot,
                        const ServingTopology& topology,
                        const SystemConfig& cfg, int l, int k,
                        double pilot_power);

ChannelEstimate estimate_mmse(const ChannelRealization& realization,
                              const ServingTopology& topology,
                              const NetworkSnapshot& snapshot, Rng& rng,
                              const SystemConfig& cfg);

}  // namespace cfmec
