#pragma once

#include <vector>

#include "cfmec/association.hpp"
#include "cfmec/config.hpp"
#include "cfmec/estimation.hpp"
#include "cfmec/types.hpp"

namespace cfmec {

/// Receive combining vectors. Cell-free combiners are stored on the
/// per-user serving-block subspace (|M_k| * M entries, block order =
/// serving_aps[k]); cellular combiners are single M-dim local vectors.
struct CombinerSet {
  std::vector<Vector> v;
  RealVector built_at_powers;
  bool cellular = false;
};

CombinerSet pmmse(const ChannelEstimate& estimates,
                  const ServingTopology& topology, const RealVector& p,
                  const SystemConfig& cfg);

CombinerSet lmmse(const ChannelEstimate& estimates,
                  const ServingTopology& topology, const RealVector& p,
                  const SystemConfig& cfg);

/// Full-dimension L*M oracle path for user k (tests only use this).
Vector pmmse_dense(const ChannelEstimate& estimates,
                   const ServingTopology& topology, const RealVector& p,
                   const SystemConfig& cfg, int k);

/// Expands a subspace combiner to the stacked L*M space (zeros outside
/// serving blocks).
Vector expand_combiner(const CombinerSet& combiners,
                       const ServingTopology& topology, int k);

/// Quadratic forms entering SINR, fixed once combiners are fixed:
///   g(k,i) = |v_k^H D_k hhat_i|^2
///   c(k,i) = v_k^H D_k C_i D_k v_k
///   u(k)   = ||D_k v_k||^2
struct SinrCoefficients {
  RealMatrix g;
  RealMatrix c;
  RealVector u;
};

SinrCoefficients sinr_coefficients(const CombinerSet& combiners,
                                   const ChannelEstimate& estimates,
                                   const ServingTopology& topology,
                                   const SystemConfig& cfg);

struct SeReport {
  RealVector sinr;
  RealVector se;   // bit/s/Hz, prelog included
  RealVector num;  // affine in p for fixed combiners
  RealVector den;
};

/// Instantaneous SINR / SE at powers p with the coefficients' combiners
/// held fixed (evaluation powers may differ from construction powers).
SeReport evaluate_se(const SinrCoefficients& coeffs, const RealVector& p,
                     const SystemConfig& cfg);

}  // namespace cfmec
