#pragma once

#include <vector>

#include "cfmec/config.hpp"
#include "cfmec/scenario.hpp"
#include "cfmec/types.hpp"

namespace cfmec {

/// Pilot assignment and AP-user association. serves[l][k] is true iff
/// D_lk = I_M. Selection vectors b_k / c_l live in the K + K*L layout
/// [f_cpu_1..f_cpu_K, f_ap_{1,1}..f_ap_{L,1}, ..., f_ap_{L,K}].
struct ServingTopology {
  int n_aps = 0;
  int n_users = 0;
  IntVector pilot_of;                          // K
  std::vector<std::vector<char>> serves;       // [l][k]
  std::vector<std::vector<int>> serving_aps;   // M_k, sorted
  std::vector<std::vector<int>> served_users;  // K_l, sorted
  std::vector<std::vector<int>> partial_set;   // S_k, sorted, contains k
  std::vector<int> active_aps;                 // Z = union of M_k

  RealVector b_vector(int k) const;  // K + K*L
  RealVector c_vector(int l) const;  // K + K*L

  /// Rebuilds serving_aps / served_users / partial_set / active_aps
  /// from the serves matrix.
  void rebuild_derived();
};

ServingTopology assign_pilots_dcc(const NetworkSnapshot& snapshot,
                                  const SystemConfig& cfg);

/// Keeps only the G largest-beta serving APs per user.
ServingTopology reduce_fcc(const ServingTopology& topology,
                           const NetworkSnapshot& snapshot, int G);

/// Keeps the minimal beta-descending prefix covering `threshold` of the
/// per-user serving channel gain.
ServingTopology reduce_lsfbs(const ServingTopology& topology,
                             const NetworkSnapshot& snapshot,
                             double threshold);

/// One serving BS per user (largest beta, ties by lowest AP index).
ServingTopology associate_cellular(const NetworkSnapshot& snapshot,
                                   const SystemConfig& cfg);

struct OffloadingDemand;  // offloading.hpp

/// Heuristic user-to-MEC-server association for the C-RAN benchmark.
struct CranAssociation {
  bool feasible = false;
  std::vector<int> server_of;  // K; -1 = CPU server, else AP index
  RealVector mu;               // computational demand, cycles/s
  RealVector f_heuristic;      // K + K*L layout
};

CranAssociation associate_cran(const ServingTopology& topology,
                               const OffloadingDemand& demands,
                               const RealVector& se,
                               const RealVector& f_ap,
                               const SystemConfig& cfg);

}  // namespace cfmec
