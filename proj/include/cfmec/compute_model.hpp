#pragma once

#include <vector>

#include "cfmec/association.hpp"
#include "cfmec/types.hpp"

namespace cfmec {

/// Active compute variables and budget groups for one optimization run.
/// Only f entries with a nonzero coefficient in some b_k are variables;
/// the rest of the K + K*L layout is identically zero.
struct ComputeModel {
  struct Budget {
    double cap = 0.0;
    std::vector<int> vars;
  };

  int n_vars = 0;
  int n_users = 0;
  int n_aps = 0;
  std::vector<std::vector<int>> user_vars;  // per user, its variable ids
  std::vector<Budget> budgets;
  std::vector<int> full_index;              // var id -> K + K*L position

  RealVector to_full(const RealVector& f_active) const;
  double user_total(const RealVector& f_active, int k) const;
};

/// Cell-free: per user one CPU share plus one share per serving AP;
/// budgets are the CPU pool and each active AP.
ComputeModel make_compute_model_cellfree(const ServingTopology& topology,
                                         const RealVector& f_ap,
                                         double f_cpu);

/// Cellular: one share per user at its serving BS; per-BS budgets only.
ComputeModel make_compute_model_cellular(const ServingTopology& topology,
                                         const RealVector& f_bs);

/// C-RAN: single-server support fixed by the heuristic association.
ComputeModel make_compute_model_cran(const CranAssociation& assoc,
                                     const ServingTopology& topology,
                                     const RealVector& f_ap, double f_cpu);

}  // namespace cfmec
