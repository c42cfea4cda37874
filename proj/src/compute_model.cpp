#include "cfmec/compute_model.hpp"

namespace cfmec {

RealVector ComputeModel::to_full(const RealVector& f_active) const {
  RealVector full = RealVector::Zero(n_users + n_users * n_aps);
  for (int v = 0; v < n_vars; ++v) full(full_index[v]) = f_active(v);
  return full;
}

double ComputeModel::user_total(const RealVector& f_active, int k) const {
  double sum = 0.0;
  for (int v : user_vars[k]) sum += f_active(v);
  return sum;
}

ComputeModel make_compute_model_cellfree(const ServingTopology& topology,
                                         const RealVector& f_ap,
                                         double f_cpu) {
  const int K = topology.n_users;
  const int L = topology.n_aps;
  ComputeModel model;
  model.n_users = K;
  model.n_aps = L;
  model.user_vars.assign(K, {});

  ComputeModel::Budget cpu;
  cpu.cap = f_cpu;
  std::vector<ComputeModel::Budget> ap_budget(L);
  std::vector<char> ap_used(L, 0);
  for (int l = 0; l < L; ++l) ap_budget[l].cap = f_ap(l);

  for (int k = 0; k < K; ++k) {
    int v = model.n_vars++;
    model.user_vars[k].push_back(v);
    model.full_index.push_back(k);  // CPU share
    cpu.vars.push_back(v);
    for (int l : topology.serving_aps[k]) {
      v = model.n_vars++;
      model.user_vars[k].push_back(v);
      model.full_index.push_back(K + k * L + l);
      ap_budget[l].vars.push_back(v);
      ap_used[l] = 1;
    }
  }
  model.budgets.push_back(std::move(cpu));
  for (int l = 0; l < L; ++l)
    if (ap_used[l]) model.budgets.push_back(std::move(ap_budget[l]));
  return model;
}

ComputeModel make_compute_model_cellular(const ServingTopology& topology,
                                         const RealVector& f_bs) {
  const int K = topology.n_users;
  const int L = topology.n_aps;
  ComputeModel model;
  model.n_users = K;
  model.n_aps = L;
  model.user_vars.assign(K, {});

  std::vector<ComputeModel::Budget> bs_budget(L);
  std::vector<char> bs_used(L, 0);
  for (int l = 0; l < L; ++l) bs_budget[l].cap = f_bs(l);

  for (int k = 0; k < K; ++k) {
    const int l = topology.serving_aps[k].at(0);
    const int v = model.n_vars++;
    model.user_vars[k].push_back(v);
    model.full_index.push_back(K + k * L + l);
    bs_budget[l].vars.push_back(v);
    bs_used[l] = 1;
  }
  for (int l = 0; l < L; ++l)
    if (bs_used[l]) model.budgets.push_back(std::move(bs_budget[l]));
  return model;
}

ComputeModel make_compute_model_cran(const CranAssociation& assoc,
                                     const ServingTopology& topology,
                                     const RealVector& f_ap, double f_cpu) {
  const int K = topology.n_users;
  const int L = topology.n_aps;
  ComputeModel model;
  model.n_users = K;
  model.n_aps = L;
  model.user_vars.assign(K, {});

  ComputeModel::Budget cpu;
  cpu.cap = f_cpu;
  bool cpu_used = false;
  std::vector<ComputeModel::Budget> ap_budget(L);
  std::vector<char> ap_used(L, 0);
  for (int l = 0; l < L; ++l) ap_budget[l].cap = f_ap(l);

  for (int k = 0; k < K; ++k) {
    const int v = model.n_vars++;
    model.user_vars[k].push_back(v);
    const int server = assoc.server_of[k];
    if (server < 0) {
      model.full_index.push_back(k);
      cpu.vars.push_back(v);
      cpu_used = true;
    } else {
      model.full_index.push_back(K + k * L + server);
      ap_budget[server].vars.push_back(v);
      ap_used[server] = 1;
    }
  }
  if (cpu_used) model.budgets.push_back(std::move(cpu));
  for (int l = 0; l < L; ++l)
    if (ap_used[l]) model.budgets.push_back(std::move(ap_budget[l]));
  return model;
}

}  // namespace cfmec
