#include "cfmec/association.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "cfmec/offloading.hpp"

namespace cfmec {

RealVector ServingTopology::b_vector(int k) const {
  RealVector b = RealVector::Zero(n_users + n_users * n_aps);
  b(k) = 1.0;
  for (int l : serving_aps[k]) b(n_users + k * n_aps + l) = 1.0;
  return b;
}

RealVector ServingTopology::c_vector(int l) const {
  RealVector c = RealVector::Zero(n_users + n_users * n_aps);
  for (int k : served_users[l]) c(n_users + k * n_aps + l) = 1.0;
  return c;
}

void ServingTopology::rebuild_derived() {
  serving_aps.assign(n_users, {});
  served_users.assign(n_aps, {});
  for (int l = 0; l < n_aps; ++l)
    for (int k = 0; k < n_users; ++k)
      if (serves[l][k]) {
        serving_aps[k].push_back(l);
        served_users[l].push_back(k);
      }

  partial_set.assign(n_users, {});
  for (int k = 0; k < n_users; ++k) {
    for (int i = 0; i < n_users; ++i) {
      bool overlap = false;
      for (int l : serving_aps[k])
        if (serves[l][i]) {
          overlap = true;
          break;
        }
      if (overlap || i == k) partial_set[k].push_back(i);
    }
  }

  active_aps.clear();
  for (int l = 0; l < n_aps; ++l)
    if (!served_users[l].empty()) active_aps.push_back(l);
}

namespace {

int master_ap(const NetworkSnapshot& snap, int k) {
  int best = 0;
  for (int l = 1; l < snap.beta.rows(); ++l)
    if (snap.beta(l, k) > snap.beta(best, k)) best = l;
  return best;
}

}  // namespace

ServingTopology assign_pilots_dcc(const NetworkSnapshot& snapshot,
                                  const SystemConfig& cfg) {
  const int L = static_cast<int>(snapshot.beta.rows());
  const int K = static_cast<int>(snapshot.beta.cols());
  const int tau_p = cfg.tau_p;

  ServingTopology topo;
  topo.n_aps = L;
  topo.n_users = K;
  topo.pilot_of.resize(K);

  // greedy pilot choice: minimize co-pilot received power at the master AP
  std::vector<int> master(K);
  for (int k = 0; k < K; ++k) {
    master[k] = master_ap(snapshot, k);
    int best_t = 0;
    double best_power = std::numeric_limits<double>::infinity();
    for (int t = 0; t < tau_p; ++t) {
      double power = 0.0;
      for (int j = 0; j < k; ++j)
        if (topo.pilot_of(j) == t) power += snapshot.beta(master[k], j);
      if (power < best_power) {
        best_power = power;
        best_t = t;
      }
    }
    topo.pilot_of(k) = best_t;
  }

  // per (AP, pilot) one served user: the master-designated user if any,
  // otherwise the strongest contender (ties by lowest user index)
  topo.serves.assign(L, std::vector<char>(K, 0));
  for (int l = 0; l < L; ++l) {
    for (int t = 0; t < tau_p; ++t) {
      int winner = -1;
      bool master_claim = false;
      for (int k = 0; k < K; ++k) {
        if (topo.pilot_of(k) != t) continue;
        if (master[k] == l) {
          // master designation always serves; collisions (several users
          // sharing both master AP and pilot) all stay served
          topo.serves[l][k] = 1;
          master_claim = true;
        }
        if (winner < 0 || snapshot.beta(l, k) > snapshot.beta(l, winner))
          winner = k;
      }
      if (!master_claim && winner >= 0) topo.serves[l][winner] = 1;
    }
  }
  topo.rebuild_derived();
  return topo;
}

namespace {

std::vector<int> sorted_by_beta(const NetworkSnapshot& snap,
                                const std::vector<int>& aps, int k) {
  std::vector<int> order = aps;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return snap.beta(a, k) > snap.beta(b, k);
  });
  return order;
}

}  // namespace

ServingTopology reduce_fcc(const ServingTopology& topology,
                           const NetworkSnapshot& snapshot, int G) {
  if (G < 1) throw ConfigError("FCC G must be >= 1");
  ServingTopology topo = topology;
  for (int k = 0; k < topo.n_users; ++k) {
    const auto order = sorted_by_beta(snapshot, topology.serving_aps[k], k);
    for (std::size_t i = G; i < order.size(); ++i)
      topo.serves[order[i]][k] = 0;
  }
  topo.rebuild_derived();
  return topo;
}

ServingTopology reduce_lsfbs(const ServingTopology& topology,
                             const NetworkSnapshot& snapshot,
                             double threshold) {
  if (threshold <= 0 || threshold > 1)
    throw ConfigError("LSFBS threshold must lie in (0,1]");
  ServingTopology topo = topology;
  for (int k = 0; k < topo.n_users; ++k) {
    const auto order = sorted_by_beta(snapshot, topology.serving_aps[k], k);
    double total = 0.0;
    for (int l : order) total += snapshot.beta(l, k);
    double acc = 0.0;
    std::size_t keep = order.size();
    for (std::size_t i = 0; i < order.size(); ++i) {
      acc += snapshot.beta(order[i], k);
      if (acc >= threshold * total) {
        keep = i + 1;
        break;
      }
    }
    for (std::size_t i = keep; i < order.size(); ++i)
      topo.serves[order[i]][k] = 0;
  }
  topo.rebuild_derived();
  return topo;
}

ServingTopology associate_cellular(const NetworkSnapshot& snapshot,
                                   const SystemConfig& cfg) {
  const int L = static_cast<int>(snapshot.beta.rows());
  const int K = static_cast<int>(snapshot.beta.cols());
  ServingTopology topo;
  topo.n_aps = L;
  topo.n_users = K;
  topo.pilot_of.resize(K);
  topo.serves.assign(L, std::vector<char>(K, 0));

  std::vector<int> bs(K);
  for (int k = 0; k < K; ++k) {
    bs[k] = master_ap(snapshot, k);
    topo.serves[bs[k]][k] = 1;
    // pilots reused per cell: minimize co-pilot power at the serving BS
    int best_t = 0;
    double best_power = std::numeric_limits<double>::infinity();
    for (int t = 0; t < cfg.tau_p; ++t) {
      double power = 0.0;
      for (int j = 0; j < k; ++j)
        if (topo.pilot_of(j) == t) power += snapshot.beta(bs[k], j);
      if (power < best_power) {
        best_power = power;
        best_t = t;
      }
    }
    topo.pilot_of(k) = best_t;
  }
  topo.rebuild_derived();
  return topo;
}

CranAssociation associate_cran(const ServingTopology& topology,
                               const OffloadingDemand& demands,
                               const RealVector& se, const RealVector& f_ap,
                               const SystemConfig& cfg) {
  const int K = topology.n_users;
  const int L = topology.n_aps;
  CranAssociation out;
  out.server_of.assign(K, -1);
  out.mu = RealVector::Zero(K);
  out.f_heuristic = RealVector::Zero(K + K * L);

  for (int k = 0; k < K; ++k) {
    const double slack =
        demands.eff_budget(k) - (demands.bits(k) / cfg.bandwidth) /
                                    std::max(se(k), 1e-300);
    if (se(k) <= 0 || slack <= 0) {
      out.feasible = false;
      return out;  // computational demand undefined: SE too low
    }
    out.mu(k) = demands.cycles(k) / slack;
  }

  std::vector<int> order(K);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return out.mu(a) > out.mu(b); });

  double cpu_avail = cfg.f_cpu;
  RealVector ap_avail = f_ap;
  for (int k : order) {
    if (out.mu(k) < cpu_avail) {
      out.server_of[k] = -1;
      out.f_heuristic(k) = out.mu(k);
      cpu_avail -= out.mu(k);
      continue;
    }
    int best_l = 0;
    for (int l = 1; l < L; ++l)
      if (ap_avail(l) > ap_avail(best_l)) best_l = l;
    if (out.mu(k) < ap_avail(best_l)) {
      out.server_of[k] = best_l;
      out.f_heuristic(K + k * L + best_l) = out.mu(k);
      ap_avail(best_l) -= out.mu(k);
    } else {
      out.feasible = false;
      return out;  // resource allocation unfeasible
    }
  }
  out.feasible = true;
  return out;
}

}  // namespace cfmec
