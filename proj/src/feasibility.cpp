#include "cfmec/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include <Eigen/Eigenvalues>

namespace cfmec {

RoughVerdict rough_check(const RealVector& rates,
                         const OffloadingDemand& demand,
                         const ComputeModel& compute) {
  RoughVerdict v;
  const int K = static_cast<int>(rates.size());
  v.rate_ok = true;
  double compute_need = 0.0;
  for (int k = 0; k < K; ++k) {
    if (rates(k) <= demand.bits(k) / demand.eff_budget(k)) {
      v.rate_ok = false;
      break;
    }
    compute_need +=
        demand.cycles(k) / (demand.eff_budget(k) - demand.bits(k) / rates(k));
  }
  double compute_cap = 0.0;
  for (const auto& b : compute.budgets) compute_cap += b.cap;
  v.compute_ok = v.rate_ok && compute_need < compute_cap;
  v.pass = v.rate_ok && v.compute_ok;
  return v;
}

namespace {

/// Max-flow feasibility of splitting per-user demands across budget groups.
/// Nodes: 0 source, 1..K users, K+1..K+B budgets, K+B+1 sink. Edges are
/// visited in insertion order (per user: CPU share first, then APs by
/// index), which fixes the split deterministically at equal objective.
struct FlowNet {
  struct Edge {
    int to;
    double cap;
    int rev;
  };
  std::vector<std::vector<Edge>> adj;

  explicit FlowNet(int n) : adj(n) {}

  void add(int a, int b, double cap) {
    adj[a].push_back({b, cap, static_cast<int>(adj[b].size())});
    adj[b].push_back({a, 0.0, static_cast<int>(adj[a].size()) - 1});
  }

  // Edmonds-Karp; returns total flow pushed.
  double run(int s, int t, double eps) {
    double total = 0.0;
    for (;;) {
      std::vector<int> prev_node(adj.size(), -1), prev_edge(adj.size(), -1);
      std::deque<int> q{s};
      prev_node[s] = s;
      while (!q.empty() && prev_node[t] < 0) {
        const int x = q.front();
        q.pop_front();
        for (int e = 0; e < static_cast<int>(adj[x].size()); ++e) {
          const Edge& ed = adj[x][e];
          if (ed.cap > eps && prev_node[ed.to] < 0) {
            prev_node[ed.to] = x;
            prev_edge[ed.to] = e;
            q.push_back(ed.to);
          }
        }
      }
      if (prev_node[t] < 0) return total;
      double push = std::numeric_limits<double>::infinity();
      for (int x = t; x != s; x = prev_node[x])
        push = std::min(push, adj[prev_node[x]][prev_edge[x]].cap);
      for (int x = t; x != s; x = prev_node[x]) {
        Edge& ed = adj[prev_node[x]][prev_edge[x]];
        ed.cap -= push;
        adj[ed.to][ed.rev].cap += push;
      }
      total += push;
    }
  }
};

}  // namespace

LpResult min_compute_lp(const RealVector& demands, const ComputeModel& model) {
  const int K = model.n_users;
  const int B = static_cast<int>(model.budgets.size());
  LpResult out;
  out.f_active = RealVector::Zero(model.n_vars);

  // variable id -> budget group
  std::vector<int> budget_of(model.n_vars, -1);
  for (int b = 0; b < B; ++b)
    for (int v : model.budgets[b].vars) budget_of[v] = b;

  double total_demand = 0.0;
  for (int k = 0; k < K; ++k) {
    if (demands(k) < 0 || !std::isfinite(demands(k))) return out;
    total_demand += demands(k);
  }
  const double eps = 1e-9 * std::max(total_demand, 1.0);

  const int source = 0, sink = K + B + 1;
  FlowNet net(K + B + 2);
  // user -> budget edges recorded so the flow can be read back per variable
  std::vector<std::vector<std::pair<int, int>>> var_edge(K);  // (var, edge id)
  for (int k = 0; k < K; ++k) {
    net.add(source, 1 + k, demands(k));
    for (int v : model.user_vars[k]) {
      var_edge[k].emplace_back(v, static_cast<int>(net.adj[1 + k].size()));
      net.add(1 + k, 1 + K + budget_of[v],
              std::numeric_limits<double>::infinity());
    }
  }
  for (int b = 0; b < B; ++b) net.add(1 + K + b, sink, model.budgets[b].cap);

  const double pushed = net.run(source, sink, eps);
  if (pushed < total_demand - eps) return out;  // infeasible split

  for (int k = 0; k < K; ++k)
    for (auto [v, e] : var_edge[k]) {
      // flow through the forward edge = reverse residual
      const auto& fwd = net.adj[1 + k][e];
      out.f_active(v) = net.adj[fwd.to][fwd.rev].cap;
    }
  out.objective = out.f_active.sum();
  out.feasible = true;
  return out;
}

BisectionResult min_max_rate_bisection(const OffloadingDemand& demand,
                                       const ComputeModel& model,
                                       const SystemConfig& cfg) {
  const int K = model.n_users;
  BisectionResult out;

  // per-user compute demand implied by rate surrogate t
  auto probe = [&](double t) -> LpResult {
    RealVector d(K);
    for (int k = 0; k < K; ++k) {
      const double slack =
          demand.eff_budget(k) - demand.bits(k) / (t * cfg.bandwidth);
      if (slack <= 0) {
        LpResult bad;
        return bad;
      }
      d(k) = demand.cycles(k) / slack;
    }
    return min_compute_lp(d, model);
  };

  double t_low = 0.0, t_up = 0.0;
  for (int k = 0; k < K; ++k)
    t_low = std::max(t_low,
                     demand.bits(k) / (cfg.bandwidth * demand.eff_budget(k)));
  t_up = t_low / cfg.bisect_eps;

  LpResult top = probe(t_up);
  ++out.probes;
  if (!top.feasible) return out;  // even the loosest surrogate fails
  out.f_star = top.f_active;
  out.t_star = t_up;

  while (t_up - t_low > cfg.bisect_gap) {
    const double mid = 0.5 * (t_low + t_up);
    LpResult res = probe(mid);
    ++out.probes;
    if (res.feasible) {
      t_up = mid;
      out.f_star = res.f_active;
      out.t_star = mid;
    } else {
      t_low = mid;
    }
  }
  out.interval = t_up - t_low;
  out.feasible = true;
  return out;
}

double spectral_radius(const RealMatrix& A, int max_iter, double tol) {
  const int n = static_cast<int>(A.rows());
  if (n == 0) return 0.0;
  if (n <= 32) {
    Eigen::EigenSolver<RealMatrix> es(A, /*computeEigenvectors=*/false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  RealVector x = RealVector::Ones(n) / std::sqrt(static_cast<double>(n));
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    RealVector y = A * x;
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;
    y /= norm;
    const double next = std::abs(x.dot(A * x));
    if (it > 0 && std::abs(next - lambda) <= tol * std::max(1.0, next)) {
      lambda = next;
      break;
    }
    lambda = next;
    x = y;
  }
  return lambda;
}

RealVector sinr_targets(const OffloadingDemand& demand,
                        const ComputeModel& model, const RealVector& f_star,
                        const SystemConfig& cfg) {
  const int K = model.n_users;
  RealVector gamma(K);
  const double scale = static_cast<double>(cfg.tau_c) /
                       (cfg.bandwidth * cfg.tau_u());
  for (int k = 0; k < K; ++k) {
    const double f_k = model.user_total(f_star, k);
    const double slack =
        f_k > 0 ? demand.eff_budget(k) - demand.cycles(k) / f_k : -1.0;
    if (slack <= 0) {
      gamma(k) = std::numeric_limits<double>::infinity();
      continue;
    }
    const double z = demand.bits(k) * scale / slack;
    gamma(k) = std::exp2(z) - 1.0;
  }
  return gamma;
}

bool InterferenceOperator::gate(double* rho_out) const {
  const int K = static_cast<int>(gamma.size());
  RealVector g_eff(K);
  for (int k = 0; k < K; ++k) {
    if (!std::isfinite(gamma(k))) {
      if (rho_out) *rho_out = std::numeric_limits<double>::infinity();
      return false;
    }
    g_eff(k) = g_diag(k) - c_diag(k) * gamma(k);
    if (g_eff(k) <= 0) {
      if (rho_out) *rho_out = std::numeric_limits<double>::infinity();
      return false;
    }
  }
  const RealMatrix iter_matrix =
      (gamma.array() / g_eff.array()).matrix().asDiagonal() * z;
  const double rho = spectral_radius(iter_matrix);
  if (rho_out) *rho_out = rho;
  return rho < 1.0;
}

RealVector InterferenceOperator::apply(const RealVector& p) const {
  const int K = static_cast<int>(gamma.size());
  RealVector out(K);
  for (int k = 0; k < K; ++k) {
    const double g_eff = g_diag(k) - c_diag(k) * gamma(k);
    out(k) = gamma(k) * (z.row(k).dot(p) + noise * u(k)) / g_eff;
  }
  return out;
}

InterferenceOperator make_interference_operator(
    const SinrCoefficients& coeffs, const RealVector& gamma_targets,
    double noise_power) {
  const int K = static_cast<int>(gamma_targets.size());
  InterferenceOperator op;
  op.gamma = gamma_targets;
  op.noise = noise_power;
  op.g_diag.resize(K);
  op.c_diag.resize(K);
  op.u = coeffs.u;
  op.z = RealMatrix::Zero(K, K);
  for (int k = 0; k < K; ++k) {
    op.g_diag(k) = coeffs.g(k, k);
    op.c_diag(k) = coeffs.c(k, k);
    for (int i = 0; i < K; ++i)
      if (i != k) op.z(k, i) = coeffs.g(k, i) + coeffs.c(k, i);
  }
  return op;
}

PowerControlResult standard_power_control(const RealVector& gamma_targets,
                                          const ChannelEstimate& estimates,
                                          const ServingTopology& topology,
                                          const SystemConfig& cfg,
                                          const RealVector& init_p) {
  PowerControlResult out;
  out.p = init_p;
  for (int it = 0; it < cfg.pc_max_iter; ++it) {
    const CombinerSet combiners =
        cfg.mode == NetworkMode::Cellular
            ? lmmse(estimates, topology, out.p, cfg)
            : pmmse(estimates, topology, out.p, cfg);
    const SinrCoefficients coeffs =
        sinr_coefficients(combiners, estimates, topology, cfg);
    const InterferenceOperator op =
        make_interference_operator(coeffs, gamma_targets, cfg.noise_power);
    if (!op.gate(&out.rho)) {
      out.verdict = "SINR targets not feasible";
      return out;
    }
    const RealVector next = op.apply(out.p);
    double chi = 0.0;
    for (int k = 0; k < next.size(); ++k)
      chi = std::max(chi, std::abs(next(k) - out.p(k)) /
                              std::max(out.p(k), 1e-300));
    out.p = next;
    out.iterations = it + 1;
    if (chi <= cfg.pc_tol) {
      out.within_box = (out.p.array() <= cfg.p_max * (1 + 1e-9)).all();
      out.feasible = out.within_box;
      out.verdict =
          out.within_box ? "converged" : "targets infeasible under power box";
      return out;
    }
  }
  out.verdict = "power control did not converge";
  return out;
}

PipelineResult accurate_pipeline(const OffloadingDemand& demand,
                                 const ComputeModel& model,
                                 const ChannelEstimate& estimates,
                                 const ServingTopology& topology,
                                 const SystemConfig& cfg,
                                 const RealVector& init_p) {
  PipelineResult out;
  RealVector d(model.n_users);
  for (int k = 0; k < model.n_users; ++k)
    d(k) = demand.cycles(k) / demand.eff_budget(k);
  const LpResult lp = min_compute_lp(d, model);
  if (!lp.feasible) {
    out.stage = "lp";
    return out;
  }
  const BisectionResult bisect = min_max_rate_bisection(demand, model, cfg);
  if (!bisect.feasible) {
    out.stage = "bisection";
    return out;
  }
  out.f_star = bisect.f_star;
  const RealVector gamma = sinr_targets(demand, model, bisect.f_star, cfg);
  const PowerControlResult pc =
      standard_power_control(gamma, estimates, topology, cfg, init_p);
  out.rho = pc.rho;
  out.pc_iterations = pc.iterations;
  if (!pc.feasible) {
    out.stage = "power-control";
    return out;
  }
  out.p0 = pc.p;
  out.feasible = true;
  return out;
}

}  // namespace cfmec
