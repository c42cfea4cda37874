#include "cfmec/jpca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>

namespace cfmec {

std::vector<SeAffine> se_affine(const SinrCoefficients& coeffs,
                                const SystemConfig& cfg) {
  const int K = static_cast<int>(coeffs.u.size());
  std::vector<SeAffine> out(K);
  for (int k = 0; k < K; ++k) {
    SeAffine& s = out[k];
    s.abar.resize(K);
    s.a.resize(K);
    for (int i = 0; i < K; ++i) {
      const double gc = coeffs.g(k, i) + coeffs.c(k, i);
      s.abar(i) = gc;
      s.a(i) = (i == k) ? coeffs.c(k, k) : gc;
    }
    s.cbar = cfg.noise_power * coeffs.u(k);
    s.c = s.cbar;
    s.prelog = cfg.prelog();
  }
  return out;
}

double se_value(const SeAffine& s, const RealVector& p) {
  return s.prelog *
         (std::log2(s.abar.dot(p) + s.cbar) - std::log2(s.a.dot(p) + s.c));
}

RealVector se_gradient(const SeAffine& s, const RealVector& p) {
  const double inv_ln2 = 1.0 / std::log(2.0);
  return s.prelog * inv_ln2 *
         (s.abar / (s.abar.dot(p) + s.cbar) - s.a / (s.a.dot(p) + s.c));
}

double se_lower_bound(const SeAffine& s, const RealVector& p,
                      const RealVector& p0, RealVector* grad) {
  const double inv_ln2 = 1.0 / std::log(2.0);
  const double num = s.abar.dot(p) + s.cbar;
  const double den0 = s.a.dot(p0) + s.c;
  const double value =
      s.prelog * (std::log2(num) - std::log2(den0) -
                  inv_ln2 * s.a.dot(p - p0) / den0);
  if (grad)
    *grad = s.prelog * inv_ln2 * (s.abar / num - s.a / den0);
  return value;
}

namespace {

constexpr double kLn2 = 0.6931471805599453;

/// Log-barrier formulation of the convex subproblem on normalized
/// variables x = (p/p_max, f/f_scale). The SE bound per user reduces to
///   S_k(x) = prelog * log2(w_k^T x_p + cbar_k) - g_k^T x_p + const_k,
/// and the latency constraint to beta_k/S_k + gamma_k/F_k - 1 < 0 with
/// F_k the user's normalized compute total.
struct Barrier {
  const SubproblemSpec& spec;
  int K, nf, n;
  double p_scale, f_scale, fmin_hat;

  std::vector<RealVector> w;      // p_max * abar_k
  RealVector cbar, se_const;
  std::vector<RealVector> lin;    // linearized-denominator slope wrt x_p
  RealVector beta, gamma;         // latency coefficients
  double obj_p = 0.0;             // varpi_p * p_max
  std::vector<double> budget_scale;  // f_scale / cap

  int n_constraints = 0;

  Barrier(const SubproblemSpec& s, const RealVector& p0_hat)
      : spec(s),
        K(static_cast<int>(s.p0.size())),
        nf(s.compute->n_vars),
        n(K + s.compute->n_vars) {
    const SystemConfig& cfg = *s.cfg;
    p_scale = cfg.p_max;
    f_scale = 0.0;
    for (const auto& b : s.compute->budgets)
      f_scale = std::max(f_scale, b.cap);
    fmin_hat = cfg.f_min / f_scale;

    w.resize(K);
    lin.resize(K);
    cbar.resize(K);
    se_const.resize(K);
    beta.resize(K);
    gamma.resize(K);
    for (int k = 0; k < K; ++k) {
      const SeAffine& se = s.se[k];
      w[k] = p_scale * se.abar;
      cbar(k) = se.cbar;
      const double den0 = se.a.dot(s.p0) + se.c;
      lin[k] = se.prelog / kLn2 * p_scale * se.a / den0;
      se_const(k) = -se.prelog * std::log2(den0) + lin[k].dot(p0_hat);
      beta(k) = s.task_bits(k) / (cfg.bandwidth * s.eff_budget(k));
      gamma(k) = s.task_cycles(k) / (f_scale * s.eff_budget(k));
    }
    obj_p = s.weight_power * p_scale;
    for (const auto& b : s.compute->budgets)
      budget_scale.push_back(f_scale / b.cap);
    n_constraints = K + static_cast<int>(budget_scale.size()) + 2 * K + nf;
  }

  double se_bound(const RealVector& x, int k) const {
    return spec.se[k].prelog * std::log2(w[k].dot(x.head(K)) + cbar(k)) -
           lin[k].dot(x.head(K)) + se_const(k);
  }

  double user_f(const RealVector& x, int k) const {
    double sum = 0.0;
    for (int v : spec.compute->user_vars[k]) sum += x(K + v);
    return sum;
  }

  double latency_g(const RealVector& x, int k, double s_k) const {
    return beta(k) / s_k + gamma(k) / user_f(x, k) - 1.0;
  }

  double budget_g(const RealVector& x, int j) const {
    double sum = 0.0;
    for (int v : spec.compute->budgets[j].vars) sum += x(K + v);
    return sum * budget_scale[j] - 1.0;
  }

  bool in_domain(const RealVector& x) const {
    for (int k = 0; k < K; ++k)
      if (x(k) <= 0 || x(k) >= 1) return false;
    for (int v = 0; v < nf; ++v)
      if (x(K + v) <= fmin_hat) return false;
    for (std::size_t j = 0; j < budget_scale.size(); ++j)
      if (budget_g(x, static_cast<int>(j)) >= 0) return false;
    for (int k = 0; k < K; ++k) {
      const double num = w[k].dot(x.head(K)) + cbar(k);
      if (num <= 0) return false;
      const double s = se_bound(x, k);
      if (s <= 0 || latency_g(x, k, s) >= 0) return false;
    }
    return true;
  }

  double objective(const RealVector& x) const {
    double obj = obj_p * x.head(K).sum();
    for (int k = 0; k < K; ++k) obj -= spec.weight_se * se_bound(x, k);
    return obj;
  }

  // t * objective + log barrier; +inf outside the domain
  double value(const RealVector& x, double t) const {
    if (!in_domain(x)) return std::numeric_limits<double>::infinity();
    double val = t * objective(x);
    for (int k = 0; k < K; ++k)
      val -= std::log(x(k)) + std::log(1.0 - x(k)) +
             std::log(-latency_g(x, k, se_bound(x, k)));
    for (int v = 0; v < nf; ++v) val -= std::log(x(K + v) - fmin_hat);
    for (std::size_t j = 0; j < budget_scale.size(); ++j)
      val -= std::log(-budget_g(x, static_cast<int>(j)));
    return val;
  }

  void derivatives(const RealVector& x, double t, RealVector& grad,
                   RealMatrix& hess) const {
    grad = RealVector::Zero(n);
    hess = RealMatrix::Zero(n, n);

    for (int k = 0; k < K; ++k) {
      const double num = w[k].dot(x.head(K)) + cbar(k);
      const double s = se_bound(x, k);
      const double prelog = spec.se[k].prelog;
      RealVector ds = RealVector::Zero(n);
      ds.head(K) = prelog / kLn2 * w[k] / num - lin[k];
      const RealMatrix d2s_p =
          -prelog / kLn2 / (num * num) * (w[k] * w[k].transpose());

      // objective SE term: -varpi_se * S_k
      grad -= t * spec.weight_se * ds;
      hess.topLeftCorner(K, K) -= t * spec.weight_se * d2s_p;

      // latency barrier
      const double f_k = user_f(x, k);
      const double g = latency_g(x, k, s);
      RealVector dg = -beta(k) / (s * s) * ds;
      for (int v : spec.compute->user_vars[k])
        dg(K + v) -= gamma(k) / (f_k * f_k);
      // hessian of g: SE part on p block, compute part on user vars
      RealMatrix d2g = RealMatrix::Zero(n, n);
      d2g.topLeftCorner(K, K) =
          beta(k) * (2.0 / (s * s * s) * ds.head(K) * ds.head(K).transpose() -
                     d2s_p / (s * s));
      for (int v1 : spec.compute->user_vars[k])
        for (int v2 : spec.compute->user_vars[k])
          d2g(K + v1, K + v2) += 2.0 * gamma(k) / (f_k * f_k * f_k);
      grad += dg / (-g);
      hess += dg * dg.transpose() / (g * g) + d2g / (-g);
    }

    // linear objective in p
    for (int k = 0; k < K; ++k) grad(k) += t * obj_p;

    // box barriers on p
    for (int k = 0; k < K; ++k) {
      grad(k) += -1.0 / x(k) + 1.0 / (1.0 - x(k));
      hess(k, k) += 1.0 / (x(k) * x(k)) +
                    1.0 / ((1.0 - x(k)) * (1.0 - x(k)));
    }
    // lower bounds on f
    for (int v = 0; v < nf; ++v) {
      const double d = x(K + v) - fmin_hat;
      grad(K + v) += -1.0 / d;
      hess(K + v, K + v) += 1.0 / (d * d);
    }
    // budget barriers (linear constraints)
    for (std::size_t j = 0; j < budget_scale.size(); ++j) {
      const double g = budget_g(x, static_cast<int>(j));
      const double sc = budget_scale[j];
      const auto& vars = spec.compute->budgets[j].vars;
      for (int v1 : vars) {
        grad(K + v1) += sc / (-g);
        for (int v2 : vars) hess(K + v1, K + v2) += sc * sc / (g * g);
      }
    }
  }

  /// Stationarity residual of the original normalized KKT system with the
  /// barrier multipliers lambda_i = 1/(t * (-g_i)).
  double kkt_stationarity(const RealVector& x, double t) const {
    RealVector grad;
    RealMatrix hess;
    derivatives(x, t, grad, hess);
    // grad = t * (dObj + sum lambda_i dg_i) by construction
    return grad.lpNorm<Eigen::Infinity>() / t;
  }
};

int newton_minimize(const Barrier& problem, RealVector& x, double t,
                    double decrement_tol, int max_iter) {
  RealVector grad;
  RealMatrix hess;
  int iters = 0;
  for (; iters < max_iter; ++iters) {
    problem.derivatives(x, t, grad, hess);
    Eigen::LDLT<RealMatrix> ldlt(hess);
    RealVector dx = ldlt.solve(-grad);
    if (!dx.allFinite()) {
      hess.diagonal().array() += 1e-10 * hess.diagonal().maxCoeff();
      dx = Eigen::LDLT<RealMatrix>(hess).solve(-grad);
      if (!dx.allFinite()) break;
    }
    // one step of iterative refinement against barrier ill-conditioning
    dx += ldlt.solve(-grad - hess * dx);
    const double decrement2 = -grad.dot(dx);
    if (decrement2 / 2.0 <= decrement_tol) break;
    const double base = problem.value(x, t);
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      const RealVector cand = x + alpha * dx;
      const double val = problem.value(cand, t);
      if (val < base + 0.01 * alpha * grad.dot(dx)) {
        x = cand;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }
  return iters;
}

}  // namespace

SubproblemResult solve_subproblem(const SubproblemSpec& spec,
                                  const RealVector& init_p,
                                  const RealVector& init_f) {
  const SystemConfig& cfg = *spec.cfg;
  const ComputeModel& model = *spec.compute;
  const int K = static_cast<int>(spec.p0.size());
  const int nf = model.n_vars;
  SubproblemResult out;

  RealVector p_hat =
      (init_p / cfg.p_max).cwiseMax(1e-6).cwiseMin(1.0 - 1e-6);
  Barrier problem(spec, spec.p0 / cfg.p_max);

  // strictly feasible start: keep the supplied f if it is safely interior,
  // otherwise rebuild one from a compute split with margin
  RealVector x(K + nf);
  x.head(K) = p_hat;
  bool have_f = init_f.size() == nf;
  if (have_f) {
    x.tail(nf) = init_f / problem.f_scale;
    have_f = problem.in_domain(x);
  }
  if (!have_f) {
    // Repair a strictly interior start. The supplied powers may give too
    // little latency slack for any compute split, so probe a short ladder
    // of power candidates; at each one, split per-user compute demands at
    // decreasing latency margins. A larger margin gives a deeper interior
    // but demands more capacity, so back off toward the tight split when
    // budgets are scarce. Each split runs against caps shrunk in
    // proportion to the margin so saturated budgets stay strictly
    // interior without pricing out near-tight instances.
    bool placed = false, lp_any = false, any_slack = false;
    std::vector<RealVector> candidates = {p_hat};
    for (const double c : {0.5, 0.9, 0.99, 0.25, 0.05})
      candidates.push_back(RealVector::Constant(K, c));
    for (const RealVector& pc : candidates) {
      x.head(K) = pc;
      RealVector slack(K);
      bool slack_ok = true;
      for (int k = 0; k < K; ++k) {
        const double s = problem.se_bound(x, k);
        slack(k) = s > 0 ? 1.0 - problem.beta(k) / s : -1.0;
        if (slack(k) <= 1e-9) {
          slack_ok = false;
          break;
        }
      }
      if (!slack_ok) continue;
      any_slack = true;
      for (const double alpha : {0.25, 0.05, 0.01, 1e-3, 1e-4, 1e-5, 0.0}) {
        RealVector d(K);
        for (int k = 0; k < K; ++k)
          d(k) = spec.task_cycles(k) /
                 (spec.eff_budget(k) * slack(k) * (1.0 - alpha));
        ComputeModel shrunk = model;
        for (auto& b : shrunk.budgets) b.cap *= 1.0 - 0.1 * alpha;
        const LpResult lp = min_compute_lp(d, shrunk);
        if (!lp.feasible) continue;
        lp_any = true;
        RealVector f = lp.f_active.cwiseMax(2.0 * cfg.f_min);
        for (const auto& b : model.budgets) {
          double used = 0.0;
          for (int v : b.vars) used += f(v);
          const double residual = b.cap - used;
          if (residual > 0)
            for (int v : b.vars)
              f(v) += 0.5 * residual / static_cast<double>(b.vars.size());
        }
        x.tail(nf) = f / problem.f_scale;
        if (problem.in_domain(x)) {
          placed = true;
          break;
        }
      }
      if (placed) break;
    }
    if (!placed) {
      out.infeasible = true;
      out.status = !any_slack ? "latency infeasible at expansion point"
                   : lp_any   ? "no strictly feasible start"
                              : "compute budgets infeasible";
      return out;
    }
  }

  // barrier path: drive t until per-constraint complementarity 1/t is a
  // decade under the KKT tolerance
  const double t_final = 10.0 / cfg.kkt_tol;
  double t = 10.0;
  int total_newton = 0;
  for (;;) {
    total_newton += newton_minimize(problem, x, t, 1e-11, 400);
    if (t >= t_final) break;
    t = std::min(t * 5.0, t_final);
  }

  out.p = cfg.p_max * x.head(K);
  out.f_active = problem.f_scale * x.tail(nf);
  out.nu.resize(K);
  for (int k = 0; k < K; ++k) out.nu(k) = problem.se_bound(x, k);
  out.objective =
      spec.weight_power * out.p.sum() - spec.weight_se * out.nu.sum();
  out.newton_iters = total_newton;
  out.kkt_residual =
      std::max(problem.kkt_stationarity(x, t), 1.0 / t);
  out.solved = out.kkt_residual <= cfg.kkt_tol;
  out.status = out.solved ? "optimal" : "kkt tolerance not reached";
  return out;
}

namespace {

/// Ceil the active compute entries, then repair any budget overshoot by
/// unit decrements on the largest-fractional-slack entries.
RealVector round_compute(const RealVector& f_active,
                         const ComputeModel& model) {
  RealVector f = f_active.array().ceil();
  for (const auto& b : model.budgets) {
    double used = 0.0;
    for (int v : b.vars) used += f(v);
    if (used <= b.cap) continue;
    std::vector<int> order = b.vars;
    std::stable_sort(order.begin(), order.end(), [&](int a, int c) {
      return f(a) - f_active(a) > f(c) - f_active(c);
    });
    std::size_t i = 0;
    while (used > b.cap && i < order.size()) {
      f(order[i]) -= 1.0;
      used -= 1.0;
      ++i;
      if (i == order.size()) i = 0;  // keep decrementing round-robin
    }
  }
  return f;
}

}  // namespace

AllocationResult run_sca(const RealVector& init_p,
                         const ServingTopology& topology,
                         const ChannelEstimate& estimates,
                         const OffloadingDemand& demand,
                         const ComputeModel& compute,
                         const ObjectiveWeights& weights,
                         const SystemConfig& cfg) {
  const bool cellular = cfg.mode == NetworkMode::Cellular;
  const int K = topology.n_users;
  AllocationResult out;
  RealVector p = init_p;
  RealVector f;
  RealVector nu;

  for (int n = 0; n < cfg.sca_max_iter; ++n) {
    const CombinerSet combiners = cellular
                                      ? lmmse(estimates, topology, p, cfg)
                                      : pmmse(estimates, topology, p, cfg);
    const SinrCoefficients coeffs =
        sinr_coefficients(combiners, estimates, topology, cfg);

    SubproblemSpec spec;
    spec.se = se_affine(coeffs, cfg);
    spec.p0 = p;
    spec.weight_power = weights.power;
    spec.weight_se = weights.se;
    spec.task_bits = demand.bits;
    spec.task_cycles = demand.cycles;
    spec.eff_budget = demand.eff_budget;
    spec.compute = &compute;
    spec.cfg = &cfg;

    const SubproblemResult res = solve_subproblem(spec, p, f);
    if (res.infeasible || !res.solved) {
      if (n == 0) {
        out.status = res.infeasible ? "infeasible: " + res.status
                                    : "solver failure: " + res.status;
        return out;
      }
      out.status = "stopped early: " + res.status;
      break;
    }
    // once the remaining descent falls below solver accuracy a refreshed
    // combiner can push the surrogate a hair above the incumbent; stop on
    // the incumbent rather than record a non-improving step
    if (!out.objective_trace.empty() &&
        res.objective > out.objective_trace.back()) {
      out.converged = true;
      break;
    }
    out.objective_trace.push_back(res.objective);
    out.kkt_trace.push_back(res.kkt_residual);
    double change = 0.0;
    for (int k = 0; k < K; ++k)
      change = std::max(change,
                        std::abs(res.p(k) - p(k)) / std::max(p(k), 1e-300));
    out.power_change_trace.push_back(change);
    p = res.p;
    f = res.f_active;
    nu = res.nu;
    out.iterations = n + 1;
    if (change <= cfg.sca_power_tol) {
      out.converged = true;
      break;
    }
  }
  if (out.iterations == 0) {
    out.status = "no iterations completed";
    return out;
  }

  out.p = p;
  out.nu = nu;
  RealVector f_rounded = round_compute(f, compute);

  // validate the original constraints at the rounded point with true SE
  const CombinerSet combiners = cellular
                                    ? lmmse(estimates, topology, p, cfg)
                                    : pmmse(estimates, topology, p, cfg);
  const SinrCoefficients coeffs =
      sinr_coefficients(combiners, estimates, topology, cfg);
  const SeReport rep = evaluate_se(coeffs, p, cfg);
  out.se = rep.se;
  out.latency.resize(K);
  bool ok = (p.array() >= -1e-12).all() &&
            (p.array() <= cfg.p_max * (1 + 1e-9)).all();

  std::vector<double> used(compute.budgets.size(), 0.0);
  std::vector<int> budget_of(compute.n_vars, -1);
  for (std::size_t j = 0; j < compute.budgets.size(); ++j)
    for (int v : compute.budgets[j].vars) {
      used[j] += f_rounded(v);
      budget_of[v] = static_cast<int>(j);
    }
  const double budget =
      cellular ? cfg.latency_budget_cell : cfg.latency_budget;
  bool latency_ok = true;
  for (int k = 0; k < K; ++k) {
    LatencyBreakdown lb =
        latency_breakdown(demand.bits(k), demand.cycles(k), rep.se(k),
                          compute.user_total(f_rounded, k), cfg);
    if (lb.violated) {
      // integer rounding and the final combiner refresh can leave a hair
      // of latency violation; top the user up from leftover server
      // capacity in whole cycle units before declaring a rounding gap
      const double rem = budget - lb.transmission - lb.fronthaul;
      if (rem > 0) {
        double deficit = std::ceil(demand.cycles(k) / rem) -
                         compute.user_total(f_rounded, k);
        for (int v : compute.user_vars[k]) {
          if (deficit <= 0) break;
          const int j = budget_of[v];
          const double head = std::floor(compute.budgets[j].cap - used[j]);
          const double add = std::min(deficit, head);
          if (add > 0) {
            f_rounded(v) += add;
            used[j] += add;
            deficit -= add;
          }
        }
        lb = latency_breakdown(demand.bits(k), demand.cycles(k), rep.se(k),
                               compute.user_total(f_rounded, k), cfg);
      }
      if (lb.violated) latency_ok = false;
    }
    out.latency[k] = lb;
  }
  out.f_full = compute.to_full(f_rounded);
  for (const auto& b : compute.budgets) {
    double total = 0.0;
    for (int v : b.vars) total += f_rounded(v);
    if (total > b.cap + 1e-6) ok = false;
  }
  out.rounding_gap = !latency_ok;
  out.constraints_ok = ok && latency_ok;
  // an allocation that fails validation against the true constraints is
  // not usable, whatever the solver reported
  out.feasible = out.constraints_ok;
  if (out.status.empty())
    out.status = out.converged ? "converged" : "iteration limit";
  if (!out.constraints_ok) out.status += " (constraint check failed)";
  return out;
}

AllocationResult run_sca_cellular(const RealVector& init_p,
                                  const ServingTopology& topology,
                                  const ChannelEstimate& estimates,
                                  const OffloadingDemand& demand,
                                  const RealVector& f_bs,
                                  const ObjectiveWeights& weights,
                                  const SystemConfig& cfg) {
  const ComputeModel model = make_compute_model_cellular(topology, f_bs);
  return run_sca(init_p, topology, estimates, demand, model, weights, cfg);
}

AllocationResult run_sca_cran(const RealVector& init_p,
                              const ServingTopology& topology,
                              const ChannelEstimate& estimates,
                              const OffloadingDemand& demand,
                              const CranAssociation& assoc,
                              const RealVector& f_ap,
                              const ObjectiveWeights& weights,
                              const SystemConfig& cfg) {
  AllocationResult out;
  if (!assoc.feasible) {
    out.status = "infeasible: server association";
    return out;
  }
  const ComputeModel model =
      make_compute_model_cran(assoc, topology, f_ap, cfg.f_cpu);
  return run_sca(init_p, topology, estimates, demand, model, weights, cfg);
}

}  // namespace cfmec
