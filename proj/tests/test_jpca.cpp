#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "cfmec/estimation.hpp"
#include "cfmec/harness.hpp"
#include "cfmec/jpca.hpp"
#include "cfmec/propagation.hpp"

using namespace cfmec;

namespace {

struct Fixture {
  SystemConfig cfg;
  NetworkSnapshot snap;
  ServingTopology topo;
  ChannelEstimate est;
  SinrCoefficients coeffs;
  RealVector p0;
};

Fixture make_fixture(std::uint64_t seed) {
  Fixture f;
  f.cfg.n_users = 4;
  f.cfg.n_aps = 9;
  f.cfg.antennas_per_ap = 2;
  f.snap = make_snapshot(f.cfg, static_cast<int>(seed % 5));
  f.topo = assign_pilots_dcc(f.snap, f.cfg);
  const CorrFactors fac = make_corr_factors(f.snap);
  Rng ch(seed), nz(seed + 1);
  const ChannelRealization chan = draw_channels(fac, ch);
  f.est = estimate_mmse(chan, f.topo, f.snap, nz, f.cfg);
  f.p0 = init_fractional_powers(f.snap, f.topo, f.cfg);
  const CombinerSet set = pmmse(f.est, f.topo, f.p0, f.cfg);
  f.coeffs = sinr_coefficients(set, f.est, f.topo, f.cfg);
  return f;
}

}  // namespace

TEST_CASE("lower bound is tangent, dominated and has the stated gradient") {
  Fixture f = make_fixture(7);
  const std::vector<SeAffine> se = se_affine(f.coeffs, f.cfg);
  const int K = f.cfg.n_users;
  Rng rng(3);

  for (int k = 0; k < K; ++k) {
    // tangency at the expansion point
    const double direct = se_value(se[k], f.p0);
    CHECK(se_lower_bound(se[k], f.p0, f.p0) ==
          doctest::Approx(direct).epsilon(1e-12));
    // expansion-point value agrees with the full SE report
    const SeReport rep = evaluate_se(f.coeffs, f.p0, f.cfg);
    CHECK(direct == doctest::Approx(rep.se(k)).epsilon(1e-12));

    for (int trial = 0; trial < 100; ++trial) {
      RealVector p(K);
      for (int i = 0; i < K; ++i) p(i) = rng.uniform(1e-4, f.cfg.p_max);
      // global dominance of the concave minorant
      const double bound = se_lower_bound(se[k], p, f.p0);
      const double value = se_value(se[k], p);
      CHECK(bound <= value + 1e-9 * std::max(1.0, std::abs(value)));

      // gradient by central differences
      RealVector grad;
      se_lower_bound(se[k], p, f.p0, &grad);
      for (int i = 0; i < K; ++i) {
        RealVector hi = p, lo = p;
        const double h = 1e-7 * f.cfg.p_max;
        hi(i) += h;
        lo(i) -= h;
        const double fd = (se_lower_bound(se[k], hi, f.p0) -
                           se_lower_bound(se[k], lo, f.p0)) /
                          (2 * h);
        CHECK(grad(i) ==
              doctest::Approx(fd).epsilon(1e-6).scale(std::abs(grad(i)) + 1));
      }
      // se_gradient matches finite differences of se_value
      const RealVector g2 = se_gradient(se[k], p);
      RealVector hi = p;
      hi(0) += 1e-7 * f.cfg.p_max;
      const double fd0 =
          (se_value(se[k], hi) - se_value(se[k], p)) / (1e-7 * f.cfg.p_max);
      CHECK(g2(0) == doctest::Approx(fd0).epsilon(1e-4));
    }
  }
}

TEST_CASE("single-user subproblem matches a grid-search oracle") {
  // synthetic single-user coefficients at a realistic scale
  SeAffine se;
  se.abar = RealVector::Constant(1, 2e-11);
  se.a = RealVector::Constant(1, 1e-12);
  se.cbar = se.c = 4e-13;
  SystemConfig cfg;
  cfg.n_users = 1;
  se.prelog = cfg.prelog();

  ServingTopology topo;
  topo.n_aps = 1;
  topo.n_users = 1;
  topo.pilot_of = IntVector::Zero(1);
  topo.serves = {{1}};
  topo.rebuild_derived();
  const double cap = 3e9;
  const ComputeModel model =
      make_compute_model_cellular(topo, RealVector::Constant(1, cap));

  SubproblemSpec spec;
  spec.se = {se};
  spec.p0 = RealVector::Constant(1, 0.05);
  spec.task_bits = RealVector::Constant(1, 2e6);
  spec.task_cycles = RealVector::Constant(1, 1e8);
  spec.eff_budget = RealVector::Constant(1, 0.1744);
  spec.compute = &model;
  spec.cfg = &cfg;

  // two regimes: power-dominated (constraint-active optimum) and
  // rate-dominated (interior optimum)
  const double se_weights[] = {0.00625, 0.2};
  for (double wse : se_weights) {
    spec.weight_power = 0.5;
    spec.weight_se = wse;
    const SubproblemResult res = solve_subproblem(
        spec, spec.p0, RealVector::Constant(1, 2e9));
    REQUIRE(res.solved);
    CHECK(res.status == "optimal");
    CHECK(res.kkt_residual <= cfg.kkt_tol);

    // exhaustive grid over the only free power variable; compute drops out
    // of the objective, so feasibility only needs some F <= cap to exist
    const int n_grid = 20000;
    double best_obj = std::numeric_limits<double>::infinity();
    double best_p = 0.0;
    for (int i = 1; i < n_grid; ++i) {
      const double p = cfg.p_max * i / n_grid;
      const RealVector pv = RealVector::Constant(1, p);
      const double s = se_lower_bound(se, pv, spec.p0);
      if (s <= 0) continue;
      const double slack =
          spec.eff_budget(0) - spec.task_bits(0) / (cfg.bandwidth * s);
      if (slack <= 0 || spec.task_cycles(0) / slack > cap) continue;
      const double obj = spec.weight_power * p - wse * s;
      if (obj < best_obj) {
        best_obj = obj;
        best_p = p;
      }
    }
    CHECK(std::abs(res.p(0) - best_p) <= 2e-3 * cfg.p_max);
    CHECK(res.objective <= best_obj + 1e-7);
    // the grid is coarser than the solver; allow its resolution error
    CHECK(best_obj - res.objective <= 1e-3 * cfg.p_max);
    // the reported nu equals the bound at the solution
    CHECK(res.nu(0) ==
          doctest::Approx(se_lower_bound(se, res.p, spec.p0)).epsilon(1e-9));
    // latency constraint holds at the solution
    const double s_star = res.nu(0);
    const double lat = spec.task_bits(0) / (cfg.bandwidth * s_star) +
                       spec.task_cycles(0) / res.f_active.sum();
    CHECK(lat <= spec.eff_budget(0) * (1 + 1e-6));
  }
}

TEST_CASE("subproblem reports latency infeasibility") {
  SeAffine se;
  se.abar = RealVector::Constant(1, 2e-11);
  se.a = RealVector::Constant(1, 1e-12);
  se.cbar = se.c = 4e-13;
  SystemConfig cfg;
  cfg.n_users = 1;
  se.prelog = cfg.prelog();
  ServingTopology topo;
  topo.n_aps = 1;
  topo.n_users = 1;
  topo.pilot_of = IntVector::Zero(1);
  topo.serves = {{1}};
  topo.rebuild_derived();
  const ComputeModel model =
      make_compute_model_cellular(topo, RealVector::Constant(1, 3e9));
  SubproblemSpec spec;
  spec.se = {se};
  spec.p0 = RealVector::Constant(1, 0.05);
  spec.task_bits = RealVector::Constant(1, 1e9);  // hopeless at B = 20 MHz
  spec.task_cycles = RealVector::Constant(1, 1e8);
  spec.eff_budget = RealVector::Constant(1, 0.1744);
  spec.compute = &model;
  spec.cfg = &cfg;
  spec.weight_power = 0.5;
  spec.weight_se = 0.00625;
  const SubproblemResult res =
      solve_subproblem(spec, spec.p0, RealVector());
  CHECK(res.infeasible);
  CHECK(res.status == "latency infeasible at expansion point");
}

TEST_CASE("sca run: monotone trace, tight kkt, valid rounded allocation") {
  Fixture f = make_fixture(11);
  Rng demand_rng(21);
  const OffloadingDemand demand = generate_demands(f.cfg, demand_rng);
  const ComputeModel model =
      make_compute_model_cellfree(f.topo, f.snap.f_ap, f.cfg.f_cpu);
  const PipelineResult pipe =
      accurate_pipeline(demand, model, f.est, f.topo, f.cfg, f.p0);
  REQUIRE(pipe.feasible);

  const SeReport rep0 = evaluate_se(f.coeffs, f.p0, f.cfg);
  const ObjectiveWeights weights = objective_weights(f.cfg, rep0.se);
  const AllocationResult res = run_sca(pipe.p0, f.topo, f.est, demand, model,
                                       weights, f.cfg);
  REQUIRE(res.feasible);
  CHECK(res.converged);
  CHECK(res.constraints_ok);
  CHECK(!res.rounding_gap);

  for (std::size_t i = 0; i + 1 < res.objective_trace.size(); ++i)
    CHECK(res.objective_trace[i + 1] <=
          res.objective_trace[i] +
              1e-8 * (1 + std::abs(res.objective_trace[i])));
  for (double kkt : res.kkt_trace) CHECK(kkt <= f.cfg.kkt_tol);
  CHECK(res.power_change_trace.back() <= f.cfg.sca_power_tol);

  // rounded compute: integral, on-support, inside budgets, above the floor
  const int K = f.cfg.n_users, L = f.cfg.n_aps;
  REQUIRE(res.f_full.size() == K + K * L);
  double cpu_used = 0.0;
  RealVector ap_used = RealVector::Zero(L);
  for (int k = 0; k < K; ++k) {
    double total = res.f_full(k);
    cpu_used += res.f_full(k);
    for (int l = 0; l < L; ++l) {
      const double v = res.f_full(K + k * L + l);
      CHECK(v == std::floor(v));
      CHECK(v >= 0.0);
      if (!f.topo.serves[l][k]) CHECK(v == 0.0);
      ap_used(l) += v;
      total += v;
    }
    CHECK(total >= f.cfg.f_min);
    CHECK(res.latency[k].total <= demand.budget(k) * (1 + 1e-9));
  }
  CHECK(cpu_used <= f.cfg.f_cpu + 1e-6);
  for (int l = 0; l < L; ++l) CHECK(ap_used(l) <= f.snap.f_ap(l) + 1e-6);

  // restarting from the solution moves essentially nowhere
  const AllocationResult again = run_sca(res.p, f.topo, f.est, demand, model,
                                         weights, f.cfg);
  REQUIRE(again.feasible);
  CHECK(again.iterations <= 2);
  for (int k = 0; k < K; ++k)
    CHECK(std::abs(again.p(k) - res.p(k)) <=
          2 * f.cfg.sca_power_tol * res.p(k));
}

TEST_CASE("cellular sca smoke") {
  SystemConfig cfg;
  cfg.n_users = 4;
  cfg.n_aps = 16;
  cfg.antennas_per_ap = 2;
  cfg.mode = NetworkMode::Cellular;
  cfg.validate();
  const SnapshotBundle bundle = make_bundle(cfg, 0);
  const CorrFactors fac = make_corr_factors(bundle.snapshot);
  Rng ch(5), nz(6), dr(7);
  const ChannelRealization chan = draw_channels(fac, ch);
  const ChannelEstimate est =
      estimate_mmse(chan, bundle.topology, bundle.snapshot, nz, cfg);
  const OffloadingDemand demand = generate_demands(cfg, dr);
  const RealVector p0 =
      init_fractional_powers(bundle.snapshot, bundle.topology, cfg);

  const CombinerSet set = lmmse(est, bundle.topology, p0, cfg);
  const SeReport rep0 = evaluate_se(
      sinr_coefficients(set, est, bundle.topology, cfg), p0, cfg);
  const ObjectiveWeights weights = objective_weights(cfg, rep0.se);
  const AllocationResult res = run_sca_cellular(
      p0, bundle.topology, est, demand, bundle.f_servers, weights, cfg);
  if (res.feasible) {
    CHECK(res.constraints_ok);
    for (double kkt : res.kkt_trace) CHECK(kkt <= cfg.kkt_tol);
  } else {
    CHECK(!res.status.empty());
  }
}

TEST_CASE("cran sca smoke") {
  Fixture f = make_fixture(17);
  f.cfg.mode = NetworkMode::Cran;
  Rng dr(9);
  const OffloadingDemand demand = generate_demands(f.cfg, dr);
  const SeReport rep0 = evaluate_se(f.coeffs, f.p0, f.cfg);
  const CranAssociation assoc =
      associate_cran(f.topo, demand, rep0.se, f.snap.f_ap, f.cfg);
  REQUIRE(assoc.feasible);
  const ObjectiveWeights weights = objective_weights(f.cfg, rep0.se);
  const AllocationResult res = run_sca_cran(
      f.p0, f.topo, f.est, demand, assoc, f.snap.f_ap, weights, f.cfg);
  REQUIRE(res.feasible);
  CHECK(res.constraints_ok);
  // single-server support: each user's compute sits on its assigned server
  const int K = f.cfg.n_users, L = f.cfg.n_aps;
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l)
      if (assoc.server_of[k] != l)
        CHECK(res.f_full(K + k * L + l) == 0.0);
    if (assoc.server_of[k] != -1) CHECK(res.f_full(k) == 0.0);
  }
}
