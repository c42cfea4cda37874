#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cfmec/combining.hpp"
#include "cfmec/estimation.hpp"
#include "cfmec/propagation.hpp"

using namespace cfmec;

namespace {

struct Fixture {
  SystemConfig cfg;
  NetworkSnapshot snap;
  ServingTopology topo;
  ChannelEstimate est;
  RealVector p;
};

Fixture make_fixture(std::uint64_t seed, int L = 3, int K = 4, int M = 2,
                     bool partial = true) {
  Fixture f;
  f.cfg.n_aps = L * L;  // keep validate() happy; rows below use L
  f.cfg.n_users = K;
  f.cfg.antennas_per_ap = M;
  f.cfg.tau_p = std::min(K, 5);

  f.snap.beta.resize(L, K);
  f.snap.corr.assign(L, std::vector<Matrix>(K));
  Rng rng(seed);
  for (int l = 0; l < L; ++l)
    for (int k = 0; k < K; ++k) {
      const double beta = std::pow(10.0, rng.uniform(-13.0, -11.0));
      f.snap.beta(l, k) = beta;
      AngularGeometry geom{rng.uniform(-M_PI, M_PI), rng.uniform(-0.5, -0.01)};
      f.snap.corr[l][k] = project_psd(
          local_scattering_corr(geom, beta, M, 0.5, 0.26, 0.26), beta);
    }

  f.topo.n_aps = L;
  f.topo.n_users = K;
  f.topo.pilot_of.resize(K);
  for (int k = 0; k < K; ++k) f.topo.pilot_of(k) = k % f.cfg.tau_p;
  f.topo.serves.assign(L, std::vector<char>(K, 1));
  if (partial) {
    // carve out a non-trivial cluster structure
    f.topo.serves[0][1] = 0;
    f.topo.serves[2][0] = 0;
    f.topo.serves[1][3] = 0;
  }
  f.topo.rebuild_derived();

  const CorrFactors fac = make_corr_factors(f.snap);
  Rng ch_rng(seed + 1), noise_rng(seed + 2);
  const ChannelRealization ch = draw_channels(fac, ch_rng);
  f.est = estimate_mmse(ch, f.topo, f.snap, noise_rng, f.cfg);

  f.p.resize(K);
  for (int k = 0; k < K; ++k) f.p(k) = rng.uniform(0.01, f.cfg.p_max);
  return f;
}

}  // namespace

TEST_CASE("subspace pmmse equals the dense masked oracle") {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    Fixture f = make_fixture(seed);
    const CombinerSet set = pmmse(f.est, f.topo, f.p, f.cfg);
    for (int k = 0; k < f.cfg.n_users; ++k) {
      const Vector dense = pmmse_dense(f.est, f.topo, f.p, f.cfg, k);
      const Vector expanded = expand_combiner(set, f.topo, k);
      CHECK((dense - expanded).norm() <= 1e-9 * std::max(dense.norm(), 1e-30));
    }
  }
}

TEST_CASE("combiner support respects the serving cluster") {
  Fixture f = make_fixture(9);
  const CombinerSet set = pmmse(f.est, f.topo, f.p, f.cfg);
  const Vector v0 = expand_combiner(set, f.topo, 0);
  // AP 2 does not serve user 0: its block must be zero
  CHECK(v0.segment(2 * f.cfg.antennas_per_ap, f.cfg.antennas_per_ap)
            .norm() == 0.0);
}

TEST_CASE("sinr split equals the direct quadratic-form evaluation") {
  Fixture f = make_fixture(21);
  const int K = f.cfg.n_users, M = f.cfg.antennas_per_ap;
  const CombinerSet set = pmmse(f.est, f.topo, f.p, f.cfg);
  const SinrCoefficients coeffs =
      sinr_coefficients(set, f.est, f.topo, f.cfg);
  const SeReport rep = evaluate_se(coeffs, f.p, f.cfg);

  for (int k = 0; k < K; ++k) {
    const Vector v = expand_combiner(set, f.topo, k);
    double den = f.cfg.noise_power * v.squaredNorm();
    for (int i = 0; i < K; ++i) {
      Vector hi = Vector::Zero(v.size());
      Matrix ci = Matrix::Zero(v.size(), v.size());
      for (int l : f.topo.serving_aps[k]) {
        hi.segment(l * M, M) = f.est.h_hat[l][i];
        ci.block(l * M, l * M, M, M) = f.est.err_cov[l][i];
      }
      if (i != k) den += f.p(i) * std::norm(v.dot(hi));
      den += f.p(i) * (v.adjoint() * ci * v).value().real();
    }
    Vector hk = Vector::Zero(v.size());
    for (int l : f.topo.serving_aps[k]) hk.segment(l * M, M) = f.est.h_hat[l][k];
    const double num = f.p(k) * std::norm(v.dot(hk));
    const double sinr_direct = num / den;
    CHECK(std::abs(rep.sinr(k) - sinr_direct) <= 1e-12 * sinr_direct);
    CHECK(rep.se(k) ==
          doctest::Approx(f.cfg.prelog() * std::log2(1 + sinr_direct))
              .epsilon(1e-12));
  }
}

TEST_CASE("numerator and denominator are affine in the powers") {
  Fixture f = make_fixture(33);
  const CombinerSet set = pmmse(f.est, f.topo, f.p, f.cfg);
  const SinrCoefficients coeffs =
      sinr_coefficients(set, f.est, f.topo, f.cfg);
  Rng rng(77);
  const int K = f.cfg.n_users;
  RealVector q1(K), q2(K);
  for (int k = 0; k < K; ++k) {
    q1(k) = rng.uniform(0.0, 0.1);
    q2(k) = rng.uniform(0.0, 0.1);
  }
  const SeReport a = evaluate_se(coeffs, q1, f.cfg);
  const SeReport b = evaluate_se(coeffs, q2, f.cfg);
  const SeReport mid = evaluate_se(coeffs, 0.5 * (q1 + q2), f.cfg);
  for (int k = 0; k < K; ++k) {
    CHECK(mid.den(k) ==
          doctest::Approx(0.5 * (a.den(k) + b.den(k))).epsilon(1e-12));
    CHECK(mid.num(k) + mid.den(k) ==
          doctest::Approx(0.5 * (a.num(k) + a.den(k) + b.num(k) + b.den(k)))
              .epsilon(1e-12));
  }
}

TEST_CASE("lmmse uses only the serving BS") {
  Fixture f = make_fixture(41, 3, 4, 2, false);
  // cellular-style topology: single serving AP per user
  for (auto& row : f.topo.serves) std::fill(row.begin(), row.end(), 0);
  f.topo.serves[0][0] = f.topo.serves[0][1] = 1;
  f.topo.serves[1][2] = 1;
  f.topo.serves[2][3] = 1;
  f.topo.rebuild_derived();
  const CombinerSet set = lmmse(f.est, f.topo, f.p, f.cfg);
  CHECK(set.cellular);
  for (int k = 0; k < 4; ++k)
    CHECK(set.v[k].size() == f.cfg.antennas_per_ap);
  const SinrCoefficients coeffs =
      sinr_coefficients(set, f.est, f.topo, f.cfg);
  const SeReport rep = evaluate_se(coeffs, f.p, f.cfg);
  CHECK((rep.se.array() > 0).all());
}

TEST_CASE("degenerate powers") {
  Fixture f = make_fixture(55);
  const CombinerSet set = pmmse(f.est, f.topo, f.p, f.cfg);
  const SinrCoefficients coeffs =
      sinr_coefficients(set, f.est, f.topo, f.cfg);
  RealVector zero = RealVector::Zero(f.cfg.n_users);
  const SeReport rep = evaluate_se(coeffs, zero, f.cfg);
  CHECK(rep.se.isZero());
  RealVector neg = f.p;
  neg(0) = -0.01;
  CHECK_THROWS_AS(evaluate_se(coeffs, neg, f.cfg), std::domain_error);
}
