#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cfmec/scenario.hpp"

using namespace cfmec;

namespace {

// brute-force toroidal distance over the 9 wrap images
double nine_image_distance(const Coord& a, const Coord& b, double side) {
  double best = 1e300;
  for (int ix = -1; ix <= 1; ++ix)
    for (int iy = -1; iy <= 1; ++iy) {
      const double dx = a.x - (b.x + ix * side);
      const double dy = a.y - (b.y + iy * side);
      best = std::min(best, std::hypot(dx, dy));
    }
  return best;
}

}  // namespace

TEST_CASE("grid deployment centers APs in equal cells") {
  SystemConfig cfg;
  const auto pos = deploy_grid(cfg);
  REQUIRE(pos.size() == 25);
  CHECK(pos[0].x == doctest::Approx(100.0));
  CHECK(pos[0].y == doctest::Approx(100.0));
  CHECK(pos[24].x == doctest::Approx(900.0));
  CHECK(pos[24].y == doctest::Approx(900.0));
  cfg.n_aps = 24;
  CHECK_THROWS_AS(deploy_grid(cfg), ConfigError);
}

TEST_CASE("wrap distance equals nine-image oracle") {
  Rng rng(7);
  for (int i = 0; i < 500; ++i) {
    const Coord a{rng.uniform(0.0, 1000.0), rng.uniform(0.0, 1000.0)};
    const Coord b{rng.uniform(0.0, 1000.0), rng.uniform(0.0, 1000.0)};
    CHECK(wrap_distance(a, b, 1000.0) ==
          doctest::Approx(nine_image_distance(a, b, 1000.0)).epsilon(1e-12));
  }
  // wrap shrinks corner-to-corner to a short hop
  CHECK(wrap_distance({1.0, 1.0}, {999.0, 999.0}, 1000.0) ==
        doctest::Approx(std::hypot(2.0, 2.0)));
}

TEST_CASE("user drops are uniform in the box") {
  SystemConfig cfg;
  cfg.n_users = 20000;
  Rng rng(3);
  const auto pos = drop_users(cfg, rng);
  double mx = 0.0, my = 0.0;
  for (const auto& p : pos) {
    CHECK(p.x >= 0.0);
    CHECK(p.x < cfg.area_side);
    CHECK(p.y >= 0.0);
    CHECK(p.y < cfg.area_side);
    mx += p.x;
    my += p.y;
  }
  // law of large numbers: mean within ~5 sigma of side/2
  const double tol = 5.0 * cfg.area_side / std::sqrt(12.0 * pos.size());
  CHECK(std::abs(mx / pos.size() - 500.0) < tol);
  CHECK(std::abs(my / pos.size() - 500.0) < tol);
}

TEST_CASE("snapshots are deterministic and seed-sensitive") {
  SystemConfig cfg;
  const NetworkSnapshot a = make_snapshot(cfg, 0);
  const NetworkSnapshot b = make_snapshot(cfg, 0);
  CHECK(a.beta == b.beta);
  CHECK(a.user_positions[0].x == b.user_positions[0].x);
  const NetworkSnapshot c = make_snapshot(cfg, 1);
  CHECK(a.beta != c.beta);
  SystemConfig other = cfg;
  other.rng_seed = 2;
  const NetworkSnapshot d = make_snapshot(other, 0);
  CHECK(a.beta != d.beta);
}

TEST_CASE("snapshot invariants") {
  SystemConfig cfg;
  const NetworkSnapshot snap = make_snapshot(cfg, 0);
  REQUIRE(snap.beta.rows() == cfg.n_aps);
  REQUIRE(snap.beta.cols() == cfg.n_users);
  CHECK((snap.beta.array() > 0).all());
  for (int l = 0; l < cfg.n_aps; ++l)
    for (int k = 0; k < cfg.n_users; ++k) {
      const Matrix& R = snap.corr[l][k];
      REQUIRE(R.rows() == cfg.antennas_per_ap);
      // normalization: trace equals M * beta
      CHECK(R.real().trace() ==
            doctest::Approx(cfg.antennas_per_ap * snap.beta(l, k))
                .epsilon(1e-9));
    }
  for (int l = 0; l < cfg.n_aps; ++l) {
    CHECK(snap.f_ap(l) >= cfg.f_ap_min);
    CHECK(snap.f_ap(l) <= cfg.f_ap_max);
    CHECK(snap.f_ap(l) == std::floor(snap.f_ap(l)));  // integer cycles/s
  }
}

TEST_CASE("ap compute draws cover the configured range") {
  SystemConfig cfg;
  cfg.n_aps = 100;
  double lo = 1e300, hi = 0.0;
  for (int s = 0; s < 20; ++s) {
    const NetworkSnapshot snap = make_snapshot(cfg, s);
    lo = std::min(lo, snap.f_ap.minCoeff());
    hi = std::max(hi, snap.f_ap.maxCoeff());
  }
  CHECK(lo < 2.2e9);
  CHECK(hi > 3.8e9);
}
