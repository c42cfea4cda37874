#include "cfmec/scenario.hpp"

#include <cmath>
#include <stdexcept>

#include "cfmec/propagation.hpp"

namespace cfmec {

std::vector<Coord> deploy_grid(const SystemConfig& cfg) {
  const int side_count =
      static_cast<int>(std::lround(std::sqrt(static_cast<double>(cfg.n_aps))));
  if (side_count * side_count != cfg.n_aps)
    throw ConfigError("grid deployment requires a perfect-square AP count");
  const double spacing = cfg.area_side / side_count;
  std::vector<Coord> pos;
  pos.reserve(cfg.n_aps);
  for (int iy = 0; iy < side_count; ++iy)
    for (int ix = 0; ix < side_count; ++ix)
      pos.push_back({(ix + 0.5) * spacing, (iy + 0.5) * spacing});
  return pos;
}

double wrap_distance(const Coord& a, const Coord& b, double area_side) {
  double dx = std::fabs(a.x - b.x);
  double dy = std::fabs(a.y - b.y);
  dx = std::min(dx, area_side - dx);
  dy = std::min(dy, area_side - dy);
  return std::hypot(dx, dy);
}

std::vector<Coord> drop_users(const SystemConfig& cfg, Rng& rng) {
  std::vector<Coord> pos;
  pos.reserve(cfg.n_users);
  for (int k = 0; k < cfg.n_users; ++k) {
    const double x = rng.uniform(0.0, cfg.area_side);
    const double y = rng.uniform(0.0, cfg.area_side);
    pos.push_back({x, y});
  }
  return pos;
}

NetworkSnapshot make_snapshot(const SystemConfig& cfg, int snapshot_index) {
  NetworkSnapshot snap;
  snap.ap_positions = deploy_grid(cfg);
  const auto idx = static_cast<std::uint64_t>(snapshot_index);
  Rng drop_rng(derive_stream(cfg.rng_seed, stream::kUserDrop, idx));
  snap.user_positions = drop_users(cfg, drop_rng);

  const int L = cfg.n_aps;
  const int K = cfg.n_users;
  const int M = cfg.antennas_per_ap;
  snap.beta.resize(L, K);
  snap.corr.assign(L, std::vector<Matrix>(K));

  Rng shadow_rng(derive_stream(cfg.rng_seed, stream::kShadowing, idx));
  const double dh = cfg.ap_height - cfg.user_height;
  for (int l = 0; l < L; ++l) {
    for (int k = 0; k < K; ++k) {
      double d2 = wrap_distance(snap.ap_positions[l], snap.user_positions[k],
                                cfg.area_side);
      d2 = std::max(d2, cfg.min_dist_2d);
      const double d3 = std::hypot(d2, dh);
      const double shadow_db = cfg.shadow_std_db * shadow_rng.normal();
      const double beta = pathloss_gain(d3, cfg.carrier_freq, shadow_db);
      snap.beta(l, k) = beta;
      const AngularGeometry geom =
          link_angles(snap.ap_positions[l], snap.user_positions[k], cfg);
      Matrix R = local_scattering_corr(geom, beta, M, cfg.antenna_spacing,
                                       cfg.asd_azimuth(), cfg.asd_elevation());
      snap.corr[l][k] = project_psd(R, beta);
    }
  }

  Rng compute_rng(derive_stream(cfg.rng_seed, stream::kApCompute, idx));
  snap.f_ap.resize(L);
  for (int l = 0; l < L; ++l) {
    // integer-valued cycles/s
    const auto lo = static_cast<std::int64_t>(cfg.f_ap_min);
    const auto hi = static_cast<std::int64_t>(cfg.f_ap_max);
    snap.f_ap(l) = static_cast<double>(compute_rng.uniform_int(lo, hi));
  }
  return snap;
}

}  // namespace cfmec
