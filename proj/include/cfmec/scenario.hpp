#pragma once

#include <vector>

#include "cfmec/config.hpp"
#include "cfmec/rng.hpp"
#include "cfmec/types.hpp"

namespace cfmec {

/// One user drop with its large-scale propagation state.
struct NetworkSnapshot {
  std::vector<Coord> ap_positions;
  std::vector<Coord> user_positions;
  RealMatrix beta;                           // L x K, linear gains
  std::vector<std::vector<Matrix>> corr;     // [l][k], M x M Hermitian PSD
  RealVector f_ap;                           // per-AP compute capacity, cycles/s
};

/// Square-root-of-L x square-root-of-L grid centered in the area.
std::vector<Coord> deploy_grid(const SystemConfig& cfg);

/// Minimum toroidal distance between two points in [0, side)^2.
double wrap_distance(const Coord& a, const Coord& b, double area_side);

std::vector<Coord> drop_users(const SystemConfig& cfg, Rng& rng);

/// Pure function of (config, master seed, snapshot index): grid, drop,
/// pathloss with shadowing, correlation matrices, per-AP compute draw.
NetworkSnapshot make_snapshot(const SystemConfig& cfg, int snapshot_index);

}  // namespace cfmec
