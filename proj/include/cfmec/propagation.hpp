#pragma once

#include <vector>

#include "cfmec/config.hpp"
#include "cfmec/rng.hpp"
#include "cfmec/scenario.hpp"
#include "cfmec/types.hpp"

namespace cfmec {

/// 3GPP UMi NLOS pathloss in dB: 22.7 + 36.7 log10(d[m]) + 26 log10(fc[GHz]).
double pathloss_db(double d_3d, double carrier_freq);

/// Linear large-scale gain including lognormal shadowing (shadow_db in dB).
double pathloss_gain(double d_3d, double carrier_freq, double shadow_db);

/// Nominal angles of one AP-user link under the wrap-around metric.
struct AngularGeometry {
  double azimuth = 0.0;    // radians
  double elevation = 0.0;  // radians
};
AngularGeometry link_angles(const Coord& ap, const Coord& user,
                            const SystemConfig& cfg);

/// Closed-form local-scattering spatial correlation matrix for a horizontal
/// ULA in 3D, valid for small ASDs. Diagonal equals beta exactly.
Matrix local_scattering_corr(const AngularGeometry& geom, double beta, int M,
                             double spacing, double asd_azimuth,
                             double asd_elevation);

/// Clips negative eigenvalues at zero and rescales so tr(R)/M = beta.
Matrix project_psd(const Matrix& R, double beta);

/// Hermitian square root factor F with F F^H = R (eigendecomposition based).
Matrix psd_sqrt(const Matrix& R);

/// Small-scale channel vectors h_lk ~ CN(0, R_lk), independent across links.
struct ChannelRealization {
  std::vector<std::vector<Vector>> h;  // [l][k], M-dim
};

/// Precomputed square-root factors for a snapshot's correlation matrices.
struct CorrFactors {
  std::vector<std::vector<Matrix>> sqrt;  // [l][k]
};
CorrFactors make_corr_factors(const NetworkSnapshot& snapshot);

ChannelRealization draw_channels(const CorrFactors& factors, Rng& rng);

}  // namespace cfmec
