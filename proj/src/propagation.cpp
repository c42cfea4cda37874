#include "cfmec/propagation.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace cfmec {

double pathloss_db(double d_3d, double carrier_freq) {
  if (d_3d <= 0) throw std::domain_error("pathloss: distance must be positive");
  const double fc_ghz = carrier_freq / 1e9;
  return 22.7 + 36.7 * std::log10(d_3d) + 26.0 * std::log10(fc_ghz);
}

double pathloss_gain(double d_3d, double carrier_freq, double shadow_db) {
  const double pl = pathloss_db(d_3d, carrier_freq);
  return std::pow(10.0, (-pl + shadow_db) / 10.0);
}

AngularGeometry link_angles(const Coord& ap, const Coord& user,
                            const SystemConfig& cfg) {
  // displacement to the nearest toroidal image; array along the x-axis
  double dx = user.x - ap.x;
  double dy = user.y - ap.y;
  const double s = cfg.area_side;
  if (dx > s / 2) dx -= s;
  if (dx < -s / 2) dx += s;
  if (dy > s / 2) dy -= s;
  if (dy < -s / 2) dy += s;
  double d2 = std::hypot(dx, dy);
  AngularGeometry geom;
  geom.azimuth = std::atan2(dy, dx);
  d2 = std::max(d2, cfg.min_dist_2d);
  geom.elevation = std::atan2(cfg.user_height - cfg.ap_height, d2);
  return geom;
}

Matrix local_scattering_corr(const AngularGeometry& geom, double beta, int M,
                             double spacing, double asd_azimuth,
                             double asd_elevation) {
  const double phi = geom.azimuth;
  const double theta = geom.elevation;
  const double sp = asd_azimuth;
  const double st = asd_elevation;
  Matrix R(M, M);
  for (int n = 0; n < M; ++n) {
    for (int m = 0; m < M; ++m) {
      const double d = (n - m) * spacing;
      const Complex A =
          beta * std::exp(Complex(0.0, 2.0 * M_PI * d * std::sin(phi) *
                                           std::cos(theta)));
      const double B = 2.0 * M_PI * d * std::cos(phi) * std::cos(theta);
      const double C = -2.0 * M_PI * d * std::cos(phi) * std::sin(theta);
      const double D = -2.0 * M_PI * d * std::sin(phi) * std::sin(theta);
      // sigma_tilde^2; reduces to sigma_phi^2 at zero spacing so the
      // diagonal equals beta exactly
      const double st2 = sp * sp / (1.0 + C * C * sp * sp * st * st);
      const double real_exp =
          D * D * st * st * (C * C * st * st * st2 - 1.0) / 2.0 -
          B * B * st2 / 2.0;
      const double imag_exp = -B * C * D * st * st * st2;
      R(n, m) = A * (std::sqrt(st2) / sp) * std::exp(real_exp) *
                std::exp(Complex(0.0, imag_exp));
    }
  }
  return R;
}

Matrix project_psd(const Matrix& R, double beta) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(R);
  RealVector ev = es.eigenvalues();
  bool clipped = false;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev(i) < 0) {
      ev(i) = 0;
      clipped = true;
    }
  }
  Matrix out;
  if (!clipped) {
    out = R;
  } else {
    out = es.eigenvectors() * ev.asDiagonal() *
          es.eigenvectors().adjoint();
  }
  const double tr = out.real().trace();
  const int M = static_cast<int>(R.rows());
  if (tr > 0) out *= (beta * M) / tr;
  // keep exact Hermitian symmetry
  out = (out + out.adjoint().eval()) / 2.0;
  return out;
}

Matrix psd_sqrt(const Matrix& R) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(R);
  RealVector ev = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
         es.eigenvectors().adjoint();
}

CorrFactors make_corr_factors(const NetworkSnapshot& snapshot) {
  CorrFactors fac;
  const auto L = snapshot.corr.size();
  fac.sqrt.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    fac.sqrt[l].reserve(snapshot.corr[l].size());
    for (const auto& R : snapshot.corr[l]) fac.sqrt[l].push_back(psd_sqrt(R));
  }
  return fac;
}

ChannelRealization draw_channels(const CorrFactors& factors, Rng& rng) {
  ChannelRealization ch;
  const auto L = factors.sqrt.size();
  ch.h.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    const auto K = factors.sqrt[l].size();
    ch.h[l].resize(K);
    for (std::size_t k = 0; k < K; ++k) {
      const auto M = factors.sqrt[l][k].rows();
      Vector z(M);
      for (Eigen::Index m = 0; m < M; ++m) z(m) = rng.cnormal();
      ch.h[l][k] = factors.sqrt[l][k] * z;
    }
  }
  return ch;
}

}  // namespace cfmec
