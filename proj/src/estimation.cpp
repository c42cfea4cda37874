#include "cfmec/estimation.hpp"

#include <Eigen/Cholesky>

namespace cfmec {

Matrix pilot_covariance(const NetworkSnapshot& snapshot,
                        const ServingTopology& topology,
                        const SystemConfig& cfg, int l, int k,
                        double pilot_power) {
  const int M = cfg.antennas_per_ap;
  Matrix psi = cfg.noise_power * Matrix::Identity(M, M);
  for (int j = 0; j < topology.n_users; ++j)
    if (topology.pilot_of(j) == topology.pilot_of(k))
      psi += cfg.tau_p * pilot_power * snapshot.corr[l][j];
  return psi;
}

ChannelEstimate estimate_mmse(const ChannelRealization& realization,
                              const ServingTopology& topology,
                              const NetworkSnapshot& snapshot, Rng& rng,
                              const SystemConfig& cfg) {
  const int L = topology.n_aps;
  const int K = topology.n_users;
  const int M = cfg.antennas_per_ap;
  const double pp = cfg.p_max;  // pilot power fixed at p_max
  const double scale = std::sqrt(cfg.tau_p * pp);

  ChannelEstimate est;
  est.pilot_power = pp;
  est.h_hat.assign(L, std::vector<Vector>(K));
  est.err_cov.assign(L, std::vector<Matrix>(K));

  for (int l = 0; l < L; ++l) {
    // pilot-projected observation per pilot index; noise covariance
    // sigma^2 I after projection onto an orthonormal pilot
    std::vector<Vector> y_pilot(cfg.tau_p, Vector::Zero(M));
    for (int t = 0; t < cfg.tau_p; ++t) {
      Vector noise(M);
      for (int m = 0; m < M; ++m)
        noise(m) = std::sqrt(cfg.noise_power) * rng.cnormal();
      y_pilot[t] = noise;
    }
    for (int j = 0; j < K; ++j)
      y_pilot[topology.pilot_of(j)] += scale * realization.h[l][j];

    // cache per pilot: Psi is shared by co-pilot users at the same AP
    std::vector<Eigen::LDLT<Matrix>> psi_solver(cfg.tau_p);
    std::vector<char> have(cfg.tau_p, 0);
    for (int k = 0; k < K; ++k) {
      const int t = topology.pilot_of(k);
      if (!have[t]) {
        psi_solver[t].compute(
            pilot_covariance(snapshot, topology, cfg, l, k, pp));
        have[t] = 1;
      }
      const Matrix& R = snapshot.corr[l][k];
      est.h_hat[l][k] = scale * R * psi_solver[t].solve(y_pilot[t]);
      est.err_cov[l][k] =
          R - cfg.tau_p * pp * R * psi_solver[t].solve(R);
      // symmetrize against roundoff
      est.err_cov[l][k] =
          (est.err_cov[l][k] + est.err_cov[l][k].adjoint().eval()) / 2.0;
    }
  }
  return est;
}

}  // namespace cfmec
