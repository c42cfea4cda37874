#include "cfmec/combining.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace cfmec {

namespace {

/// Stacks hhat_i restricted to user k's serving blocks (D_k applied).
Vector restrict_estimate(const ChannelEstimate& est,
                         const ServingTopology& topo, int k, int i, int M) {
  const auto& aps = topo.serving_aps[k];
  Vector out(static_cast<Eigen::Index>(aps.size()) * M);
  for (std::size_t b = 0; b < aps.size(); ++b)
    out.segment(static_cast<Eigen::Index>(b) * M, M) = est.h_hat[aps[b]][i];
  return out;
}

}  // namespace

CombinerSet pmmse(const ChannelEstimate& estimates,
                  const ServingTopology& topology, const RealVector& p,
                  const SystemConfig& cfg) {
  const int K = topology.n_users;
  const int M = cfg.antennas_per_ap;
  CombinerSet set;
  set.built_at_powers = p;
  set.v.resize(K);
  for (int k = 0; k < K; ++k) {
    const auto& aps = topology.serving_aps[k];
    const Eigen::Index n = static_cast<Eigen::Index>(aps.size()) * M;
    Matrix A = cfg.noise_power * Matrix::Identity(n, n);
    for (int i : topology.partial_set[k]) {
      const Vector hi = restrict_estimate(estimates, topology, k, i, M);
      A.noalias() += p(i) * hi * hi.adjoint();
      for (std::size_t b = 0; b < aps.size(); ++b)
        A.block(static_cast<Eigen::Index>(b) * M,
                static_cast<Eigen::Index>(b) * M, M, M) +=
            p(i) * estimates.err_cov[aps[b]][i];
    }
    const Vector hk = restrict_estimate(estimates, topology, k, k, M);
    set.v[k] = p(k) * Eigen::LDLT<Matrix>(A).solve(hk);
  }
  return set;
}

CombinerSet lmmse(const ChannelEstimate& estimates,
                  const ServingTopology& topology, const RealVector& p,
                  const SystemConfig& cfg) {
  const int K = topology.n_users;
  const int M = cfg.antennas_per_ap;
  CombinerSet set;
  set.cellular = true;
  set.built_at_powers = p;
  set.v.resize(K);
  for (int k = 0; k < K; ++k) {
    const int l = topology.serving_aps[k].at(0);
    Matrix A = cfg.noise_power * Matrix::Identity(M, M);
    for (int i = 0; i < K; ++i) {
      A.noalias() +=
          p(i) * estimates.h_hat[l][i] * estimates.h_hat[l][i].adjoint();
      A += p(i) * estimates.err_cov[l][i];
    }
    set.v[k] = p(k) * Eigen::LDLT<Matrix>(A).solve(estimates.h_hat[l][k]);
  }
  return set;
}

Vector pmmse_dense(const ChannelEstimate& estimates,
                   const ServingTopology& topology, const RealVector& p,
                   const SystemConfig& cfg, int k) {
  const int L = topology.n_aps;
  const int M = cfg.antennas_per_ap;
  const Eigen::Index n = static_cast<Eigen::Index>(L) * M;
  auto stack_masked = [&](int i) {
    Vector out = Vector::Zero(n);
    for (int l : topology.serving_aps[k])
      out.segment(static_cast<Eigen::Index>(l) * M, M) = estimates.h_hat[l][i];
    return out;
  };
  Matrix A = cfg.noise_power * Matrix::Identity(n, n);
  for (int i : topology.partial_set[k]) {
    const Vector hi = stack_masked(i);
    A.noalias() += p(i) * hi * hi.adjoint();
    for (int l : topology.serving_aps[k])
      A.block(static_cast<Eigen::Index>(l) * M,
              static_cast<Eigen::Index>(l) * M, M, M) +=
          p(i) * estimates.err_cov[l][i];
  }
  return p(k) * Eigen::LDLT<Matrix>(A).solve(stack_masked(k));
}

Vector expand_combiner(const CombinerSet& combiners,
                       const ServingTopology& topology, int k) {
  const int M = static_cast<int>(combiners.v[k].size() /
                                 std::max<std::size_t>(
                                     topology.serving_aps[k].size(), 1));
  Vector out = Vector::Zero(
      static_cast<Eigen::Index>(topology.n_aps) * M);
  const auto& aps = topology.serving_aps[k];
  for (std::size_t b = 0; b < aps.size(); ++b)
    out.segment(static_cast<Eigen::Index>(aps[b]) * M, M) =
        combiners.v[k].segment(static_cast<Eigen::Index>(b) * M, M);
  return out;
}

SinrCoefficients sinr_coefficients(const CombinerSet& combiners,
                                   const ChannelEstimate& estimates,
                                   const ServingTopology& topology,
                                   const SystemConfig& cfg) {
  const int K = topology.n_users;
  const int M = cfg.antennas_per_ap;
  SinrCoefficients out;
  out.g.resize(K, K);
  out.c.resize(K, K);
  out.u.resize(K);
  for (int k = 0; k < K; ++k) {
    const Vector& v = combiners.v[k];
    out.u(k) = v.squaredNorm();
    if (combiners.cellular) {
      const int l = topology.serving_aps[k].at(0);
      for (int i = 0; i < K; ++i) {
        out.g(k, i) = std::norm(v.dot(estimates.h_hat[l][i]));
        out.c(k, i) =
            (v.adjoint() * estimates.err_cov[l][i] * v).value().real();
      }
    } else {
      const auto& aps = topology.serving_aps[k];
      for (int i = 0; i < K; ++i) {
        Complex inner = 0.0;
        double quad = 0.0;
        for (std::size_t b = 0; b < aps.size(); ++b) {
          const auto vb = v.segment(static_cast<Eigen::Index>(b) * M, M);
          inner += vb.dot(estimates.h_hat[aps[b]][i]);
          quad += (vb.adjoint() * estimates.err_cov[aps[b]][i] * vb)
                      .value()
                      .real();
        }
        out.g(k, i) = std::norm(inner);
        out.c(k, i) = quad;
      }
    }
  }
  return out;
}

SeReport evaluate_se(const SinrCoefficients& coeffs, const RealVector& p,
                     const SystemConfig& cfg) {
  if ((p.array() < 0).any())
    throw std::domain_error("evaluate_se: negative power");
  const int K = static_cast<int>(p.size());
  SeReport rep;
  rep.sinr.resize(K);
  rep.se.resize(K);
  rep.num.resize(K);
  rep.den.resize(K);
  const double prelog = cfg.prelog();
  for (int k = 0; k < K; ++k) {
    double num = p(k) * coeffs.g(k, k);
    double den = cfg.noise_power * coeffs.u(k);
    for (int i = 0; i < K; ++i) {
      if (i != k) den += p(i) * coeffs.g(k, i);
      den += p(i) * coeffs.c(k, i);
    }
    rep.num(k) = num;
    rep.den(k) = den;
    rep.sinr(k) = (num > 0 && den > 0) ? num / den : 0.0;
    rep.se(k) = prelog * std::log2(1.0 + rep.sinr(k));
  }
  return rep;
}

}  // namespace cfmec
