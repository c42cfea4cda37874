#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace cfmec {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using IntVector = Eigen::VectorXi;

struct Coord {
  double x = 0.0;
  double y = 0.0;
};

}  // namespace cfmec
