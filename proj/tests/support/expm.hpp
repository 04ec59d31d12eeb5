#pragma once

// Dense matrix exponential by scaling-and-squaring with a Taylor series.
// Test oracle only: slow but independent of the eigenbasis shortcuts used in
// the library proper.

#include <Eigen/Dense>
#include <cmath>
#include <complex>

namespace oracle {

inline Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a) {
  const int n = static_cast<int>(a.rows());
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();  // inf norm
  int s = 0;
  if (norm > 0.5) s = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Eigen::MatrixXcd b = a / std::pow(2.0, s);
  Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(n, n);
  Eigen::MatrixXcd sum = term;
  for (int k = 1; k <= 40; ++k) {
    term = (term * b) / static_cast<double>(k);
    sum += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  for (int k = 0; k < s; ++k) sum = sum * sum;
  return sum;
}

}  // namespace oracle
