#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "monferm/gaussian_state.hpp"

namespace monferm {

// Von Neumann entanglement entropy of the sites in `sites`, from the
// occupation spectrum of the reduced correlation matrix (natural log).
double entanglement_entropy(const CorrelationMatrix& d, const std::vector<int>& sites);

std::vector<int> contiguous_sites(int first, int count, int L);  // wraps around
std::vector<int> half_chain_sites(int L);                        // sites 0..L/2-1

// Connected density-density correlator averaged over the ring,
//   C(r) = -(1/L) sum_i |D_{i,i+r}|^2,   r = 1..L/2 (minimum image).
// Entry r-1 holds C(r). Always <= 0.
Eigen::VectorXd density_correlation(const CorrelationMatrix& d);

// C(0) without the trivial self term: mean of D_ii (1 - D_ii).
double density_self_correlation(const CorrelationMatrix& d);

// Entanglement estimate from the correlator, half chain:
//   (pi^2/3) [ (L/2) C(0) + sum_{r=1}^{L/2-1} 2 (L/2 - r) C(r) ]
// The signed double sum is the particle-number variance of the segment.
double cumulant_ee_estimate(const Eigen::VectorXd& c_of_r, double c0, int L);

// I2 = S(A) + S(B) - S(A u B) for disjoint site sets.
double mutual_information(const CorrelationMatrix& d, const std::vector<int>& a,
                          const std::vector<int>& b);

struct SnapshotOptions {
  bool correlations = true;
  bool cumulant = true;
  bool i2 = false;
  int i2_segment = 0;  // 0 -> L/4; antipodal segments [0, len) and [L/2, L/2+len)
};

struct ObservableSnapshot {
  double t = 0.0;
  double s_half = 0.0;
  Eigen::VectorXd c_of_r;  // empty unless requested
  double c0 = 0.0;
  std::optional<double> s_cumulant;
  std::optional<double> i2;
};

ObservableSnapshot take_snapshot(const CorrelationMatrix& d, double t,
                                 const SnapshotOptions& opt);

}  // namespace monferm
