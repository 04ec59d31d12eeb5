#pragma once

#include <Eigen/Dense>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "monferm/random.hpp"

namespace monferm {

enum class PotentialKind { clean, box_disorder, quasiperiodic };

struct PotentialSpec {
  PotentialKind kind = PotentialKind::clean;
  double W = 0.0;      // box disorder half-width, V_i uniform in [-W, W]
  double V = 0.0;      // quasiperiodic amplitude
  double theta = 0.0;  // quasiperiodic phase offset

  static PotentialSpec clean() { return {}; }
  static PotentialSpec box(double W) {
    PotentialSpec p;
    p.kind = PotentialKind::box_disorder;
    p.W = W;
    return p;
  }
  static PotentialSpec quasiperiodic(double V, double theta = 0.0) {
    PotentialSpec p;
    p.kind = PotentialKind::quasiperiodic;
    p.V = V;
    p.theta = theta;
    return p;
  }

  bool is_random() const { return kind == PotentialKind::box_disorder && W > 0.0; }
};

struct LatticeSpec {
  int L = 0;       // sites, even, periodic ring
  double J = 1.0;  // hopping amplitude
  PotentialSpec potential;

  int n_particles() const { return L / 2; }  // half filling
  void validate() const;                     // throws std::invalid_argument
};

// Fibonacci system sizes approximate the quasiperiodic modulation best
// (golden-ratio continued-fraction convergents).
bool is_fibonacci(long n);
std::vector<long> fibonacci_sizes(long max_value);

// Single-particle Hamiltonian on the ring: hopping J on nearest-neighbour
// bonds plus the on-site potential. Real symmetric, stored dense. The
// eigendecomposition is computed on first use and cached; trajectories
// sharing a disorder realization share one instance.
class Hamiltonian {
 public:
  // rng is only consumed for box disorder (L draws, sites in order)
  static std::shared_ptr<const Hamiltonian> build(const LatticeSpec& spec,
                                                  RandomSource& rng);
  static std::shared_ptr<const Hamiltonian> build(const LatticeSpec& spec);

  int size() const { return L_; }
  double J() const { return J_; }
  const Eigen::MatrixXd& matrix() const { return H_; }
  const Eigen::VectorXd& site_potential() const { return V_; }

  const Eigen::VectorXd& eigenvalues() const;
  const Eigen::MatrixXd& eigenvectors() const;  // columns, orthonormal

  // FNV-1a over the potential bytes; identifies a realization in outputs
  std::string potential_digest() const;

 private:
  Hamiltonian() = default;
  void ensure_eig() const;

  int L_ = 0;
  double J_ = 0.0;
  Eigen::MatrixXd H_;
  Eigen::VectorXd V_;
  mutable std::once_flag eig_flag_;
  mutable Eigen::VectorXd evals_;
  mutable Eigen::MatrixXd evecs_;
};

}  // namespace monferm
