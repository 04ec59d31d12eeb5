#include "monferm/lattice.hpp"

#include <cmath>
#include <stdexcept>

#include "monferm/digest.hpp"

namespace monferm {

void LatticeSpec::validate() const {
  if (L < 4) throw std::invalid_argument("lattice.L must be >= 4");
  if (L % 2 != 0) throw std::invalid_argument("lattice.L must be even (half filling)");
  if (!(J > 0.0) || !std::isfinite(J))
    throw std::invalid_argument("lattice.J must be positive and finite");
  switch (potential.kind) {
    case PotentialKind::clean:
      break;
    case PotentialKind::box_disorder:
      if (potential.W < 0.0 || !std::isfinite(potential.W))
        throw std::invalid_argument("potential.W must be >= 0 and finite");
      break;
    case PotentialKind::quasiperiodic:
      if (!std::isfinite(potential.V) || !std::isfinite(potential.theta))
        throw std::invalid_argument("potential.V and potential.theta must be finite");
      // Incommensurate potential on a ring only closes up at Fibonacci sizes.
      if (!is_fibonacci(L))
        throw std::invalid_argument(
            "lattice.L must be Fibonacci for the quasiperiodic potential");
      break;
  }
}

bool is_fibonacci(long n) {
  long a = 1, b = 1;
  while (b < n) {
    long c = a + b;
    a = b;
    b = c;
  }
  return b == n || n == 1;
}

std::vector<long> fibonacci_sizes(long max_value) {
  std::vector<long> out;
  long a = 1, b = 1;
  while (b <= max_value) {
    out.push_back(b);
    long c = a + b;
    a = b;
    b = c;
  }
  return out;
}

std::shared_ptr<const Hamiltonian> Hamiltonian::build(const LatticeSpec& spec,
                                                      RandomSource& rng) {
  spec.validate();
  const int L = spec.L;
  auto h = std::shared_ptr<Hamiltonian>(new Hamiltonian());
  h->L_ = L;
  h->J_ = spec.J;
  h->V_ = Eigen::VectorXd::Zero(L);

  switch (spec.potential.kind) {
    case PotentialKind::clean:
      break;
    case PotentialKind::box_disorder: {
      const double W = spec.potential.W;
      for (int i = 0; i < L; ++i) h->V_(i) = -W + 2.0 * W * rng.uniform01();
      break;
    }
    case PotentialKind::quasiperiodic: {
      // V_i = V cos(2 pi i / tau + theta), tau the golden ratio, i from 1
      const double tau = 0.5 * (std::sqrt(5.0) + 1.0);
      const double twopi = 6.283185307179586476925286766559;
      for (int i = 0; i < L; ++i)
        h->V_(i) = spec.potential.V *
                   std::cos(twopi * static_cast<double>(i + 1) / tau + spec.potential.theta);
      break;
    }
  }

  h->H_ = Eigen::MatrixXd::Zero(L, L);
  for (int i = 0; i < L; ++i) {
    const int j = (i + 1) % L;
    h->H_(i, j) = spec.J;
    h->H_(j, i) = spec.J;
    h->H_(i, i) = h->V_(i);
  }
  return h;
}

std::shared_ptr<const Hamiltonian> Hamiltonian::build(const LatticeSpec& spec) {
  if (spec.potential.is_random())
    throw std::invalid_argument("box disorder needs a RandomSource");
  RandomSource dummy(0);
  return build(spec, dummy);
}

void Hamiltonian::ensure_eig() const {
  std::call_once(eig_flag_, [this] {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H_);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("Hamiltonian eigendecomposition failed");
    evals_ = es.eigenvalues();
    evecs_ = es.eigenvectors();
  });
}

const Eigen::VectorXd& Hamiltonian::eigenvalues() const {
  ensure_eig();
  return evals_;
}

const Eigen::MatrixXd& Hamiltonian::eigenvectors() const {
  ensure_eig();
  return evecs_;
}

std::string Hamiltonian::potential_digest() const {
  std::uint64_t h = fnv1a64(V_.data(), sizeof(double) * static_cast<std::size_t>(L_));
  return to_hex16(h);
}

}  // namespace monferm
