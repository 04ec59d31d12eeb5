#pragma once

// Small shared builders for the test suite: random isometries, filled Fermi
// seas and quenched states. Kept header-only; everything is tiny.

#include <Eigen/Dense>
#include <cstdint>

#include "monferm/gaussian_state.hpp"
#include "monferm/lattice.hpp"
#include "monferm/pm_protocol.hpp"
#include "monferm/random.hpp"

namespace testutil {

inline monferm::CMatrix random_complex(int rows, int cols, std::uint64_t seed) {
  monferm::RandomSource rng(seed);
  monferm::CMatrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = {rng.gaussian(), rng.gaussian()};
  return m;
}

inline monferm::StateCoefficients random_isometry(int L, int N, std::uint64_t seed) {
  monferm::CMatrix m = random_complex(L, N, seed);
  Eigen::HouseholderQR<monferm::CMatrix> qr(m);
  monferm::StateCoefficients s;
  s.U = qr.householderQ() * monferm::CMatrix::Identity(L, N);
  return s;
}

inline monferm::CMatrix random_unitary(int n, std::uint64_t seed) {
  return random_isometry(n, n, seed).U;
}

// N lowest single-particle orbitals; the caller picks (L, N) giving a closed
// shell so the projector is unambiguous.
inline monferm::StateCoefficients ground_state(const monferm::Hamiltonian& h, int N) {
  monferm::StateCoefficients s;
  s.U = h.eigenvectors().leftCols(N).cast<std::complex<double>>();
  return s;
}

// Neel state evolved unitarily for time t: generically entangled across any cut.
inline monferm::CorrelationMatrix quenched_state(const monferm::Hamiltonian& h,
                                                 double t) {
  using namespace monferm;
  const CorrelationMatrix d0 =
      correlation_from_coefficients(neel_state(h.size(), NeelConvention::occupied_odd));
  return propagate_unitary(d0, h, t);
}

inline std::shared_ptr<const monferm::Hamiltonian> clean_ring(int L, double J = 1.0) {
  monferm::LatticeSpec spec;
  spec.L = L;
  spec.J = J;
  return monferm::Hamiltonian::build(spec);
}

}  // namespace testutil
