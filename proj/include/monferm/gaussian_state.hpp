#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "monferm/random.hpp"

namespace monferm {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Numerical guards shared across the protocols.
inline constexpr double kTolHermitian = 1e-10;
inline constexpr double kTolIsometry = 1e-10;
inline constexpr double kTolPurity = 1e-6;       // per-event drift budget
inline constexpr double kTolPurityAbort = 1e-3;  // trajectory is discarded
inline constexpr double kTolBranch = 1e-12;      // forbidden-outcome cutoff

// Orbital coefficients U (L x N, orthonormal columns). The physical state is
// the Slater determinant built from the columns; any right-unitary mixing of
// the columns is gauge.
struct StateCoefficients {
  CMatrix U;

  int L() const { return static_cast<int>(U.rows()); }
  int N() const { return static_cast<int>(U.cols()); }
  // || U^dag U - 1 ||_max
  double isometry_residual() const;
};

// Two-point function D = U U^dag: Hermitian projector with trace N.
// diag(D) holds the site occupations.
struct CorrelationMatrix {
  CMatrix D;

  int L() const { return static_cast<int>(D.rows()); }
  double hermiticity_residual() const;
  // || D^2 - D ||_max
  double purity_residual() const;
  double trace_real() const { return D.trace().real(); }
};

enum class NeelConvention { occupied_odd, occupied_even };

// Product state with every second site filled; N = L/2. Sites are numbered
// from 1, so occupied_odd fills sites 1, 3, 5, ... (array offsets 0, 2, ...)
// giving occupations (1, 0, 1, 0, ...).
StateCoefficients neel_state(int L, NeelConvention conv = NeelConvention::occupied_odd);

CorrelationMatrix correlation_from_coefficients(const StateCoefficients& s);

// Restore an exact isometry from a near-projector D: take the N eigenvectors
// with the largest eigenvalues. Throws if the spectral gap around 1/2 is
// thinner than min_gap (occupations must have collapsed toward {0,1}).
StateCoefficients purify(const CorrelationMatrix& d, double min_gap = 1e-2);

// Eigenvalues of the sub-block D[sites, sites], each clamped to [0, 1].
Eigen::VectorXd subblock_eigenvalues(const CorrelationMatrix& d,
                                     const std::vector<int>& sites);

// Cholesky-QR re-orthonormalization: M <- M R^{-1} with R^dag R = M^dag M.
// Equivalent to the Q factor of a QR decomposition (same column space, upper
// triangular change of basis). One BLAS-3 rank update plus one triangular
// solve, which is what makes the large-L diffusive runs affordable.
struct OrthonormalizeReport {
  double gram_residual_pre = 0.0;   // || M^dag M - 1 ||_max before the pass
  double r_diag_min = 0.0;          // extreme diagonal magnitudes of R
  double r_diag_max = 0.0;
  double probe_residual_post = 0.0; // fixed-vector isometry probe afterwards
  bool second_pass = false;
};
OrthonormalizeReport cholqr_orthonormalize(CMatrix& m);

// --- trajectory checkpoints ------------------------------------------------

struct TrajectoryCheckpoint {
  StateCoefficients state;
  double t = 0.0;
  std::string rng_state;  // serialized RandomSource engine
};

// Binary format: magic 'MFCK', u32 version, u64 L, u64 N, f64 t,
// u64 rng byte count + bytes, then row-major complex<double> U.
// Little-endian throughout.
void save_checkpoint(const std::string& path, const TrajectoryCheckpoint& cp);
TrajectoryCheckpoint load_checkpoint(const std::string& path);

}  // namespace monferm
