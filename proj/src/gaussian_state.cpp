#include "monferm/gaussian_state.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace monferm {

double StateCoefficients::isometry_residual() const {
  const int n = N();
  CMatrix g = U.adjoint() * U;
  g -= CMatrix::Identity(n, n);
  return g.cwiseAbs().maxCoeff();
}

double CorrelationMatrix::hermiticity_residual() const {
  return (D - D.adjoint()).cwiseAbs().maxCoeff();
}

double CorrelationMatrix::purity_residual() const {
  return (D * D - D).cwiseAbs().maxCoeff();
}

StateCoefficients neel_state(int L, NeelConvention conv) {
  if (L < 2 || L % 2 != 0) throw std::invalid_argument("neel_state: L must be even");
  const int N = L / 2;
  StateCoefficients s;
  s.U = CMatrix::Zero(L, N);
  // Sites are numbered from 1, so occupied_odd fills array offsets 0, 2, 4, ...
  const int offset = (conv == NeelConvention::occupied_odd) ? 0 : 1;
  for (int k = 0; k < N; ++k) s.U(2 * k + offset, k) = 1.0;
  return s;
}

CorrelationMatrix correlation_from_coefficients(const StateCoefficients& s) {
  CorrelationMatrix d;
  const int L = s.L();
  d.D.resize(L, L);
  d.D.setZero();
  d.D.selfadjointView<Eigen::Lower>().rankUpdate(s.U);
  d.D = d.D.selfadjointView<Eigen::Lower>();
  return d;
}

StateCoefficients purify(const CorrelationMatrix& d, double min_gap) {
  const int L = d.L();
  const int N = static_cast<int>(d.trace_real() + 0.5);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(d.D);
  if (es.info() != Eigen::Success) throw std::runtime_error("purify: eigensolver failed");
  // eigenvalues ascending; occupied orbitals are the top N
  const auto& ev = es.eigenvalues();
  const double gap = ev(L - N) - ev(L - N - 1);
  if (gap < min_gap)
    throw std::runtime_error("purify: occupation spectrum not separated (gap " +
                             std::to_string(gap) + ")");
  StateCoefficients s;
  s.U = es.eigenvectors().rightCols(N);
  return s;
}

Eigen::VectorXd subblock_eigenvalues(const CorrelationMatrix& d,
                                     const std::vector<int>& sites) {
  const int n = static_cast<int>(sites.size());
  const int L = d.L();
  for (int i : sites)
    if (i < 0 || i >= L) throw std::out_of_range("subblock_eigenvalues: site index");
  CMatrix block(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) block(a, b) = d.D(sites[a], sites[b]);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(block);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("subblock_eigenvalues: eigensolver failed");
  Eigen::VectorXd ev = es.eigenvalues();
  for (int i = 0; i < n; ++i) ev(i) = std::clamp(ev(i), 0.0, 1.0);
  return ev;
}

static void cholqr_pass(CMatrix& m, OrthonormalizeReport& rep, bool first) {
  const int n = static_cast<int>(m.cols());
  CMatrix g(n, n);
  g.setZero();
  g.selfadjointView<Eigen::Lower>().rankUpdate(m.adjoint());
  g = g.selfadjointView<Eigen::Lower>();
  if (first) rep.gram_residual_pre = (g - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
  Eigen::LLT<CMatrix> llt(g);
  if (llt.info() != Eigen::Success) {
    // Gram matrix lost positive definiteness; fall back to Householder QR
    Eigen::HouseholderQR<CMatrix> qr(m);
    m = qr.householderQ() * CMatrix::Identity(m.rows(), n);
    if (first) {
      rep.r_diag_min = 0.0;
      rep.r_diag_max = 0.0;
    }
    return;
  }
  const CMatrix lmat = llt.matrixL();
  if (first) {
    rep.r_diag_min = lmat.diagonal().real().minCoeff();
    rep.r_diag_max = lmat.diagonal().real().maxCoeff();
  }
  // M <- M R^{-1} with R = L^dag (upper triangular)
  lmat.adjoint().triangularView<Eigen::Upper>().solveInPlace<Eigen::OnTheRight>(m);
}

// cheap probe: apply U^dag U to a fixed vector, compare against identity
static double isometry_probe(const CMatrix& m) {
  const int n = static_cast<int>(m.cols());
  CVector probe = CVector::Ones(n) / std::sqrt(static_cast<double>(n));
  CVector image = m.adjoint() * (m * probe);
  return (image - probe).cwiseAbs().maxCoeff();
}

OrthonormalizeReport cholqr_orthonormalize(CMatrix& m) {
  OrthonormalizeReport rep;
  cholqr_pass(m, rep, true);
  rep.probe_residual_post = isometry_probe(m);
  if (rep.probe_residual_post > 1e-10) {
    cholqr_pass(m, rep, false);
    rep.second_pass = true;
    rep.probe_residual_post = isometry_probe(m);
  }
  return rep;
}

// --- checkpoints -----------------------------------------------------------

namespace {

constexpr std::uint32_t kCheckpointMagic = 0x4B43464Du;  // 'MFCK' little-endian
constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
void put(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const TrajectoryCheckpoint& cp) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("checkpoint: cannot open " + path);
  put(os, kCheckpointMagic);
  put(os, kCheckpointVersion);
  put(os, static_cast<std::uint64_t>(cp.state.L()));
  put(os, static_cast<std::uint64_t>(cp.state.N()));
  put(os, cp.t);
  put(os, static_cast<std::uint64_t>(cp.rng_state.size()));
  os.write(cp.rng_state.data(), static_cast<std::streamsize>(cp.rng_state.size()));
  // row-major so the layout is unambiguous regardless of Eigen defaults
  for (int i = 0; i < cp.state.L(); ++i)
    for (int j = 0; j < cp.state.N(); ++j) {
      const std::complex<double> z = cp.state.U(i, j);
      put(os, z.real());
      put(os, z.imag());
    }
  if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

TrajectoryCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
  if (get<std::uint32_t>(is) != kCheckpointMagic)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  const auto version = get<std::uint32_t>(is);
  if (version != kCheckpointVersion)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  const auto L = static_cast<int>(get<std::uint64_t>(is));
  const auto N = static_cast<int>(get<std::uint64_t>(is));
  if (L <= 0 || N <= 0 || N > L) throw std::runtime_error("checkpoint: bad dimensions");
  TrajectoryCheckpoint cp;
  cp.t = get<double>(is);
  const auto rng_len = get<std::uint64_t>(is);
  if (rng_len > (1u << 20)) throw std::runtime_error("checkpoint: oversized rng state");
  cp.rng_state.resize(rng_len);
  is.read(cp.rng_state.data(), static_cast<std::streamsize>(rng_len));
  if (!is) throw std::runtime_error("checkpoint: truncated rng state");
  cp.state.U.resize(L, N);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < N; ++j) {
      const double re = get<double>(is);
      const double im = get<double>(is);
      cp.state.U(i, j) = {re, im};
    }
  return cp;
}

}  // namespace monferm
