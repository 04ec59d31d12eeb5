#include "monferm/pm_protocol.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

namespace monferm {

using std::complex;

void PmParams::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma))
    throw std::invalid_argument("pm.gamma must be >= 0 and finite");
  if (!(t_max > 0.0) || !std::isfinite(t_max))
    throw std::invalid_argument("pm.t_max must be positive and finite");
  double prev = 0.0;
  for (double t : record_times) {
    if (!(t >= 0.0) || t > t_max)
      throw std::invalid_argument("pm.record_times must lie in [0, t_max]");
    if (t < prev) throw std::invalid_argument("pm.record_times must be ascending");
    prev = t;
  }
}

double sample_waiting_time(double gamma, int n_particles, RandomSource& rng) {
  const double eta = rng.uniform_open_closed();
  const double rate = gamma * static_cast<double>(n_particles);
  if (rate <= 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(eta) / rate;
}

static CVector phase_vector(const Eigen::VectorXd& eps, double t) {
  const int L = static_cast<int>(eps.size());
  CVector p(L);
  for (int k = 0; k < L; ++k) {
    const double a = eps(k) * t;
    p(k) = complex<double>(std::cos(a), -std::sin(a));
  }
  return p;
}

CorrelationMatrix propagate_unitary(const CorrelationMatrix& d, const Hamiltonian& h,
                                    double t) {
  const CVector p = phase_vector(h.eigenvalues(), t);
  const CMatrix m = h.eigenvectors() * p.asDiagonal();
  const CMatrix w = m * h.eigenvectors().transpose();
  CorrelationMatrix out;
  out.D.noalias() = w * d.D * w.adjoint();
  return out;
}

// Born-sampled occupation measurement on the correlation matrix. Wick's
// theorem gives the collapsed two-point function in closed form:
//   outcome 1: D' = D - (De_j)(e_j^T D)/D_jj,  then row/col j := e_j
//   outcome 0: D' = D + (De_j)(e_j^T D)/(1-D_jj), then row/col j := 0
std::pair<CorrelationMatrix, int> project_site(const CorrelationMatrix& d, int site,
                                               RandomSource& rng) {
  const int L = d.L();
  if (site < 0 || site >= L) throw std::out_of_range("project_site: site index");
  const double pc = rng.uniform01();
  const double njj = d.D(site, site).real();
  int outcome = (njj >= pc) ? 1 : 0;
  if (outcome == 1 && njj < kTolBranch) outcome = 0;
  if (outcome == 0 && 1.0 - njj < kTolBranch) outcome = 1;

  CorrelationMatrix out;
  out.D = d.D;
  const CVector col = d.D.col(site);
  const Eigen::RowVectorXcd row = d.D.row(site);
  if (outcome == 1) {
    out.D.noalias() -= col * row / njj;
  } else {
    out.D.noalias() += col * row / (1.0 - njj);
  }
  out.D.row(site).setZero();
  out.D.col(site).setZero();
  out.D(site, site) = outcome ? 1.0 : 0.0;
  // the rank-1 update is Hermitian in exact arithmetic; fold roundoff back
  out.D = 0.5 * (out.D + out.D.adjoint()).eval();
  return {out, outcome};
}

namespace {

// Baseline engine: carries D itself and re-purifies after every event.
class CorrelationEngine {
 public:
  explicit CorrelationEngine(std::shared_ptr<const Hamiltonian> h)
      : h_(std::move(h)), d_(correlation_from_coefficients(
                              neel_state(h_->size(), NeelConvention::occupied_odd))) {}

  void advance(double dt) {
    if (dt == 0.0) return;
    d_ = propagate_unitary(d_, *h_, dt);
  }

  void measure(int site, RandomSource& rng, TrajectoryDiagnostics& diag) {
    auto [next, outcome] = project_site(d_, site, rng);
    (void)outcome;
    const double purity = next.purity_residual();
    diag.max_purity_residual = std::max(diag.max_purity_residual, purity);
    StateCoefficients u = purify(next);
    diag.max_isometry_residual =
        std::max(diag.max_isometry_residual, u.isometry_residual());
    d_ = correlation_from_coefficients(u);
  }

  ObservableSnapshot snapshot(double t, const SnapshotOptions& opt,
                              TrajectoryDiagnostics& diag) const {
    diag.max_purity_residual =
        std::max(diag.max_purity_residual, d_.purity_residual());
    return take_snapshot(d_, t, opt);
  }

 private:
  std::shared_ptr<const Hamiltonian> h_;
  CorrelationMatrix d_;
};

// Fast engine: orbital coefficients in the Hamiltonian eigenbasis. Free
// propagation is a phase bookkeeping update; a measurement event costs one
// row extraction, one Householder rotation of the orbitals and an O(L)
// column replacement. Algebraically identical to the baseline (the rotation
// only mixes orbitals, a gauge transformation; the replaced column is the
// exact collapsed orbital), and it consumes the random stream in the same
// order, so trajectories agree draw for draw.
class OrbitalEngine {
 public:
  explicit OrbitalEngine(std::shared_ptr<const Hamiltonian> h)
      : h_(std::move(h)), t_(0.0) {
    const int L = h_->size();
    const StateCoefficients neel = neel_state(L, NeelConvention::occupied_odd);
    // B = Phi^T U(0); real initial state, complex storage for later
    b_ = (h_->eigenvectors().transpose() * neel.U.real()).cast<complex<double>>();
    phic_ = h_->eigenvectors().cast<complex<double>>();
  }

  void advance(double dt) { t_ += dt; }

  void measure(int site, RandomSource& rng, TrajectoryDiagnostics& diag) {
    const double pc = rng.uniform01();
    const int L = h_->size();
    const CVector p = phase_vector(h_->eigenvalues(), t_);
    // w_k = Phi_{site,k} p_k ; physical row j of U is w^T B
    CVector w(L);
    for (int k = 0; k < L; ++k) w(k) = h_->eigenvectors()(site, k) * p(k);
    Eigen::RowVectorXcd r = w.transpose() * b_;
    const double njj = r.squaredNorm();

    int outcome = (njj >= pc) ? 1 : 0;
    if (outcome == 1 && njj < kTolBranch) outcome = 0;
    if (outcome == 0 && 1.0 - njj < kTolBranch) outcome = 1;

    // Householder V (Hermitian, unitary) with r V = beta e_1^T
    complex<double> beta = 0.0;
    if (njj > 0.0) {
      CVector v = r.adjoint();
      const double vnorm = std::sqrt(njj);
      const complex<double> v0 = v(0);
      const complex<double> sign =
          (std::abs(v0) > 0.0) ? v0 / std::abs(v0) : complex<double>(1.0, 0.0);
      const complex<double> mu = -sign * vnorm;
      v(0) -= mu;
      const double wn2 = v.squaredNorm();
      if (wn2 > 0.0) {
        const CVector bv = b_ * v;
        b_.noalias() -= (2.0 / wn2) * bv * v.adjoint();
      }
      beta = std::conj(mu);
    }

    // column 1 in the eigenbasis representation of the collapsed orbital;
    // conj(p) ⊙ Phi_{site,:} is e_site pulled back through the propagator
    CVector esite(L);
    for (int k = 0; k < L; ++k) esite(k) = h_->eigenvectors()(site, k) * std::conj(p(k));
    if (outcome == 1) {
      b_.col(0) = esite;
    } else {
      const double denom = std::sqrt(std::max(1.0 - std::abs(beta) * std::abs(beta),
                                              kTolBranch));
      b_.col(0) = (b_.col(0) - beta * esite) / denom;
    }

    if (++events_since_qr_ >= 4096) {
      events_since_qr_ = 0;
      const OrthonormalizeReport rep = cholqr_orthonormalize(b_);
      diag.max_isometry_residual =
          std::max(diag.max_isometry_residual, rep.gram_residual_pre);
    }
  }

  ObservableSnapshot snapshot(double t, const SnapshotOptions& opt,
                              TrajectoryDiagnostics& diag) const {
    const StateCoefficients s = physical_state();
    diag.max_isometry_residual =
        std::max(diag.max_isometry_residual, s.isometry_residual());
    return take_snapshot(correlation_from_coefficients(s), t, opt);
  }

  StateCoefficients physical_state() const {
    const CVector p = phase_vector(h_->eigenvalues(), t_);
    StateCoefficients s;
    s.U.noalias() = phic_ * (p.asDiagonal() * b_);
    return s;
  }

 private:
  std::shared_ptr<const Hamiltonian> h_;
  CMatrix b_;
  CMatrix phic_;
  double t_ = 0.0;
  int events_since_qr_ = 0;
};

template <class Engine>
TrajectoryRecord run_impl(std::shared_ptr<const Hamiltonian> h, const PmParams& prm,
                          std::uint64_t seed) {
  TrajectoryRecord rec;
  rec.seed = seed;
  rec.potential_digest = h->potential_digest();
  RandomSource rng(seed);
  Engine eng(h);
  const int n_particles = h->size() / 2;
  double t = 0.0;
  std::size_t ri = 0;

  auto take_records_until = [&](double t_limit) {
    while (ri < prm.record_times.size() && prm.record_times[ri] <= t_limit) {
      eng.advance(prm.record_times[ri] - t);
      t = prm.record_times[ri];
      rec.snapshots.push_back(eng.snapshot(t, prm.observables, rec.diag));
      ++ri;
    }
  };

  try {
    while (true) {
      const double tau = sample_waiting_time(prm.gamma, n_particles, rng);
      const double t_event = t + tau;
      if (!(t_event <= prm.t_max)) {
        take_records_until(prm.t_max);
        break;
      }
      take_records_until(t_event);
      eng.advance(t_event - t);
      t = t_event;
      const int site = static_cast<int>(rng.uniform_int(
          static_cast<std::uint64_t>(h->size())));
      eng.measure(site, rng, rec.diag);
      ++rec.diag.events;
      if (std::max(rec.diag.max_purity_residual, rec.diag.max_isometry_residual) >
          kTolPurityAbort)
        throw std::runtime_error("purity residual exceeded abort threshold");
    }
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  return rec;
}

}  // namespace

TrajectoryRecord run_pm_trajectory(std::shared_ptr<const Hamiltonian> h,
                                   const PmParams& params, std::uint64_t seed) {
  params.validate();
  const bool orbital =
      params.engine == PmParams::Engine::orbital ||
      (params.engine == PmParams::Engine::automatic && h->size() > 96);
  if (orbital) return run_impl<OrbitalEngine>(std::move(h), params, seed);
  return run_impl<CorrelationEngine>(std::move(h), params, seed);
}

}  // namespace monferm
