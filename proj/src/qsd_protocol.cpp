#include "monferm/qsd_protocol.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace monferm {

using std::complex;

void QsdParams::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma))
    throw std::invalid_argument("qsd.gamma must be >= 0 and finite");
  if (!(dt > 0.0) || dt > 0.1 + 1e-12)
    throw std::invalid_argument("qsd.dt must be in (0, 0.1]");
  if (!(t_max > 0.0) || !std::isfinite(t_max))
    throw std::invalid_argument("qsd.t_max must be positive and finite");
  double prev = 0.0;
  for (double t : record_times) {
    if (!(t >= 0.0) || t > t_max)
      throw std::invalid_argument("qsd.record_times must lie in [0, t_max]");
    if (t < prev) throw std::invalid_argument("qsd.record_times must be ascending");
    prev = t;
  }
}

Eigen::VectorXd sample_noise(int L, double gamma, double dt, RandomSource& rng) {
  Eigen::VectorXd w(L);
  const double scale = std::sqrt(gamma * dt);
  for (int i = 0; i < L; ++i) w(i) = scale * rng.gaussian();
  return w;
}

namespace {

// out = G in, banded matvec plus diagonal, column by column for locality.
// diag_i = -i V_i + a_i + (2 n_i - 1) gamma with n_i from `in` itself.
void apply_generator(CMatrix& out, const CMatrix& in, const Hamiltonian& h,
                     const Eigen::VectorXd& noise_rate, double gamma) {
  const int L = static_cast<int>(in.rows());
  const int N = static_cast<int>(in.cols());
  const double J = h.J();
  const Eigen::VectorXd& V = h.site_potential();

  Eigen::VectorXd n = Eigen::VectorXd::Zero(L);
  for (int c = 0; c < N; ++c)
    for (int i = 0; i < L; ++i) n(i) += std::norm(in(i, c));

  CVector d(L);
  for (int i = 0; i < L; ++i)
    d(i) = complex<double>(noise_rate(i) + (2.0 * n(i) - 1.0) * gamma, -V(i));

  const complex<double> mij(0.0, -J);  // -i J hopping amplitude
  out.resize(L, N);
  for (int c = 0; c < N; ++c) {
    const complex<double>* x = in.col(c).data();
    complex<double>* y = out.col(c).data();
    y[0] = mij * (x[L - 1] + x[1]) + d(0) * x[0];
    for (int i = 1; i < L - 1; ++i) y[i] = mij * (x[i - 1] + x[i + 1]) + d(i) * x[i];
    y[L - 1] = mij * (x[L - 2] + x[0]) + d(L - 1) * x[L - 1];
  }
}

}  // namespace

QsdStepReport qsd_step(StateCoefficients& s, const Hamiltonian& h,
                       const QsdParams& params, RandomSource& rng) {
  const int L = s.L();
  const double dt = params.dt;
  const Eigen::VectorXd w = sample_noise(L, params.gamma, dt, rng);
  const Eigen::VectorXd a = w / dt;  // frozen across the substages

  CMatrix k1, k2, k3, k4, y;
  apply_generator(k1, s.U, h, a, params.gamma);
  y = s.U + (0.5 * dt) * k1;
  apply_generator(k2, y, h, a, params.gamma);
  y = s.U + (0.5 * dt) * k2;
  apply_generator(k3, y, h, a, params.gamma);
  y = s.U + dt * k3;
  apply_generator(k4, y, h, a, params.gamma);
  s.U += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

  const OrthonormalizeReport rep = cholqr_orthonormalize(s.U);
  QsdStepReport out;
  out.gram_residual_pre = rep.gram_residual_pre;
  out.r_diag_min = rep.r_diag_min;
  out.r_diag_max = rep.r_diag_max;
  out.probe_residual_post = rep.probe_residual_post;
  out.second_pass = rep.second_pass;
  return out;
}

TrajectoryRecord run_qsd_trajectory(std::shared_ptr<const Hamiltonian> h,
                                    const QsdParams& params, std::uint64_t seed,
                                    const TrajectoryCheckpoint* resume,
                                    TrajectoryCheckpoint* capture) {
  params.validate();
  TrajectoryRecord rec;
  rec.seed = seed;
  rec.potential_digest = h->potential_digest();

  RandomSource rng(seed);
  StateCoefficients s;
  double t0 = 0.0;
  if (resume) {
    if (resume->state.L() != h->size())
      throw std::invalid_argument("run_qsd_trajectory: checkpoint size mismatch");
    s = resume->state;
    t0 = resume->t;
    rng.restore_state(resume->rng_state);
  } else {
    s = neel_state(h->size(), NeelConvention::occupied_odd);
  }

  const double dt = params.dt;
  const long n_steps =
      static_cast<long>(std::ceil((params.t_max - t0) / dt - 1e-9));
  std::size_t ri = 0;
  while (ri < params.record_times.size() && params.record_times[ri] <= t0) {
    // records at or before the start: only meaningful for a fresh run at t=0
    if (!resume && params.record_times[ri] == 0.0)
      rec.snapshots.push_back(
          take_snapshot(correlation_from_coefficients(s), 0.0, params.observables));
    ++ri;
  }

  try {
    for (long k = 1; k <= n_steps; ++k) {
      const QsdStepReport rep = qsd_step(s, *h, params, rng);
      rec.diag.r_diag_min = std::min(rec.diag.r_diag_min, rep.r_diag_min);
      rec.diag.r_diag_max = std::max(rec.diag.r_diag_max, rep.r_diag_max);
      if (rep.second_pass) ++rec.diag.extra_orthonormalizations;
      ++rec.diag.events;
      // negated form so a NaN probe (overflowed integration) aborts too
      if (!(rep.probe_residual_post <= kTolPurity))
        throw std::runtime_error("isometry residual above tolerance after step");
      const double t = t0 + static_cast<double>(k) * dt;
      // snapshots land on the first grid time at or past the requested time
      while (ri < params.record_times.size() &&
             params.record_times[ri] <= t + 1e-9) {
        const double iso = s.isometry_residual();
        rec.diag.max_isometry_residual = std::max(rec.diag.max_isometry_residual, iso);
        if (!(iso <= kTolPurity))
          throw std::runtime_error("isometry residual above tolerance at snapshot");
        rec.snapshots.push_back(
            take_snapshot(correlation_from_coefficients(s), t, params.observables));
        ++ri;
      }
    }
  } catch (const std::exception& e) {
    rec.error = e.what();
  }

  if (capture && rec.ok()) {
    capture->state = s;
    capture->t = t0 + static_cast<double>(n_steps) * dt;
    capture->rng_state = rng.serialize_state();
  }
  return rec;
}

}  // namespace monferm
