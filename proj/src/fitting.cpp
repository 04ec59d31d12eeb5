#include "monferm/fitting.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace monferm {

namespace {

struct LinearFit {
  double c0 = 0.0, c1 = 0.0;       // intercept, slope
  double var_c0 = 0.0, var_c1 = 0.0;
  double rss = 0.0;
  int n = 0;
};

// Weighted straight-line fit y = c0 + c1 x. With weights the covariance is
// (X^T W X)^{-1}; without, the unit-weight covariance scaled by rss/(n-2).
LinearFit linear_ls(const std::vector<double>& x, const std::vector<double>& y,
                    const std::vector<double>& w_inv_var, bool weighted) {
  const int n = static_cast<int>(x.size());
  if (n < 3) throw std::invalid_argument("fit: need at least 3 points in the window");
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double w = weighted ? w_inv_var[i] : 1.0;
    sw += w;
    sx += w * x[i];
    sy += w * y[i];
    sxx += w * x[i] * x[i];
    sxy += w * x[i] * y[i];
  }
  const double det = sw * sxx - sx * sx;
  if (!(det > 0.0) || !std::isfinite(det))
    throw std::runtime_error("fit: singular design matrix");
  LinearFit out;
  out.n = n;
  out.c1 = (sw * sxy - sx * sy) / det;
  out.c0 = (sxx * sy - sx * sxy) / det;
  for (int i = 0; i < n; ++i) {
    const double resid = y[i] - out.c0 - out.c1 * x[i];
    const double w = weighted ? w_inv_var[i] : 1.0;
    out.rss += w * resid * resid;
  }
  out.var_c0 = sxx / det;
  out.var_c1 = sw / det;
  if (!weighted && n > 2) {
    const double s2 = out.rss / static_cast<double>(n - 2);
    out.var_c0 *= s2;
    out.var_c1 *= s2;
  }
  return out;
}

struct LogPoints {
  std::vector<double> x, y, w;
  bool weighted = false;
};

LogPoints collect_log_points(const std::vector<double>& r, const std::vector<double>& c,
                             const std::vector<double>& sigma, double r_min,
                             double r_max, bool log_r, const char* opname,
                             int min_points) {
  if (r.size() != c.size()) throw std::invalid_argument("fit: r and c length mismatch");
  if (!sigma.empty() && sigma.size() != c.size())
    throw std::invalid_argument("fit: sigma length mismatch");
  LogPoints p;
  p.weighted = !sigma.empty();
  std::string bad;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] < r_min || r[i] > r_max) continue;
    const double a = std::fabs(c[i]);
    if (!(a > 0.0) || !std::isfinite(a) || (p.weighted && !(sigma[i] > 0.0))) {
      if (!bad.empty()) bad += ", ";
      bad += "r=" + std::to_string(r[i]);
      continue;
    }
    p.x.push_back(log_r ? std::log(r[i]) : r[i]);
    p.y.push_back(std::log(a));
    // sigma on c maps to sigma/|c| on log c
    if (p.weighted) p.w.push_back(a * a / (sigma[i] * sigma[i]));
  }
  if (!bad.empty())
    throw std::runtime_error(std::string(opname) +
                             ": window contains nonpositive |C| points at " + bad);
  if (static_cast<int>(p.x.size()) < min_points)
    throw std::invalid_argument(std::string(opname) + ": need at least " +
                                std::to_string(min_points) + " points in window, got " +
                                std::to_string(p.x.size()));
  return p;
}

}  // namespace

DecayFit fit_exponential(const std::vector<double>& r, const std::vector<double>& c,
                         const std::vector<double>& sigma, double r_min, double r_max) {
  const LogPoints p =
      collect_log_points(r, c, sigma, r_min, r_max, false, "fit_exponential", 5);
  const LinearFit lf = linear_ls(p.x, p.y, p.w, p.weighted);
  if (!(lf.c1 < 0.0))
    throw std::runtime_error("fit_exponential: correlator does not decay in window");
  DecayFit out;
  out.kind = DecayKind::exponential;
  out.parameter = -1.0 / lf.c1;
  out.amplitude = std::exp(lf.c0);
  out.rss = lf.rss;
  out.n_points = lf.n;
  out.r_min = r_min;
  out.r_max = r_max;
  // delta method: var(l) = var(slope) / slope^4
  const double se_l = std::sqrt(lf.var_c1) / (lf.c1 * lf.c1);
  const double tq = student_t_quantile(0.975, static_cast<double>(lf.n - 2));
  out.ci_low = out.parameter - tq * se_l;
  out.ci_high = out.parameter + tq * se_l;
  return out;
}

DecayFit fit_powerlaw(const std::vector<double>& r, const std::vector<double>& c,
                      const std::vector<double>& sigma, double r_min, double r_max) {
  const LogPoints p =
      collect_log_points(r, c, sigma, r_min, r_max, true, "fit_powerlaw", 3);
  const LinearFit lf = linear_ls(p.x, p.y, p.w, p.weighted);
  DecayFit out;
  out.kind = DecayKind::power_law;
  out.parameter = lf.c1;
  out.amplitude = std::exp(lf.c0);
  out.rss = lf.rss;
  out.n_points = lf.n;
  out.r_min = r_min;
  out.r_max = r_max;
  const double se = std::sqrt(lf.var_c1);
  const double tq = student_t_quantile(0.975, static_cast<double>(lf.n - 2));
  out.ci_low = out.parameter - tq * se;
  out.ci_high = out.parameter + tq * se;
  return out;
}

double estimate_lcor_guess(const std::vector<double>& r, const std::vector<double>& c) {
  if (r.empty() || r.size() != c.size())
    throw std::invalid_argument("estimate_lcor_guess: bad input");
  double r_hi = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i)
    if (std::fabs(c[i]) > 1e-14 && r[i] > r_hi) r_hi = r[i];
  if (r_hi < 4.0) return 1.0;
  // tolerant tail slope: take ln|C| over [2, r_hi], skipping exact zeros
  std::vector<double> x, y;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] < 2.0 || r[i] > r_hi) continue;
    const double a = std::fabs(c[i]);
    if (a > 0.0 && std::isfinite(a)) {
      x.push_back(r[i]);
      y.push_back(std::log(a));
    }
  }
  if (x.size() < 3) return std::max(1.0, r_hi / 4.0);
  try {
    const LinearFit lf = linear_ls(x, y, {}, false);
    if (lf.c1 < 0.0) return std::clamp(-1.0 / lf.c1, 0.5, r_hi);
  } catch (const std::exception&) {
  }
  return std::max(1.0, r_hi / 4.0);
}

Window default_exponential_window(double lcor_guess, int L) {
  const double margin = 2.0;  // keep clear of the wrap-around bin at r = L/2
  const double half = static_cast<double>(L) / 2.0;
  Window w;
  w.lo = 3.0 * lcor_guess;
  w.hi = std::min(half - margin, 6.0 * lcor_guess);
  // fit_exponential needs five points; widen toward small r first, then out
  auto npts = [](const Window& v) {
    return std::floor(v.hi) - std::ceil(v.lo) + 1.0;
  };
  while (npts(w) < 5.0 && w.lo > 1.0) w.lo = std::max(1.0, w.lo - 1.0);
  while (npts(w) < 5.0 && w.hi < half) w.hi = std::min(half, w.hi + 1.0);
  return w;
}

Window default_powerlaw_window(double lcor_guess) {
  Window w;
  w.lo = 5.0;
  w.hi = lcor_guess / 5.0;
  return w;
}

// --- scaling fit -----------------------------------------------------------

namespace {

struct ScalingProblem {
  std::vector<double> gamma, logl, wsqrt;  // wsqrt_i = 1/sigma_logl_i
  bool weighted = false;
  bool fix_gc = false;
  double gc_fixed = 0.0;
};

constexpr double kMinGap = 1e-6;

double model_logl(double a, double lnb, double gc, double g) {
  const double gap = std::max(std::fabs(g - gc), kMinGap);
  return lnb - std::log(gap) + a / gap;
}

// residuals rho_i = w_i (y_i - model_i); returns cost = sum rho^2
double residuals(const ScalingProblem& pr, const Eigen::VectorXd& th,
                 Eigen::VectorXd& rho) {
  const double a = th(0), lnb = th(1);
  const double gc = pr.fix_gc ? pr.gc_fixed : th(2);
  const int n = static_cast<int>(pr.gamma.size());
  rho.resize(n);
  for (int i = 0; i < n; ++i) {
    const double w = pr.weighted ? pr.wsqrt[i] : 1.0;
    rho(i) = w * (pr.logl[i] - model_logl(a, lnb, gc, pr.gamma[i]));
  }
  return rho.squaredNorm();
}

void jacobian(const ScalingProblem& pr, const Eigen::VectorXd& th, Eigen::MatrixXd& jac) {
  const double a = th(0);
  const double gc = pr.fix_gc ? pr.gc_fixed : th(2);
  const int n = static_cast<int>(pr.gamma.size());
  const int p = pr.fix_gc ? 2 : 3;
  jac.resize(n, p);
  for (int i = 0; i < n; ++i) {
    const double w = pr.weighted ? pr.wsqrt[i] : 1.0;
    const double delta = pr.gamma[i] - gc;
    const double gap = std::max(std::fabs(delta), kMinGap);
    // d rho / d theta = -w d model / d theta
    jac(i, 0) = -w / gap;
    jac(i, 1) = -w;
    if (!pr.fix_gc) {
      const double sgn = delta >= 0.0 ? 1.0 : -1.0;
      jac(i, 2) = -w * (sgn / gap + a * sgn / (gap * gap));
    }
  }
}

struct LmResult {
  Eigen::VectorXd theta;
  double cost = std::numeric_limits<double>::infinity();
  bool converged = false;
};

LmResult levenberg_marquardt(const ScalingProblem& pr, Eigen::VectorXd th0) {
  LmResult res;
  Eigen::VectorXd rho, rho_new;
  Eigen::MatrixXd jac;
  double cost = residuals(pr, th0, rho);
  double lambda = 1e-3;
  const int p = static_cast<int>(th0.size());
  for (int it = 0; it < 200; ++it) {
    jacobian(pr, th0, jac);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * rho;
    Eigen::MatrixXd lhs = jtj;
    for (int d = 0; d < p; ++d)
      lhs(d, d) += lambda * std::max(jtj(d, d), 1e-12);
    const Eigen::VectorXd step = lhs.ldlt().solve(-g);
    if (!step.allFinite()) break;
    Eigen::VectorXd th_new = th0 + step;
    const double cost_new = residuals(pr, th_new, rho_new);
    if (cost_new < cost) {
      const double rel = (cost - cost_new) / std::max(cost, 1e-300);
      th0 = th_new;
      rho = rho_new;
      cost = cost_new;
      lambda = std::max(lambda * 0.3, 1e-12);
      if (rel < 1e-12 || step.cwiseAbs().maxCoeff() < 1e-11) {
        res.converged = true;
        break;
      }
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
  }
  res.theta = th0;
  res.cost = cost;
  return res;
}

}  // namespace

ScalingFit fit_lcor_scaling(const std::vector<double>& gamma,
                            const std::vector<double>& lcor,
                            const std::vector<double>& sigma,
                            std::optional<double> fix_gamma_c) {
  const int n = static_cast<int>(gamma.size());
  if (n != static_cast<int>(lcor.size()))
    throw std::invalid_argument("fit_lcor_scaling: gamma and lcor length mismatch");
  if (!sigma.empty() && sigma.size() != gamma.size())
    throw std::invalid_argument("fit_lcor_scaling: sigma length mismatch");
  ScalingProblem pr;
  pr.weighted = !sigma.empty();
  pr.fix_gc = fix_gamma_c.has_value();
  pr.gc_fixed = fix_gamma_c.value_or(0.0);
  for (int i = 0; i < n; ++i) {
    if (!(lcor[i] > 0.0)) continue;
    if (pr.weighted && !(sigma[i] > 0.0)) continue;
    pr.gamma.push_back(gamma[i]);
    pr.logl.push_back(std::log(lcor[i]));
    if (pr.weighted) pr.wsqrt.push_back(lcor[i] / sigma[i]);  // 1 / sigma_log
  }
  const int np = static_cast<int>(pr.gamma.size());
  const int p = pr.fix_gc ? 2 : 3;
  if (np < p + 1)
    throw std::invalid_argument("fit_lcor_scaling: not enough usable points");

  // multi-start over plausible (gamma_c, a)
  const std::vector<double> gc_starts =
      pr.fix_gc ? std::vector<double>{pr.gc_fixed}
                : std::vector<double>{0.0, 0.05, -0.05, 0.1, -0.1};
  const std::vector<double> a_starts{1.0, 3.0, 5.0};
  LmResult best;
  bool any_converged = false;
  std::string start_log;
  for (double gc0 : gc_starts) {
    for (double a0 : a_starts) {
      double lnb0 = 0.0;
      for (int i = 0; i < np; ++i) {
        const double gap = std::max(std::fabs(pr.gamma[i] - gc0), kMinGap);
        lnb0 += pr.logl[i] + std::log(gap) - a0 / gap;
      }
      lnb0 /= static_cast<double>(np);
      Eigen::VectorXd th0(p);
      if (pr.fix_gc)
        th0 << a0, lnb0;
      else
        th0 << a0, lnb0, gc0;
      const LmResult r = levenberg_marquardt(pr, th0);
      any_converged = any_converged || r.converged;
      start_log += " [gc0=" + std::to_string(gc0) + " a0=" + std::to_string(a0) +
                   " cost=" + std::to_string(r.cost) +
                   (r.converged ? " converged]" : " stalled]");
      if (r.converged && (!best.converged || r.cost < best.cost)) best = r;
      if (!any_converged && r.cost < best.cost) best = r;
    }
  }
  if (!any_converged)
    throw std::runtime_error("fit_lcor_scaling: no start converged;" + start_log);

  double gmax_abs = 0.0;
  ScalingFit out;
  out.gamma_c_fixed = pr.fix_gc;
  out.n_points = np;
  out.rss = best.cost;
  out.a = best.theta(0);
  out.b = std::exp(best.theta(1));
  out.gamma_c = pr.fix_gc ? pr.gc_fixed : best.theta(2);
  out.gamma_min = pr.gamma[0];
  out.gamma_max = pr.gamma[0];
  for (double g : pr.gamma) {
    out.gamma_min = std::min(out.gamma_min, g);
    out.gamma_max = std::max(out.gamma_max, g);
    gmax_abs = std::max(gmax_abs, std::fabs(g));
  }

  // covariance at the optimum; unweighted fits get the rss/(n-p) scale
  Eigen::VectorXd rho;
  Eigen::MatrixXd jac;
  residuals(pr, best.theta, rho);
  jacobian(pr, best.theta, jac);
  Eigen::MatrixXd jtj = jac.transpose() * jac;
  Eigen::MatrixXd cov = jtj.inverse();
  if (!pr.weighted && np > p) cov *= best.cost / static_cast<double>(np - p);
  if (!cov.allFinite() || cov(0, 0) < 0.0 || cov(1, 1) < 0.0 ||
      (!pr.fix_gc && cov(2, 2) < 0.0)) {
    out.reliable = false;
    out.note = "singular parameter covariance";
    return out;
  }
  // report covariance over (a, b, gamma_c): delta method maps ln b -> b
  {
    Eigen::Matrix3d full = Eigen::Matrix3d::Zero();
    full.topLeftCorner(p, p) = cov;
    Eigen::Matrix3d jm = Eigen::Matrix3d::Identity();
    jm(1, 1) = out.b;  // d b / d ln b
    Eigen::Matrix3d mapped = jm * full * jm.transpose();
    // internal order is (a, ln b, gc); external (a, b, gc) has the same slots
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out.covariance[3 * i + j] = mapped(i, j);
  }
  const double tq = student_t_quantile(
      0.975, static_cast<double>(std::max(1, np - p)));
  const double se_a = std::sqrt(cov(0, 0));
  const double se_lnb = std::sqrt(cov(1, 1));
  out.a_ci_low = out.a - tq * se_a;
  out.a_ci_high = out.a + tq * se_a;
  out.b_ci_low = out.b * std::exp(-tq * se_lnb);
  out.b_ci_high = out.b * std::exp(tq * se_lnb);
  if (!pr.fix_gc) {
    const double se_gc = std::sqrt(cov(2, 2));
    out.gamma_c_ci_low = out.gamma_c - tq * se_gc;
    out.gamma_c_ci_high = out.gamma_c + tq * se_gc;
    if (std::fabs(out.gamma_c) > gmax_abs) {
      out.reliable = false;
      out.note = "gamma_c outside [-gamma_max, gamma_max]";
    }
  } else {
    out.gamma_c_ci_low = out.gamma_c_ci_high = out.gamma_c;
  }
  return out;
}

double theory_lcor(SymmetryClass cls, double gamma, double w) {
  const double sqrt2pi = 4.4428829381583662470;  // sqrt(2) * pi
  switch (cls) {
    case SymmetryClass::BDI:
      if (!(gamma > 0.0)) throw std::invalid_argument("theory_lcor: gamma must be > 0");
      return std::exp(sqrt2pi / (2.0 * gamma)) / gamma;
    case SymmetryClass::AIII: {
      const double s = gamma + w;
      if (!(s > 0.0)) throw std::invalid_argument("theory_lcor: gamma + w must be > 0");
      return std::sqrt(2.0) / s * std::exp(sqrt2pi / s);
    }
  }
  throw std::logic_error("theory_lcor: unknown symmetry class");
}

double gaussian_equivalent_disorder(double W) {
  if (W < 0.0) throw std::invalid_argument("gaussian_equivalent_disorder: W must be >= 0");
  return W * W / 3.0;
}

}  // namespace monferm
