#include "monferm/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace monferm {

double mean(const std::vector<double>& x) {
  if (x.empty()) throw std::invalid_argument("mean: empty sample");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double sample_variance(const std::vector<double>& x) {
  const auto n = x.size();
  if (n < 2) throw std::invalid_argument("sample_variance: need n >= 2");
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(n - 1);
}

// Lentz continued fraction for the incomplete beta (Numerical Recipes form).
static double incbeta_cf(double a, double b, double x) {
  const double tiny = 1e-300;
  const int max_iter = 500;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 3e-16) return h;
  }
  throw std::runtime_error("incbeta: continued fraction did not converge");
}

double incbeta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("incbeta: a, b must be > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * incbeta_cf(a, b, x) / a;
  return 1.0 - front * incbeta_cf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
  if (!(dof > 0.0)) throw std::invalid_argument("student_t_cdf: dof must be > 0");
  if (t == 0.0) return 0.5;
  const double x = dof / (dof + t * t);
  const double tail = 0.5 * incbeta(0.5 * dof, 0.5, x);
  return t > 0.0 ? 1.0 - tail : tail;
}

double student_t_quantile(double p, double dof) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("student_t_quantile: p must be in (0, 1)");
  if (p == 0.5) return 0.0;
  // bracket, then bisect; CDF is monotone and cheap
  double lo = 0.0, hi = 1.0;
  const bool upper = p > 0.5;
  const double target = upper ? p : 1.0 - p;
  while (student_t_cdf(hi, dof) < target) {
    hi *= 2.0;
    if (hi > 1e12) break;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (student_t_cdf(mid, dof) < target)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-12 * (1.0 + hi)) break;
  }
  const double q = 0.5 * (lo + hi);
  return upper ? q : -q;
}

MeanCi confidence_interval(const std::vector<double>& samples, double level) {
  MeanCi out;
  out.n = static_cast<int>(samples.size());
  if (samples.empty()) return out;
  out.mean = mean(samples);
  if (out.n < 2) {
    out.ci_low = out.ci_high = out.mean;
    return out;
  }
  const double se = std::sqrt(sample_variance(samples) / static_cast<double>(out.n));
  const double tq = student_t_quantile(0.5 + 0.5 * level, static_cast<double>(out.n - 1));
  out.ci_low = out.mean - tq * se;
  out.ci_high = out.mean + tq * se;
  out.defined = true;
  return out;
}

}  // namespace monferm
