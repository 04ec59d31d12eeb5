#pragma once

#include <optional>
#include <string>
#include <vector>

#include "monferm/stats.hpp"

namespace monferm {

// --- correlation decay fits ------------------------------------------------

enum class DecayKind { exponential, power_law };

// Linear least squares on the log-transformed data. `parameter` is l_cor for
// the exponential form |C| = A exp(-r / l_cor), the exponent alpha for the
// power law |C| = A r^alpha. Confidence bounds are 95% Student-t; for l_cor
// they come from the slope uncertainty through the delta method.
struct DecayFit {
  DecayKind kind = DecayKind::exponential;
  double parameter = 0.0;
  double amplitude = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double rss = 0.0;  // (weighted) residual sum of squares in log space
  int n_points = 0;
  double r_min = 0.0;
  double r_max = 0.0;
};

// Points are (r[i], c[i]) with optional one-sigma errors on c (same length,
// or empty for an unweighted fit). A window containing points with |c| = 0
// (or nonfinite) is rejected outright; the error message lists the offending
// r values so the caller can narrow the window. fit_exponential needs at
// least 5 points in the window, fit_powerlaw at least 3. With errors supplied
// the parameter covariance is (J^T W J)^{-1}, no residual rescaling, so
// doubling every sigma exactly quadruples the covariance.
DecayFit fit_exponential(const std::vector<double>& r, const std::vector<double>& c,
                         const std::vector<double>& sigma, double r_min, double r_max);
DecayFit fit_powerlaw(const std::vector<double>& r, const std::vector<double>& c,
                      const std::vector<double>& sigma, double r_min, double r_max);

// Crude decay-length estimate from the tail slope, used to place fit windows
// automatically. Tolerant of zeros (skips them); never throws on decaying data.
double estimate_lcor_guess(const std::vector<double>& r, const std::vector<double>& c);

struct Window {
  double lo = 0.0;
  double hi = 0.0;
};
// Tail window [3 l, min(L/2 - 2, 6 l)], widened if needed so that at least
// five integer r values fall inside; the power-law window is [5, l / 5].
Window default_exponential_window(double lcor_guess, int L);  // tail, r >> l_cor
Window default_powerlaw_window(double lcor_guess);            // r << l_cor

// --- critical scaling fit --------------------------------------------------

// l_cor(gamma) = b / |gamma - gamma_c| * exp(a / |gamma - gamma_c|), fitted
// in log space by Levenberg-Marquardt, multi-start over
// gamma_c in {0, +-0.05, +-0.1} x a in {1, 3, 5}. Throws with per-start
// diagnostics if no start converges; a fitted gamma_c with |gamma_c| beyond
// the largest |gamma| in the data is flagged unreliable but still reported.
struct ScalingFit {
  double a = 0.0;
  double b = 0.0;
  double gamma_c = 0.0;
  double a_ci_low = 0.0, a_ci_high = 0.0;
  double b_ci_low = 0.0, b_ci_high = 0.0;
  double gamma_c_ci_low = 0.0, gamma_c_ci_high = 0.0;
  // Row-major covariance over (a, b, gamma_c); entries touching gamma_c are
  // zero when it is held fixed.
  double covariance[9] = {0, 0, 0, 0, 0, 0, 0, 0, 0};
  double gamma_min = 0.0, gamma_max = 0.0;  // fit window actually used
  double rss = 0.0;
  int n_points = 0;
  bool gamma_c_fixed = false;
  bool reliable = true;
  std::string note;  // set when reliable is false
};

ScalingFit fit_lcor_scaling(const std::vector<double>& gamma,
                            const std::vector<double>& lcor,
                            const std::vector<double>& sigma,
                            std::optional<double> fix_gamma_c = std::nullopt);

// --- weak-coupling theory curves -------------------------------------------

enum class SymmetryClass { BDI, AIII };

// BDI (no disorder):  l = (1/gamma) exp(sqrt(2) pi / (2 gamma))
// AIII (disordered):  l = sqrt(2)/(gamma + w) exp(sqrt(2) pi / (gamma + w))
double theory_lcor(SymmetryClass cls, double gamma, double w = 0.0);

// Gaussian-equivalent strength of box disorder of half-width W: w = W^2 / 3.
double gaussian_equivalent_disorder(double W);

}  // namespace monferm
