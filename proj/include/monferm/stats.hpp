#pragma once

#include <vector>

namespace monferm {

double mean(const std::vector<double>& x);
double sample_variance(const std::vector<double>& x);  // unbiased, n >= 2

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incbeta(double a, double b, double x);

// Student-t CDF and quantile (bisection on the CDF). p in (0, 1), dof >= 1.
double student_t_cdf(double t, double dof);
double student_t_quantile(double p, double dof);

struct MeanCi {
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int n = 0;
  bool defined = false;  // false when n < 2 (no spread estimate)
};

// Two-sided Student-t confidence interval for the mean, default 95%.
MeanCi confidence_interval(const std::vector<double>& samples, double level = 0.95);

}  // namespace monferm
