#include "monferm/observables.hpp"

#include <cmath>
#include <stdexcept>

namespace monferm {

static double binary_entropy(double lambda) {
  double s = 0.0;
  if (lambda > 0.0) s -= lambda * std::log(lambda);
  const double mu = 1.0 - lambda;
  if (mu > 0.0) s -= mu * std::log(mu);
  return s;
}

double entanglement_entropy(const CorrelationMatrix& d, const std::vector<int>& sites) {
  const Eigen::VectorXd ev = subblock_eigenvalues(d, sites);
  double s = 0.0;
  for (int i = 0; i < ev.size(); ++i) s += binary_entropy(ev(i));
  return s;
}

std::vector<int> contiguous_sites(int first, int count, int L) {
  if (count < 0 || count > L) throw std::invalid_argument("contiguous_sites: bad count");
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) out.push_back(((first + k) % L + L) % L);
  return out;
}

std::vector<int> half_chain_sites(int L) { return contiguous_sites(0, L / 2, L); }

Eigen::VectorXd density_correlation(const CorrelationMatrix& d) {
  const int L = d.L();
  const int rmax = L / 2;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(rmax);
  for (int r = 1; r <= rmax; ++r) {
    double acc = 0.0;
    for (int i = 0; i < L; ++i) acc += std::norm(d.D(i, (i + r) % L));
    c(r - 1) = -acc / static_cast<double>(L);
  }
  return c;
}

double density_self_correlation(const CorrelationMatrix& d) {
  const int L = d.L();
  double acc = 0.0;
  for (int i = 0; i < L; ++i) {
    const double n = d.D(i, i).real();
    acc += n * (1.0 - n);
  }
  return acc / static_cast<double>(L);
}

double cumulant_ee_estimate(const Eigen::VectorXd& c_of_r, double c0, int L) {
  const int half = L / 2;
  if (c_of_r.size() < half - 1)
    throw std::invalid_argument("cumulant_ee_estimate: correlator too short");
  // Signed sum: the off-diagonal C(r) are negative, the diagonal c0 positive,
  // and together they add up to the particle-number variance of the segment.
  double acc = static_cast<double>(half) * c0;
  for (int r = 1; r < half; ++r)
    acc += 2.0 * static_cast<double>(half - r) * c_of_r(r - 1);
  const double pi = 3.14159265358979323846;
  return pi * pi / 3.0 * acc;
}

double mutual_information(const CorrelationMatrix& d, const std::vector<int>& a,
                          const std::vector<int>& b) {
  for (int i : a)
    for (int j : b)
      if (i == j)
        throw std::invalid_argument("mutual_information: regions overlap at site " +
                                    std::to_string(i));
  std::vector<int> ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  return entanglement_entropy(d, a) + entanglement_entropy(d, b) -
         entanglement_entropy(d, ab);
}

ObservableSnapshot take_snapshot(const CorrelationMatrix& d, double t,
                                 const SnapshotOptions& opt) {
  const int L = d.L();
  ObservableSnapshot snap;
  snap.t = t;
  snap.s_half = entanglement_entropy(d, half_chain_sites(L));
  if (opt.correlations || opt.cumulant) {
    snap.c_of_r = density_correlation(d);
    snap.c0 = density_self_correlation(d);
  }
  if (opt.cumulant) snap.s_cumulant = cumulant_ee_estimate(snap.c_of_r, snap.c0, L);
  if (opt.i2) {
    const int len = opt.i2_segment > 0 ? opt.i2_segment : L / 4;
    if (len < 1 || 2 * len > L) throw std::invalid_argument("take_snapshot: bad i2 segment");
    snap.i2 = mutual_information(d, contiguous_sites(0, len, L),
                                 contiguous_sites(L / 2, len, L));
  }
  if (opt.cumulant && !opt.correlations) snap.c_of_r.resize(0);
  return snap;
}

}  // namespace monferm
