#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "monferm/random.hpp"
#include "monferm/stats.hpp"

using namespace monferm;

TEST_CASE("uniform01 range and moments") {
  RandomSource rng(42);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // SE of the mean is 1/sqrt(12 n) ~ 6.5e-4
  CHECK(std::fabs(sum / n - 0.5) < 4e-3);
}

TEST_CASE("uniform_open_closed never returns zero") {
  RandomSource rng(3);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform_open_closed();
    REQUIRE(u > 0.0);
    REQUIRE(u <= 1.0);
  }
}

TEST_CASE("uniform_int bounds and coarse uniformity") {
  RandomSource rng(5);
  std::vector<int> hist(7, 0);
  const int n = 140000;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t k = rng.uniform_int(7);
    REQUIRE(k < 7);
    ++hist[static_cast<int>(k)];
  }
  for (int b = 0; b < 7; ++b) {
    // binomial SE ~ sqrt(n p q) ~ 131; allow 5 sigma
    CHECK(std::fabs(hist[b] - n / 7.0) < 660.0);
  }
  CHECK_THROWS_AS(rng.uniform_int(0), std::invalid_argument);
}

TEST_CASE("gaussian moments") {
  RandomSource rng(11);
  const int n = 400000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    s1 += g;
    s2 += g * g;
  }
  const double m = s1 / n;
  const double v = s2 / n - m * m;
  CHECK(std::fabs(m) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::fabs(v - 1.0) < 0.01);
}

TEST_CASE("engine state round trip") {
  RandomSource rng(99);
  for (int i = 0; i < 17; ++i) rng.uniform01();
  const std::string state = rng.serialize_state();
  RandomSource copy(0);
  copy.restore_state(state);
  for (int i = 0; i < 100; ++i) CHECK(copy.raw() == rng.raw());
  CHECK_THROWS_AS(copy.restore_state("not a state at all ###"), std::runtime_error);
}

TEST_CASE("seed derivation separates neighbouring streams") {
  RandomSource rng(1);
  for (int i = 0; i < 1000000; ++i) {
    const std::uint64_t m = rng.raw();
    REQUIRE(derive_seed(m, 0, 0) != derive_seed(m, 0, 1));
  }
}

TEST_CASE("seed derivation is collision free on a 100x100 grid") {
  std::unordered_set<std::uint64_t> seen;
  for (std::uint64_t d = 0; d < 100; ++d)
    for (std::uint64_t k = 0; k < 100; ++k) seen.insert(derive_seed(123456789, d, k));
  CHECK(seen.size() == 10000);
  // the potential stream is tagged away from every trajectory stream
  for (std::uint64_t k = 0; k < 1000; ++k)
    REQUIRE(derive_potential_seed(123456789, 3) != derive_seed(123456789, 3, k));
}

TEST_CASE("incomplete beta pinned values") {
  CHECK(incbeta(0.5, 0.5, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(incbeta(1.0, 1.0, 0.3) == doctest::Approx(0.3).epsilon(1e-12));
  // I_x(2,3) = 6x^2 - 8x^3 + 3x^4 in closed form; x = 1/4 gives 67/256
  CHECK(incbeta(2.0, 3.0, 0.25) == doctest::Approx(0.26171875).epsilon(1e-12));
  CHECK(incbeta(2.0, 3.0, 0.0) == 0.0);
  CHECK(incbeta(2.0, 3.0, 1.0) == 1.0);
  CHECK_THROWS_AS(incbeta(0.0, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("student t distribution") {
  CHECK(student_t_cdf(0.0, 5.0) == 0.5);
  // dof = 1 is Cauchy: F(1) = 3/4
  CHECK(student_t_cdf(1.0, 1.0) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(student_t_cdf(-1.0, 1.0) == doctest::Approx(0.25).epsilon(1e-12));

  CHECK(student_t_quantile(0.975, 1.0) == doctest::Approx(12.7062047364).epsilon(1e-8));
  CHECK(student_t_quantile(0.975, 1e6) == doctest::Approx(1.959964).epsilon(1e-4));
  CHECK(student_t_quantile(0.025, 5.0) ==
        doctest::Approx(-student_t_quantile(0.975, 5.0)).epsilon(1e-10));
  for (double p : {0.6, 0.9, 0.99})
    CHECK(student_t_cdf(student_t_quantile(p, 7.0), 7.0) ==
          doctest::Approx(p).epsilon(1e-9));
}

TEST_CASE("confidence interval examples") {
  // constant sample: defined, zero width
  const MeanCi flat = confidence_interval({3.0, 3.0, 3.0, 3.0});
  CHECK(flat.defined);
  CHECK(flat.mean == 3.0);
  CHECK(flat.ci_low == 3.0);
  CHECK(flat.ci_high == 3.0);

  // two points {0, 2}: SE = 1, half width = t_{0.975, 1}
  const MeanCi two = confidence_interval({0.0, 2.0});
  CHECK(two.defined);
  CHECK(two.mean == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(0.5 * (two.ci_high - two.ci_low) == doctest::Approx(12.7062047364).epsilon(1e-8));

  // single sample: no spread estimate
  const MeanCi one = confidence_interval({1.7});
  CHECK_FALSE(one.defined);
  CHECK(one.mean == 1.7);
  CHECK(one.ci_low == one.ci_high);

  // 1e4 standard normals: half width approaches 1.96 / 100
  RandomSource rng(2024);
  std::vector<double> z(10000);
  for (double& v : z) v = rng.gaussian();
  const MeanCi big = confidence_interval(z);
  const double half = 0.5 * (big.ci_high - big.ci_low);
  CHECK(half == doctest::Approx(1.96 / 100.0).epsilon(0.05));
}

TEST_CASE("mean and variance basics") {
  CHECK(mean({1.0, 2.0, 3.0}) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(sample_variance({0.0, 2.0}) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(mean({}), std::invalid_argument);
  CHECK_THROWS_AS(sample_variance({1.0}), std::invalid_argument);
}
