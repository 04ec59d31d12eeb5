#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "monferm/gaussian_state.hpp"
#include "support/helpers.hpp"

using namespace monferm;

TEST_CASE("neel state occupations") {
  // occupied_odd fills sites 1, 3, ... (array offsets 0, 2, ...)
  const CorrelationMatrix odd = correlation_from_coefficients(
      neel_state(4, NeelConvention::occupied_odd));
  const CorrelationMatrix even = correlation_from_coefficients(
      neel_state(4, NeelConvention::occupied_even));
  const double odd_expect[4] = {1.0, 0.0, 1.0, 0.0};
  const double even_expect[4] = {0.0, 1.0, 0.0, 1.0};
  for (int i = 0; i < 4; ++i) {
    CHECK(odd.D(i, i).real() == odd_expect[i]);
    CHECK(even.D(i, i).real() == even_expect[i]);
  }
  CHECK(odd.D.cwiseAbs().sum() == 2.0);  // strictly diagonal

  const CorrelationMatrix six = correlation_from_coefficients(neel_state(6));
  CHECK(six.trace_real() == 3.0);
  CHECK((six.D * six.D - six.D).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(neel_state(5), std::invalid_argument);
  CHECK_THROWS_AS(neel_state(0), std::invalid_argument);
}

TEST_CASE("random isometry satisfies the state invariants") {
  const StateCoefficients s = testutil::random_isometry(6, 3, 17);
  CHECK(s.isometry_residual() < kTolIsometry);
  const CorrelationMatrix d = correlation_from_coefficients(s);
  CHECK(d.hermiticity_residual() < kTolHermitian);
  CHECK(d.purity_residual() < kTolPurity);
  CHECK(d.trace_real() == doctest::Approx(3.0).epsilon(1e-8));
  const Eigen::VectorXd ev = subblock_eigenvalues(d, {0, 1, 2, 3, 4, 5});
  for (int i = 0; i < 6; ++i) {
    CHECK(ev(i) > -1e-8);
    CHECK(ev(i) < 1.0 + 1e-8);
  }
}

TEST_CASE("gauge invariance of the correlation matrix") {
  const StateCoefficients s = testutil::random_isometry(8, 4, 5);
  StateCoefficients rotated;
  rotated.U = s.U * testutil::random_unitary(4, 6);
  const CorrelationMatrix a = correlation_from_coefficients(s);
  const CorrelationMatrix b = correlation_from_coefficients(rotated);
  CHECK((a.D - b.D).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("purify recovers the occupied subspace") {
  // diagonal projector: purified orbitals span exactly sites {1, 3}
  const CorrelationMatrix neel = correlation_from_coefficients(neel_state(4));
  const StateCoefficients u = purify(neel);
  REQUIRE(u.N() == 2);
  CHECK(u.isometry_residual() < 1e-12);
  const CorrelationMatrix back = correlation_from_coefficients(u);
  CHECK((back.D - neel.D).cwiseAbs().maxCoeff() < 1e-12);

  // generic round trip within 1e-8
  const CorrelationMatrix d = correlation_from_coefficients(
      testutil::random_isometry(10, 5, 23));
  const CorrelationMatrix rt = correlation_from_coefficients(purify(d));
  CHECK((rt.D - d.D).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("purify rejects a collapsed occupation gap") {
  CorrelationMatrix d;
  d.D = CMatrix::Zero(4, 4);
  d.D(0, 0) = 1.0;
  d.D(1, 1) = 0.5;
  d.D(2, 2) = 0.5;
  d.D(3, 3) = 0.0;
  CHECK_THROWS_AS(purify(d), std::runtime_error);
  // a clean gap on the same trace passes
  d.D(1, 1) = 1.0;
  d.D(2, 2) = 0.0;
  CHECK_NOTHROW(purify(d));
}

TEST_CASE("subblock eigenvalues") {
  const CorrelationMatrix neel = correlation_from_coefficients(neel_state(4));
  Eigen::VectorXd ev = subblock_eigenvalues(neel, {0, 1});
  std::vector<double> v(ev.data(), ev.data() + ev.size());
  std::sort(v.begin(), v.end());
  CHECK(v[0] == 0.0);
  CHECK(v[1] == 1.0);

  // full system of a pure state: all eigenvalues collapse to {0, 1}
  const CorrelationMatrix d = correlation_from_coefficients(
      testutil::random_isometry(6, 3, 7));
  ev = subblock_eigenvalues(d, {0, 1, 2, 3, 4, 5});
  for (int i = 0; i < 6; ++i)
    CHECK(std::min(ev(i), 1.0 - ev(i)) < 1e-8);

  CHECK_THROWS_AS(subblock_eigenvalues(d, {0, 6}), std::out_of_range);
}

TEST_CASE("cholqr orthonormalization") {
  CMatrix m = testutil::random_complex(32, 8, 4);
  const CMatrix before = m;
  const OrthonormalizeReport rep = cholqr_orthonormalize(m);
  StateCoefficients s;
  s.U = m;
  CHECK(s.isometry_residual() < 1e-12);
  CHECK(rep.gram_residual_pre ==
        doctest::Approx((before.adjoint() * before -
                         CMatrix::Identity(8, 8)).cwiseAbs().maxCoeff())
            .epsilon(1e-10));
  CHECK(rep.r_diag_min > 0.0);
  CHECK(rep.r_diag_max >= rep.r_diag_min);
  CHECK(rep.probe_residual_post < 1e-12);

  // same column space: projectors agree
  Eigen::HouseholderQR<CMatrix> qr(before);
  const CMatrix q = qr.householderQ() * CMatrix::Identity(32, 8);
  CHECK((m * m.adjoint() - q * q.adjoint()).cwiseAbs().maxCoeff() < 1e-10);

  // a nearly orthonormal input barely moves
  CMatrix u = testutil::random_isometry(16, 4, 9).U;
  const CMatrix u0 = u;
  cholqr_orthonormalize(u);
  CHECK((u - u0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("cholqr survives strong column imbalance") {
  // columns scaled across 8 orders of magnitude: the Cholesky pass alone
  // loses accuracy, the probe triggers the second pass
  CMatrix m = testutil::random_complex(24, 6, 12);
  for (int j = 0; j < 6; ++j) m.col(j) *= std::pow(10.0, -1.5 * j);
  cholqr_orthonormalize(m);
  StateCoefficients s;
  s.U = m;
  CHECK(s.isometry_residual() < 1e-10);
}

TEST_CASE("checkpoint round trip") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "monferm_test_ckpt";
  fs::create_directories(dir);
  const std::string path = (dir / "state.mfck").string();

  TrajectoryCheckpoint cp;
  cp.state = testutil::random_isometry(12, 6, 31);
  cp.t = 3.25;
  RandomSource rng(55);
  for (int i = 0; i < 9; ++i) rng.uniform01();
  cp.rng_state = rng.serialize_state();

  save_checkpoint(path, cp);
  const TrajectoryCheckpoint back = load_checkpoint(path);
  CHECK(back.t == cp.t);
  CHECK(back.state.L() == 12);
  CHECK(back.state.N() == 6);
  CHECK((back.state.U - cp.state.U).cwiseAbs().maxCoeff() == 0.0);
  RandomSource restored(0);
  restored.restore_state(back.rng_state);
  CHECK(restored.raw() == rng.raw());

  // corrupt magic
  {
    std::FILE* f = std::fopen(path.c_str(), "r+b");
    REQUIRE(f);
    std::fputc('X', f);
    std::fclose(f);
  }
  CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("bad magic"),
                       std::runtime_error);
  CHECK_THROWS_AS(load_checkpoint((dir / "missing.mfck").string()), std::runtime_error);
  fs::remove_all(dir);
}
