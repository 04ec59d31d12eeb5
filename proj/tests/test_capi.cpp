// Exercises the shared library through the C header alone: no C++ headers
// from the library, only what a foreign-language binding would see.
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <monferm/monferm.h>

namespace fs = std::filesystem;

namespace {

const char* kTinyConfig = R"({
  "lattice": {"L": 8},
  "protocol": "qsd",
  "gamma": 0.5,
  "t_max": 1.0,
  "record_times": [0.5, 1.0],
  "n_trajectories": 2,
  "master_seed": 99,
  "workers": 1
})";

std::string take(char* s) {
  REQUIRE(s != nullptr);
  std::string out(s);
  mf_string_free(s);
  return out;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::path("capi_test_out") / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("version and error plumbing") {
  CHECK(std::strcmp(mf_version(), "0.2.0") == 0);

  mf_config* cfg = nullptr;
  CHECK(mf_config_parse(nullptr, &cfg) == MF_ERR_ARGUMENT);
  CHECK(std::string(mf_last_error()) == "null argument");
  CHECK(mf_config_parse(kTinyConfig, nullptr) == MF_ERR_ARGUMENT);
  char* text = nullptr;
  CHECK(mf_config_to_json(nullptr, &text) == MF_ERR_ARGUMENT);
  CHECK(mf_run_ensemble(nullptr, nullptr) == MF_ERR_ARGUMENT);
  double out = 0.0;
  CHECK(mf_theory_lcor(0, 1.0, 0.0, nullptr) == MF_ERR_ARGUMENT);
  (void)out;
}

TEST_CASE("config parse, serialize, digest") {
  mf_config* cfg = nullptr;
  REQUIRE(mf_config_parse(kTinyConfig, &cfg) == MF_OK);
  char* json = nullptr;
  REQUIRE(mf_config_to_json(cfg, &json) == MF_OK);
  const std::string canonical = take(json);
  CHECK(canonical.find("\"record_times\"") != std::string::npos);

  mf_config* again = nullptr;
  REQUIRE(mf_config_parse(canonical.c_str(), &again) == MF_OK);
  char* d1 = nullptr;
  char* d2 = nullptr;
  REQUIRE(mf_config_digest(cfg, &d1) == MF_OK);
  REQUIRE(mf_config_digest(again, &d2) == MF_OK);
  const std::string digest = take(d1);
  CHECK(digest.size() == 16);
  CHECK(digest == take(d2));
  mf_config_free(again);
  mf_config_free(cfg);

  mf_config* bad = nullptr;
  CHECK(mf_config_parse("{", &bad) == MF_ERR_CONFIG);
  CHECK(bad == nullptr);
  CHECK(std::string(mf_last_error()).find("not valid JSON") != std::string::npos);
  CHECK(mf_config_parse(R"({"lattice":{"L":8},"protocol":"qsd","gamma":1,)"
                        R"("t_max":1,"master_seed":1,"bogus":1})",
                        &bad) == MF_ERR_CONFIG);
  CHECK(std::string(mf_last_error()).find("unknown key") != std::string::npos);
  CHECK(mf_config_parse_file("definitely_absent.json", &bad) == MF_ERR_CONFIG);
  CHECK(std::string(mf_last_error()).find("cannot open config file") !=
        std::string::npos);
}

TEST_CASE("ensemble round trip through the C surface") {
  const fs::path dir = fresh_dir("run");
  mf_config* cfg = nullptr;
  REQUIRE(mf_config_parse(kTinyConfig, &cfg) == MF_OK);
  mf_ensemble_result* res = nullptr;
  REQUIRE(mf_run_ensemble(cfg, &res) == MF_OK);

  char* agg = nullptr;
  REQUIRE(mf_result_aggregate_json(res, &agg) == MF_OK);
  const std::string agg_text = take(agg);
  CHECK(agg_text.find("\"config_digest\"") != std::string::npos);
  CHECK(agg_text.find("\"ci_basis\": \"pooled\"") != std::string::npos);

  char* traj = nullptr;
  REQUIRE(mf_result_trajectories_csv(res, &traj) == MF_OK);
  CHECK(take(traj).rfind("# monferm trajectories v1\n", 0) == 0);
  char* corr = nullptr;
  REQUIRE(mf_result_correlations_csv(res, &corr) == MF_OK);
  CHECK(take(corr).rfind("# monferm correlations v1\n", 0) == 0);

  REQUIRE(mf_result_write(cfg, res, dir.string().c_str()) == MF_OK);
  CHECK(fs::exists(dir / "aggregate.json"));
  CHECK(fs::exists(dir / "trajectories.csv"));
  CHECK(fs::exists(dir / "correlations.csv"));

  char* report = nullptr;
  REQUIRE(mf_report((dir / "aggregate.json").string().c_str(), &report) == MF_OK);
  CHECK(take(report).find("monferm run report") != std::string::npos);
  CHECK(mf_report("absent.json", &report) == MF_ERR_RUNTIME);

  const fs::path tables = dir / "tables";
  const std::string agg_path = (dir / "aggregate.json").string();
  const char* paths[1] = {agg_path.c_str()};
  char* summary = nullptr;
  REQUIRE(mf_report_tables(paths, 1, nullptr, tables.string().c_str(), &summary) ==
          MF_OK);
  // this run records no l_cor series, which the summary has to call out
  CHECK(take(summary).find("missing l_cor series") != std::string::npos);
  const char* holed[1] = {nullptr};
  CHECK(mf_report_tables(holed, 1, nullptr, tables.string().c_str(), &summary) ==
        MF_ERR_ARGUMENT);
  CHECK(mf_report_tables(paths, 1, "absent_scaling.json", tables.string().c_str(),
                         &summary) == MF_ERR_RUNTIME);

  mf_ensemble_result_free(res);
  mf_config_free(cfg);
}

TEST_CASE("correlator csv export requires the correlator") {
  mf_config* cfg = nullptr;
  REQUIRE(mf_config_parse(
              R"({"lattice":{"L":8},"protocol":"qsd","gamma":0.5,"t_max":0.5,)"
              R"("record_times":[0.5],"n_trajectories":1,"master_seed":3,)"
              R"("workers":1,"observables":{"correlations":false,"cumulant":false}})",
              &cfg) == MF_OK);
  mf_ensemble_result* res = nullptr;
  REQUIRE(mf_run_ensemble(cfg, &res) == MF_OK);
  char* corr = nullptr;
  CHECK(mf_result_correlations_csv(res, &corr) == MF_ERR_RUNTIME);
  CHECK(std::string(mf_last_error()).find("did not record") != std::string::npos);
  mf_ensemble_result_free(res);
  mf_config_free(cfg);
}

TEST_CASE("decay fits") {
  std::vector<double> r, c;
  for (int k = 10; k <= 60; ++k) {
    r.push_back(k);
    c.push_back(-2.0 * std::exp(-k / 12.0));
  }
  mf_decay_fit fit{};
  REQUIRE(mf_fit_exponential(r.data(), c.data(), nullptr, r.size(), 10.0, 60.0,
                             &fit) == MF_OK);
  CHECK(fit.parameter == doctest::Approx(12.0).epsilon(1e-9));
  CHECK(fit.n_points == 51);

  // window holds fewer than the five required points: caller error
  CHECK(mf_fit_exponential(r.data(), c.data(), nullptr, r.size(), 10.0, 12.0, &fit) ==
        MF_ERR_CONFIG);
  c[5] = 0.0;
  CHECK(mf_fit_exponential(r.data(), c.data(), nullptr, r.size(), 10.0, 60.0, &fit) ==
        MF_ERR_RUNTIME);
  CHECK(std::string(mf_last_error()).find("nonpositive |C|") != std::string::npos);

  std::vector<double> pr, pc;
  for (int k = 4; k <= 40; ++k) {
    pr.push_back(k);
    pc.push_back(-0.5 * std::pow(k, -1.7));
  }
  REQUIRE(mf_fit_powerlaw(pr.data(), pc.data(), nullptr, pr.size(), 4.0, 40.0,
                          &fit) == MF_OK);
  CHECK(fit.parameter == doctest::Approx(-1.7).epsilon(1e-9));
}

TEST_CASE("decay fit from a correlations file") {
  const fs::path dir = fresh_dir("fitfile");
  const fs::path csv = dir / "correlations.csv";
  {
    std::ofstream os(csv);
    os << "# monferm correlations v1\n";
    os << "r,c_mean,c_ci_low,c_ci_high,c_se,n\n";
    os << "0,0.25,0.2,0.3,0.01,4\n";
    for (int k = 1; k <= 16; ++k)
      os << k << "," << -std::exp(-k / 3.0) << ",0,0,0.001,4\n";
  }
  mf_decay_fit fit{};
  REQUIRE(mf_fit_decay_file(csv.string().c_str(), 0, 6.0, 16.0, &fit) == MF_OK);
  CHECK(fit.parameter == doctest::Approx(3.0).epsilon(1e-6));
  // automatic tail window
  REQUIRE(mf_fit_decay_file(csv.string().c_str(), 0, 0.0, 0.0, &fit) == MF_OK);
  CHECK(fit.parameter == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(mf_fit_decay_file(csv.string().c_str(), 7, 0.0, 0.0, &fit) == MF_ERR_CONFIG);
  CHECK(mf_fit_decay_file("absent.csv", 0, 0.0, 0.0, &fit) == MF_ERR_RUNTIME);
}

TEST_CASE("scaling fit and theory curves") {
  const double a_true = 2.2, b_true = 0.8, gc_true = 0.15;
  std::vector<double> g, l;
  for (int k = 0; k < 12; ++k) {
    const double gamma = 0.3 + 0.082 * k;
    const double gap = std::fabs(gamma - gc_true);
    g.push_back(gamma);
    l.push_back(b_true / gap * std::exp(a_true / gap));
  }
  mf_scaling_fit fit{};
  REQUIRE(mf_fit_scaling(g.data(), l.data(), nullptr, g.size(), 0, 0.0, &fit) == MF_OK);
  CHECK(fit.a == doctest::Approx(a_true).epsilon(1e-4));
  CHECK(fit.gamma_c == doctest::Approx(gc_true).epsilon(1e-3));
  CHECK(fit.reliable == 1);
  CHECK(fit.gamma_c_fixed == 0);
  CHECK(fit.note[0] == '\0');

  REQUIRE(mf_fit_scaling(g.data(), l.data(), nullptr, g.size(), 1, 0.15, &fit) == MF_OK);
  CHECK(fit.gamma_c == 0.15);
  CHECK(fit.gamma_c_fixed == 1);
  CHECK(fit.covariance[8] == 0.0);

  double lc = 0.0;
  REQUIRE(mf_theory_lcor(0, 0.5, 0.0, &lc) == MF_OK);
  const double sqrt2pi = std::sqrt(2.0) * 3.14159265358979323846;
  CHECK(lc == doctest::Approx(std::exp(sqrt2pi) / 0.5).epsilon(1e-12));
  REQUIRE(mf_theory_lcor(1, 0.5, 0.3, &lc) == MF_OK);
  CHECK(lc == doctest::Approx(std::sqrt(2.0) / 0.8 * std::exp(sqrt2pi / 0.8))
                  .epsilon(1e-12));
  CHECK(mf_theory_lcor(7, 0.5, 0.0, &lc) == MF_ERR_CONFIG);
  CHECK(mf_theory_lcor(0, 0.0, 0.0, &lc) == MF_ERR_CONFIG);
}
