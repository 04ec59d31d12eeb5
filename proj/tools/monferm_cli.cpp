// monferm command line: simulate ensembles, fit correlation decays, fit the
// critical scaling form and summarize runs. Thin shell over the C API; exit
// codes follow mf_status (0 ok, 2 config problem, 3 runtime failure).

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "monferm/monferm.h"

namespace {

int fail_with(mf_status st) {
  std::cerr << "error: " << mf_last_error() << "\n";
  return static_cast<int>(st);
}

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { mf_string_free(ptr); }
};

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) return std::nullopt;
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int run_simulate(const std::string& config_path, const std::string& output_override,
                 int workers_override, bool quiet) {
  auto text = read_file(config_path);
  if (!text) {
    std::cerr << "error: cannot open config file: " << config_path << "\n";
    return 2;
  }

  // worker count and output directory may be overridden without touching the
  // config file; patch the JSON before handing it to the engine
  if (workers_override >= 0 || !output_override.empty()) {
    nlohmann::json j = nlohmann::json::parse(*text, nullptr, false);
    if (j.is_discarded()) {
      std::cerr << "error: config is not valid JSON: " << config_path << "\n";
      return 2;
    }
    if (workers_override >= 0) j["workers"] = workers_override;
    if (!output_override.empty()) j["output_dir"] = output_override;
    *text = j.dump();
  }

  mf_config* config = nullptr;
  mf_status st = mf_config_parse(text->c_str(), &config);
  if (st != MF_OK) return fail_with(st);

  mf_ensemble_result* result = nullptr;
  st = mf_run_ensemble(config, &result);
  if (st != MF_OK) {
    mf_config_free(config);
    return fail_with(st);
  }

  OwnedString json_text;
  st = mf_result_aggregate_json(result, &json_text.ptr);
  if (st != MF_OK) {
    mf_ensemble_result_free(result);
    mf_config_free(config);
    return fail_with(st);
  }

  // output_dir from the (possibly patched) config decides whether files land
  nlohmann::json parsed = nlohmann::json::parse(*text);
  std::string out_dir = output_override;
  if (out_dir.empty() && parsed.contains("output_dir"))
    out_dir = parsed["output_dir"].get<std::string>();
  if (!out_dir.empty()) {
    st = mf_result_write(config, result, out_dir.c_str());
    if (st != MF_OK) {
      mf_ensemble_result_free(result);
      mf_config_free(config);
      return fail_with(st);
    }
    if (!quiet) {
      // one-line physics summary so a long run ends with something readable
      nlohmann::json agg = nlohmann::json::parse(json_text.ptr, nullptr, false);
      if (!agg.is_discarded() && agg.contains("time_average")) {
        const auto& s = agg["time_average"]["s_half"];
        std::printf("S_half (time avg) = %.6g  [%.6g, %.6g]\n",
                    s.value("mean", 0.0), s.value("ci_low", 0.0),
                    s.value("ci_high", 0.0));
        if (agg.contains("lcor") && agg["lcor"].contains("per_trajectory")) {
          const auto& l = agg["lcor"]["per_trajectory"];
          std::printf("l_cor (per traj)  = %.6g  [%.6g, %.6g]\n",
                      l.value("mean", 0.0), l.value("ci_low", 0.0),
                      l.value("ci_high", 0.0));
        }
      }
      std::cout << "wrote " << out_dir << "/aggregate.json\n";
    }
  } else if (!quiet) {
    std::cout << json_text.ptr;
  }

  mf_ensemble_result_free(result);
  mf_config_free(config);
  return 0;
}

int run_config_echo(const std::string& config_path) {
  mf_config* config = nullptr;
  mf_status st = mf_config_parse_file(config_path.c_str(), &config);
  if (st != MF_OK) return fail_with(st);
  OwnedString text, digest;
  st = mf_config_to_json(config, &text.ptr);
  if (st == MF_OK) st = mf_config_digest(config, &digest.ptr);
  mf_config_free(config);
  if (st != MF_OK) return fail_with(st);
  std::cout << text.ptr << "\n";
  std::cerr << "digest: " << digest.ptr << "\n";
  return 0;
}

int run_fit_decay(const std::string& input, const std::string& kind,
                  std::vector<double> window, bool as_json) {
  const int kind_code = kind == "powerlaw" ? 1 : 0;
  double lo = 0.0, hi = 0.0;
  if (!window.empty()) {
    lo = window[0];
    hi = window[1];
  }
  mf_decay_fit fit{};
  const mf_status st = mf_fit_decay_file(input.c_str(), kind_code, lo, hi, &fit);
  if (st != MF_OK) return fail_with(st);
  if (as_json) {
    nlohmann::json j{{"kind", kind},     {"parameter", fit.parameter},
                     {"amplitude", fit.amplitude}, {"ci_low", fit.ci_low},
                     {"ci_high", fit.ci_high},     {"rss", fit.rss},
                     {"n_points", fit.n_points}};
    std::cout << j.dump(2) << "\n";
  } else {
    const char* name = kind_code == 0 ? "l_cor" : "alpha";
    std::printf("%s = %.6g  [%.6g, %.6g]  (amplitude %.4g, %d points, rss %.4g)\n",
                name, fit.parameter, fit.ci_low, fit.ci_high, fit.amplitude,
                fit.n_points, fit.rss);
  }
  return 0;
}

int run_fit_scaling(const std::string& input, std::optional<double> fix_gamma_c,
                    bool as_json) {
  auto text = read_file(input);
  if (!text) {
    std::cerr << "error: cannot open " << input << "\n";
    return 2;
  }
  std::vector<double> gamma, lcor, sigma;
  std::istringstream is(*text);
  std::string line;
  bool any_sigma = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() < 2) continue;
    try {
      const double g = std::stod(cells[0]);
      const double l = std::stod(cells[1]);
      double s = 0.0;
      if (cells.size() > 2 && !cells[2].empty()) {
        s = std::stod(cells[2]);
        any_sigma = true;
      }
      gamma.push_back(g);
      lcor.push_back(l);
      sigma.push_back(s);
    } catch (const std::exception&) {
      continue;  // header row
    }
  }
  if (gamma.size() < 3) {
    std::cerr << "error: need at least 3 data rows (gamma,lcor[,sigma]) in " << input
              << "\n";
    return 2;
  }
  mf_scaling_fit fit{};
  const mf_status st = mf_fit_scaling(
      gamma.data(), lcor.data(), any_sigma ? sigma.data() : nullptr, gamma.size(),
      fix_gamma_c.has_value() ? 1 : 0, fix_gamma_c.value_or(0.0), &fit);
  if (st != MF_OK) return fail_with(st);
  if (as_json) {
    nlohmann::json j{{"a", fit.a},
                     {"a_ci", {fit.a_ci_low, fit.a_ci_high}},
                     {"b", fit.b},
                     {"b_ci", {fit.b_ci_low, fit.b_ci_high}},
                     {"gamma_c", fit.gamma_c},
                     {"gamma_c_ci", {fit.gamma_c_ci_low, fit.gamma_c_ci_high}},
                     {"gamma_c_fixed", fit.gamma_c_fixed != 0},
                     {"gamma_window", {fit.gamma_min, fit.gamma_max}},
                     {"rss", fit.rss},
                     {"n_points", fit.n_points},
                     {"reliable", fit.reliable != 0},
                     {"note", std::string(fit.note)}};
    nlohmann::json cov = nlohmann::json::array();
    for (int row = 0; row < 3; ++row)
      cov.push_back({fit.covariance[3 * row], fit.covariance[3 * row + 1],
                     fit.covariance[3 * row + 2]});
    j["covariance"] = std::move(cov);
    j["points"] = {{"gamma", gamma}, {"lcor", lcor}};
    if (any_sigma) j["points"]["sigma"] = sigma;
    std::cout << j.dump(2) << "\n";
  } else {
    std::printf("a       = %.6g  [%.6g, %.6g]\n", fit.a, fit.a_ci_low, fit.a_ci_high);
    std::printf("b       = %.6g  [%.6g, %.6g]\n", fit.b, fit.b_ci_low, fit.b_ci_high);
    if (fit.gamma_c_fixed)
      std::printf("gamma_c = %.6g  (fixed)\n", fit.gamma_c);
    else
      std::printf("gamma_c = %.6g  [%.6g, %.6g]\n", fit.gamma_c, fit.gamma_c_ci_low,
                  fit.gamma_c_ci_high);
    std::printf("rss %.4g over %d points\n", fit.rss, fit.n_points);
    if (!fit.reliable) std::printf("warning: %s\n", fit.note);
  }
  return 0;
}

int run_report(const std::vector<std::string>& inputs, const std::string& tables_dir,
               const std::string& scaling_path) {
  if (tables_dir.empty()) {
    if (inputs.size() != 1) {
      std::cerr << "error: multiple inputs need --tables OUTDIR\n";
      return 2;
    }
    OwnedString text;
    const mf_status st = mf_report(inputs[0].c_str(), &text.ptr);
    if (st != MF_OK) return fail_with(st);
    std::cout << text.ptr;
    return 0;
  }
  std::vector<const char*> paths;
  paths.reserve(inputs.size());
  for (const std::string& s : inputs) paths.push_back(s.c_str());
  OwnedString summary;
  const mf_status st = mf_report_tables(paths.data(), paths.size(),
                                        scaling_path.empty() ? nullptr : scaling_path.c_str(),
                                        tables_dir.c_str(), &summary.ptr);
  if (st != MF_OK) return fail_with(st);
  std::cout << summary.ptr << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"monitored free-fermion trajectory toolkit"};
  app.set_version_flag("--version", std::string(mf_version()));
  app.require_subcommand(1);

  std::string config_path, output_override;
  int workers_override = -1;
  bool quiet = false;
  auto* sim = app.add_subcommand("simulate", "run a trajectory ensemble from a config");
  sim->add_option("-c,--config", config_path, "JSON config file")->required();
  sim->add_option("-o,--output", output_override, "output directory (overrides config)");
  sim->add_option("-w,--workers", workers_override,
                  "worker threads (overrides config and MONFERM_WORKERS)");
  sim->add_flag("-q,--quiet", quiet, "suppress the aggregate echo");

  std::string echo_config_path;
  auto* cfg = app.add_subcommand("config",
                                 "validate a config and echo its canonical form");
  cfg->add_option("-c,--config", echo_config_path, "JSON config file")->required();

  std::string decay_input, decay_kind = "exponential";
  std::vector<double> decay_window;
  bool decay_json = false;
  auto* fd = app.add_subcommand("fit-decay", "fit a correlation decay from a CSV");
  fd->add_option("-i,--input", decay_input, "correlations.csv from simulate")->required();
  fd->add_option("-k,--kind", decay_kind, "exponential or powerlaw")
      ->check(CLI::IsMember({"exponential", "powerlaw"}));
  fd->add_option("--window", decay_window, "fit window r_min r_max")->expected(2);
  fd->add_flag("--json", decay_json, "machine-readable output");

  std::string scaling_input;
  double fix_gc = 0.0;
  bool has_fix_gc = false, scaling_json = false;
  auto* fsc = app.add_subcommand("fit-scaling",
                                 "fit l_cor(gamma) to the critical scaling form");
  fsc->add_option("-i,--input", scaling_input, "CSV rows gamma,lcor[,sigma]")->required();
  auto* fix_opt = fsc->add_option("--fix-gamma-c", fix_gc, "pin gamma_c");
  fsc->add_flag("--json", scaling_json, "machine-readable output");

  std::vector<std::string> report_inputs;
  std::string report_tables, report_scaling;
  auto* rep = app.add_subcommand("report",
                                 "summarize aggregates or emit plot-ready tables");
  rep->add_option("-i,--input", report_inputs, "aggregate.json file(s) from simulate")
      ->required();
  rep->add_option("--tables", report_tables,
                  "write |C(r)| and lcor-vs-gamma tables into this directory");
  rep->add_option("--scaling", report_scaling,
                  "fit-scaling --json output to embed into the lcor table header");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  has_fix_gc = fix_opt->count() > 0;

  if (sim->parsed()) {
    if (workers_override < 0) {
      if (const char* env = std::getenv("MONFERM_WORKERS")) {
        try {
          workers_override = std::stoi(env);
        } catch (const std::exception&) {
          std::cerr << "error: MONFERM_WORKERS is not an integer\n";
          return 2;
        }
      }
    }
    return run_simulate(config_path, output_override, workers_override, quiet);
  }
  if (cfg->parsed()) return run_config_echo(echo_config_path);
  if (fd->parsed()) return run_fit_decay(decay_input, decay_kind, decay_window, decay_json);
  if (fsc->parsed())
    return run_fit_scaling(scaling_input,
                           has_fix_gc ? std::optional<double>(fix_gc) : std::nullopt,
                           scaling_json);
  if (rep->parsed()) return run_report(report_inputs, report_tables, report_scaling);
  return 2;
}
