#include "monferm/monferm.h"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include "monferm/ensemble.hpp"
#include "monferm/fitting.hpp"
#include "monferm/io.hpp"
#include "monferm/run_config.hpp"

using namespace monferm;

struct mf_config {
  RunConfig config;
};

struct mf_ensemble_result {
  EnsembleResult result;
  RunConfig config;  // the config that produced it, for the writers
};

namespace {

thread_local std::string g_last_error;

mf_status set_error(mf_status st, const std::string& msg) {
  g_last_error = msg;
  return st;
}

char* dup_string(const std::string& s) {
  char* out = new (std::nothrow) char[s.size() + 1];
  if (!out) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

mf_status give_string(const std::string& s, char** out) {
  *out = dup_string(s);
  if (!*out) return set_error(MF_ERR_RUNTIME, "out of memory");
  return MF_OK;
}

// Maps exceptions onto status codes: ConfigError and bad arguments are the
// caller's fault (2), everything else is a runtime failure (3).
template <typename Fn>
mf_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    return set_error(MF_ERR_CONFIG, e.what());
  } catch (const std::invalid_argument& e) {
    return set_error(MF_ERR_CONFIG, e.what());
  } catch (const std::exception& e) {
    return set_error(MF_ERR_RUNTIME, e.what());
  } catch (...) {
    return set_error(MF_ERR_RUNTIME, "unknown error");
  }
}

void fill_decay(const DecayFit& f, mf_decay_fit* out) {
  out->parameter = f.parameter;
  out->amplitude = f.amplitude;
  out->ci_low = f.ci_low;
  out->ci_high = f.ci_high;
  out->rss = f.rss;
  out->n_points = f.n_points;
}

}  // namespace

extern "C" {

const char* mf_version(void) { return "0.2.0"; }

const char* mf_last_error(void) { return g_last_error.c_str(); }

void mf_string_free(char* s) { delete[] s; }

mf_status mf_config_parse(const char* json_text, mf_config** out) {
  if (!json_text || !out) return set_error(MF_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto* handle = new mf_config{parse_config_text(json_text)};
    *out = handle;
    return MF_OK;
  });
}

mf_status mf_config_parse_file(const char* path, mf_config** out) {
  if (!path || !out) return set_error(MF_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto* handle = new mf_config{parse_config_file(path)};
    *out = handle;
    return MF_OK;
  });
}

mf_status mf_config_to_json(const mf_config* config, char** out_json) {
  if (!config || !out_json) return set_error(MF_ERR_ARGUMENT, "null argument");
  return guarded([&] { return give_string(config_to_json(config->config), out_json); });
}

mf_status mf_config_digest(const mf_config* config, char** out_digest) {
  if (!config || !out_digest) return set_error(MF_ERR_ARGUMENT, "null argument");
  return guarded([&] { return give_string(config_digest(config->config), out_digest); });
}

void mf_config_free(mf_config* config) { delete config; }

mf_status mf_run_ensemble(const mf_config* config, mf_ensemble_result** out) {
  if (!config || !out) return set_error(MF_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto* handle = new mf_ensemble_result{run_ensemble(config->config), config->config};
    handle->result.aggregate.config_digest = config_digest(config->config);
    *out = handle;
    return MF_OK;
  });
}

void mf_ensemble_result_free(mf_ensemble_result* result) { delete result; }

mf_status mf_result_aggregate_json(const mf_ensemble_result* result, char** out_json) {
  if (!result || !out_json) return set_error(MF_ERR_ARGUMENT, "null argument");
  return guarded(
      [&] { return give_string(aggregate_to_json(result->result.aggregate), out_json); });
}

mf_status mf_result_trajectories_csv(const mf_ensemble_result* result, char** out_csv) {
  if (!result || !out_csv) return set_error(MF_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    return give_string(
        trajectories_to_csv(result->result, result->result.aggregate.config_digest),
        out_csv);
  });
}

mf_status mf_result_correlations_csv(const mf_ensemble_result* result, char** out_csv) {
  if (!result || !out_csv) return set_error(MF_ERR_ARGUMENT, "null argument");
  return guarded([&]() -> mf_status {
    if (!result->result.aggregate.correlations)
      return set_error(MF_ERR_RUNTIME, "run did not record the correlator");
    return give_string(correlations_to_csv(result->result.aggregate,
                                           result->result.aggregate.config_digest),
                       out_csv);
  });
}

mf_status mf_result_write(const mf_config* config, mf_ensemble_result* result,
                          const char* dir) {
  if (!config || !result || !dir) return set_error(MF_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    write_run_outputs(dir, config->config, result->result);
    return MF_OK;
  });
}

mf_status mf_fit_exponential(const double* r, const double* c, const double* sigma,
                             size_t n, double r_min, double r_max, mf_decay_fit* out) {
  if (!r || !c || !out) return set_error(MF_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const std::vector<double> rv(r, r + n), cv(c, c + n);
    const std::vector<double> sv = sigma ? std::vector<double>(sigma, sigma + n)
                                         : std::vector<double>();
    fill_decay(fit_exponential(rv, cv, sv, r_min, r_max), out);
    return MF_OK;
  });
}

mf_status mf_fit_powerlaw(const double* r, const double* c, const double* sigma,
                          size_t n, double r_min, double r_max, mf_decay_fit* out) {
  if (!r || !c || !out) return set_error(MF_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const std::vector<double> rv(r, r + n), cv(c, c + n);
    const std::vector<double> sv = sigma ? std::vector<double>(sigma, sigma + n)
                                         : std::vector<double>();
    fill_decay(fit_powerlaw(rv, cv, sv, r_min, r_max), out);
    return MF_OK;
  });
}

mf_status mf_fit_decay_file(const char* correlations_csv, int kind, double r_min,
                            double r_max, mf_decay_fit* out) {
  if (!correlations_csv || !out) return set_error(MF_ERR_ARGUMENT, "null argument");
  if (kind != 0 && kind != 1)
    return set_error(MF_ERR_CONFIG, "kind must be 0 (exponential) or 1 (power law)");
  return guarded([&] {
    const CorrelationTable table = read_correlations_csv(correlations_csv);
    bool weighted = true;
    for (double s : table.se)
      if (!(s > 0.0)) weighted = false;
    const std::vector<double> sv = weighted ? table.se : std::vector<double>();
    double lo = r_min, hi = r_max;
    if (lo == 0.0 && hi == 0.0) {
      const double guess = estimate_lcor_guess(table.r, table.c);
      if (kind == 0) {
        const Window w =
            default_exponential_window(guess, static_cast<int>(2 * table.r.size()));
        lo = w.lo;
        hi = w.hi;
      } else {
        const Window w = default_powerlaw_window(guess);
        lo = w.lo;
        hi = w.hi;
      }
    }
    const DecayFit f = kind == 0 ? fit_exponential(table.r, table.c, sv, lo, hi)
                                 : fit_powerlaw(table.r, table.c, sv, lo, hi);
    fill_decay(f, out);
    return MF_OK;
  });
}

mf_status mf_fit_scaling(const double* gamma, const double* lcor, const double* sigma,
                         size_t n, int fix_gamma_c, double gamma_c_fixed,
                         mf_scaling_fit* out) {
  if (!gamma || !lcor || !out) return set_error(MF_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const std::vector<double> gv(gamma, gamma + n), lv(lcor, lcor + n);
    const std::vector<double> sv = sigma ? std::vector<double>(sigma, sigma + n)
                                         : std::vector<double>();
    const ScalingFit f = fit_lcor_scaling(
        gv, lv, sv,
        fix_gamma_c ? std::optional<double>(gamma_c_fixed) : std::nullopt);
    out->a = f.a;
    out->b = f.b;
    out->gamma_c = f.gamma_c;
    out->a_ci_low = f.a_ci_low;
    out->a_ci_high = f.a_ci_high;
    out->b_ci_low = f.b_ci_low;
    out->b_ci_high = f.b_ci_high;
    out->gamma_c_ci_low = f.gamma_c_ci_low;
    out->gamma_c_ci_high = f.gamma_c_ci_high;
    for (int i = 0; i < 9; ++i) out->covariance[i] = f.covariance[i];
    out->gamma_min = f.gamma_min;
    out->gamma_max = f.gamma_max;
    out->rss = f.rss;
    out->n_points = f.n_points;
    out->gamma_c_fixed = f.gamma_c_fixed ? 1 : 0;
    out->reliable = f.reliable ? 1 : 0;
    std::snprintf(out->note, sizeof(out->note), "%s", f.note.c_str());
    return MF_OK;
  });
}

mf_status mf_theory_lcor(int symmetry_class, double gamma, double w, double* out) {
  if (!out) return set_error(MF_ERR_ARGUMENT, "null argument");
  if (symmetry_class != 0 && symmetry_class != 1)
    return set_error(MF_ERR_CONFIG, "symmetry_class must be 0 (BDI) or 1 (AIII)");
  return guarded([&] {
    *out = theory_lcor(symmetry_class == 0 ? SymmetryClass::BDI : SymmetryClass::AIII,
                       gamma, w);
    return MF_OK;
  });
}

mf_status mf_report(const char* aggregate_json_path, char** out_text) {
  if (!aggregate_json_path || !out_text)
    return set_error(MF_ERR_ARGUMENT, "null argument");
  return guarded([&]() -> mf_status {
    std::ifstream is(aggregate_json_path);
    if (!is)
      return set_error(MF_ERR_RUNTIME,
                       std::string("cannot open ") + aggregate_json_path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return give_string(report_from_aggregate_json(ss.str()), out_text);
  });
}

mf_status mf_report_tables(const char* const* aggregate_json_paths, size_t n_paths,
                           const char* scaling_json_path, const char* outdir,
                           char** out_summary) {
  if (!aggregate_json_paths || !outdir || !out_summary || n_paths == 0)
    return set_error(MF_ERR_ARGUMENT, "null argument");
  return guarded([&]() -> mf_status {
    std::vector<std::string> paths;
    paths.reserve(n_paths);
    for (size_t i = 0; i < n_paths; ++i) {
      if (!aggregate_json_paths[i]) return set_error(MF_ERR_ARGUMENT, "null path");
      paths.emplace_back(aggregate_json_paths[i]);
    }
    std::string scaling;
    if (scaling_json_path) {
      std::ifstream is(scaling_json_path);
      if (!is)
        return set_error(MF_ERR_RUNTIME,
                         std::string("cannot open ") + scaling_json_path);
      std::ostringstream ss;
      ss << is.rdbuf();
      scaling = ss.str();
    }
    const ReportTables tables = write_report_tables(paths, scaling, outdir);
    return give_string(tables.summary, out_summary);
  });
}

}  // extern "C"
