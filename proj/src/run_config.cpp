#include "monferm/run_config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "monferm/digest.hpp"

namespace monferm {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config error at " + (path.empty() ? "<root>" : path) + ": " + what);
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

void check_keys(const json& j, const std::string& path,
                const std::set<std::string>& allowed) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) fail(path, "unknown key \"" + key + "\"");
  }
}

const json* find(const json& j, const std::string& key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

std::uint64_t parse_master_seed(const json& j, const std::string& path) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
      fail(path, "seed string must be a non-negative decimal integer");
    try {
      std::size_t used = 0;
      const std::uint64_t v = std::stoull(s, &used);
      if (used != s.size()) fail(path, "trailing characters in seed string");
      return v;
    } catch (const std::out_of_range&) {
      fail(path, "seed does not fit in 64 bits");
    }
  }
  if (j.is_number_unsigned() || j.is_number_integer()) {
    const auto v = j.get<std::int64_t>();
    if (v < 0) fail(path, "seed must be non-negative");
    if (v > (1ll << 53))
      fail(path, "integer seeds above 2^53 lose precision; pass it as a string");
    return static_cast<std::uint64_t>(v);
  }
  fail(path, "expected a string or integer");
}

PotentialSpec parse_potential(const json& j, const std::string& path) {
  require_object(j, path);
  const json* kind = find(j, "kind");
  if (!kind) fail(path, "missing key \"kind\"");
  const std::string k = get_string(*kind, path + ".kind");
  PotentialSpec p;
  if (k == "clean") {
    check_keys(j, path, {"kind"});
    p = PotentialSpec::clean();
  } else if (k == "box_disorder") {
    check_keys(j, path, {"kind", "W"});
    const json* w = find(j, "W");
    if (!w) fail(path, "box_disorder requires \"W\"");
    p = PotentialSpec::box(get_number(*w, path + ".W"));
  } else if (k == "quasiperiodic") {
    check_keys(j, path, {"kind", "V", "theta"});
    const json* v = find(j, "V");
    if (!v) fail(path, "quasiperiodic requires \"V\"");
    double theta = 0.0;
    if (const json* th = find(j, "theta")) theta = get_number(*th, path + ".theta");
    p = PotentialSpec::quasiperiodic(get_number(*v, path + ".V"), theta);
  } else {
    fail(path + ".kind",
         "must be \"clean\", \"box_disorder\" or \"quasiperiodic\", got \"" + k + "\"");
  }
  return p;
}

RunConfig parse_config_json(const json& j) {
  require_object(j, "");
  check_keys(j, "",
             {"lattice", "protocol", "gamma", "dt", "t_max", "record_times",
              "observables", "n_disorder", "n_trajectories", "master_seed", "workers",
              "fit", "output_dir", "pm_engine"});
  RunConfig c;

  const json* lat = find(j, "lattice");
  if (!lat) fail("", "missing key \"lattice\"");
  require_object(*lat, "lattice");
  check_keys(*lat, "lattice", {"L", "J", "potential"});
  const json* L = find(*lat, "L");
  if (!L) fail("lattice", "missing key \"L\"");
  c.lattice.L = get_int(*L, "lattice.L");
  if (const json* jj = find(*lat, "J")) c.lattice.J = get_number(*jj, "lattice.J");
  if (const json* pot = find(*lat, "potential"))
    c.lattice.potential = parse_potential(*pot, "lattice.potential");

  const json* proto = find(j, "protocol");
  if (!proto) fail("", "missing key \"protocol\"");
  const std::string ps = get_string(*proto, "protocol");
  if (ps == "pm")
    c.protocol = ProtocolKind::pm;
  else if (ps == "qsd")
    c.protocol = ProtocolKind::qsd;
  else
    fail("protocol", "must be \"pm\" or \"qsd\", got \"" + ps + "\"");

  const json* gamma = find(j, "gamma");
  if (!gamma) fail("", "missing key \"gamma\"");
  c.gamma = get_number(*gamma, "gamma");
  if (const json* dt = find(j, "dt")) c.dt = get_number(*dt, "dt");
  const json* tmax = find(j, "t_max");
  if (!tmax) fail("", "missing key \"t_max\"");
  c.t_max = get_number(*tmax, "t_max");

  if (const json* rt = find(j, "record_times")) {
    if (!rt->is_array()) fail("record_times", "expected an array of numbers");
    for (std::size_t i = 0; i < rt->size(); ++i)
      c.record_times.push_back(
          get_number((*rt)[i], "record_times[" + std::to_string(i) + "]"));
  }

  if (const json* obs = find(j, "observables")) {
    require_object(*obs, "observables");
    check_keys(*obs, "observables", {"correlations", "cumulant", "i2", "i2_segment"});
    if (const json* v = find(*obs, "correlations"))
      c.observables.correlations = get_bool(*v, "observables.correlations");
    if (const json* v = find(*obs, "cumulant"))
      c.observables.cumulant = get_bool(*v, "observables.cumulant");
    if (const json* v = find(*obs, "i2")) c.observables.i2 = get_bool(*v, "observables.i2");
    if (const json* v = find(*obs, "i2_segment"))
      c.observables.i2_segment = get_int(*v, "observables.i2_segment");
  }

  if (const json* v = find(j, "n_disorder")) c.n_disorder = get_int(*v, "n_disorder");
  if (const json* v = find(j, "n_trajectories"))
    c.n_trajectories = get_int(*v, "n_trajectories");
  const json* seed = find(j, "master_seed");
  if (!seed) fail("", "missing key \"master_seed\"");
  c.master_seed = parse_master_seed(*seed, "master_seed");
  if (const json* v = find(j, "workers")) c.workers = get_int(*v, "workers");

  if (const json* fit = find(j, "fit")) {
    require_object(*fit, "fit");
    check_keys(*fit, "fit", {"lcor", "averaging", "window"});
    if (const json* v = find(*fit, "lcor")) c.fit.lcor = get_bool(*v, "fit.lcor");
    if (const json* v = find(*fit, "averaging")) {
      const std::string a = get_string(*v, "fit.averaging");
      if (a == "per_trajectory")
        c.fit.averaging = FitOptions::Averaging::per_trajectory;
      else if (a == "pooled")
        c.fit.averaging = FitOptions::Averaging::pooled;
      else
        fail("fit.averaging", "must be \"per_trajectory\" or \"pooled\"");
    }
    if (const json* v = find(*fit, "window")) {
      if (!v->is_array() || v->size() != 2)
        fail("fit.window", "expected [lo, hi]");
      Window w;
      w.lo = get_number((*v)[0], "fit.window[0]");
      w.hi = get_number((*v)[1], "fit.window[1]");
      c.fit.window = w;
    }
  }

  if (const json* v = find(j, "output_dir")) c.output_dir = get_string(*v, "output_dir");
  if (const json* v = find(j, "pm_engine")) {
    const std::string e = get_string(*v, "pm_engine");
    if (e == "automatic")
      c.pm_engine = PmParams::Engine::automatic;
    else if (e == "correlation")
      c.pm_engine = PmParams::Engine::correlation;
    else if (e == "orbital")
      c.pm_engine = PmParams::Engine::orbital;
    else
      fail("pm_engine", "must be \"automatic\", \"correlation\" or \"orbital\"");
  }

  try {
    c.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  }
  return c;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config_json(j);
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_to_json(const RunConfig& c) {
  json j;
  j["lattice"]["L"] = c.lattice.L;
  j["lattice"]["J"] = c.lattice.J;
  switch (c.lattice.potential.kind) {
    case PotentialKind::clean:
      j["lattice"]["potential"] = {{"kind", "clean"}};
      break;
    case PotentialKind::box_disorder:
      j["lattice"]["potential"] = {{"kind", "box_disorder"}, {"W", c.lattice.potential.W}};
      break;
    case PotentialKind::quasiperiodic:
      j["lattice"]["potential"] = {{"kind", "quasiperiodic"},
                                   {"V", c.lattice.potential.V},
                                   {"theta", c.lattice.potential.theta}};
      break;
  }
  j["protocol"] = c.protocol == ProtocolKind::pm ? "pm" : "qsd";
  j["gamma"] = c.gamma;
  j["dt"] = c.dt;
  j["t_max"] = c.t_max;
  j["record_times"] = c.effective_record_times();
  j["observables"] = {{"correlations", c.observables.correlations},
                      {"cumulant", c.observables.cumulant},
                      {"i2", c.observables.i2},
                      {"i2_segment", c.observables.i2_segment}};
  j["n_disorder"] = c.n_disorder;
  j["n_trajectories"] = c.n_trajectories;
  j["master_seed"] = std::to_string(c.master_seed);
  j["workers"] = c.workers;
  j["fit"]["lcor"] = c.fit.lcor;
  j["fit"]["averaging"] = c.fit.averaging == FitOptions::Averaging::pooled
                              ? "pooled"
                              : "per_trajectory";
  if (c.fit.window) j["fit"]["window"] = {c.fit.window->lo, c.fit.window->hi};
  j["output_dir"] = c.output_dir;
  switch (c.pm_engine) {
    case PmParams::Engine::automatic:
      j["pm_engine"] = "automatic";
      break;
    case PmParams::Engine::correlation:
      j["pm_engine"] = "correlation";
      break;
    case PmParams::Engine::orbital:
      j["pm_engine"] = "orbital";
      break;
  }
  return j.dump(2);
}

std::string config_digest(const RunConfig& config) {
  // execution details do not change the physics; the digest must be stable
  // across worker counts and output locations
  RunConfig canonical = config;
  canonical.workers = 0;
  canonical.output_dir.clear();
  return to_hex16(fnv1a64(config_to_json(canonical)));
}

}  // namespace monferm
