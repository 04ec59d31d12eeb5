#include "monferm/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "monferm/digest.hpp"

namespace monferm {

using nlohmann::json;

namespace {

// shortest round-trip representation; stable for identical bit patterns
std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string sanitize(std::string s) {
  for (char& ch : s)
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  return s;
}

json stat_json(const SeriesStat& s) {
  return json{{"mean", s.mean},
              {"ci_low", s.ci_low},
              {"ci_high", s.ci_high},
              {"se", s.se},
              {"n", s.n}};
}

json time_stat_json(const TimeStat& ts, bool with_t) {
  json j;
  if (with_t) j["t"] = ts.t;
  j["s_half"] = stat_json(ts.s_half);
  if (ts.s_cumulant) j["s_cumulant"] = stat_json(*ts.s_cumulant);
  if (ts.i2) j["i2"] = stat_json(*ts.i2);
  return j;
}

json decay_fit_json(const DecayFit& f) {
  return json{{"kind", f.kind == DecayKind::exponential ? "exponential" : "power_law"},
              {"parameter", f.parameter},
              {"amplitude", f.amplitude},
              {"ci_low", f.ci_low},
              {"ci_high", f.ci_high},
              {"rss", f.rss},
              {"n_points", f.n_points},
              {"window", {f.r_min, f.r_max}}};
}

}  // namespace

std::string aggregate_to_json(const AggregateRecord& agg) {
  json j;
  j["config_digest"] = agg.config_digest;
  j["master_seed"] = std::to_string(agg.master_seed);
  j["L"] = agg.L;
  j["protocol"] = agg.protocol;
  j["gamma"] = agg.gamma;
  j["counts"] = {{"n_disorder", agg.n_disorder},
                 {"n_trajectories", agg.n_trajectories},
                 {"n_failed", agg.n_failed}};
  j["ci_basis"] = agg.ci_basis;
  j["at_times"] = json::array();
  for (const TimeStat& ts : agg.at_times) j["at_times"].push_back(time_stat_json(ts, true));
  j["time_average"] = time_stat_json(agg.time_average, false);
  if (agg.correlations) {
    const CorrelationStat& cs = *agg.correlations;
    json c;
    c["c0"] = stat_json(cs.c0);
    c["r"] = cs.r;
    json cm = json::array(), cl = json::array(), ch = json::array(), se = json::array();
    for (const SeriesStat& s : cs.c) {
      cm.push_back(s.mean);
      cl.push_back(s.ci_low);
      ch.push_back(s.ci_high);
      se.push_back(s.se);
    }
    c["c_mean"] = std::move(cm);
    c["c_ci_low"] = std::move(cl);
    c["c_ci_high"] = std::move(ch);
    c["c_se"] = std::move(se);
    j["correlations"] = std::move(c);
  }
  if (agg.lcor) {
    const LcorStat& ls = *agg.lcor;
    json l;
    l["window"] = {ls.window_lo, ls.window_hi};
    l["n_fit_failures"] = ls.n_fit_failures;
    l["values"] = ls.values;
    if (ls.per_trajectory) l["per_trajectory"] = stat_json(*ls.per_trajectory);
    if (ls.pooled) l["pooled"] = decay_fit_json(*ls.pooled);
    if (ls.pooled_error) l["pooled_error"] = *ls.pooled_error;
    j["lcor"] = std::move(l);
  }
  j["diagnostics"] = {{"max_purity_residual", agg.max_purity_residual},
                      {"max_isometry_residual", agg.max_isometry_residual}};
  return j.dump(2) + "\n";
}

std::string trajectories_to_csv(const EnsembleResult& result, const std::string& digest) {
  std::ostringstream os;
  os << "# monferm trajectories v1\n";
  os << "# config_digest=" << digest << "\n";
  os << "disorder,trajectory,seed,potential_digest,t,s_half,i2,s_cumulant,"
        "events,max_purity_residual,max_isometry_residual,status\n";
  for (const TrajectoryRecord& tr : result.trajectories) {
    const std::string prefix = std::to_string(tr.disorder_index) + "," +
                               std::to_string(tr.trajectory_index) + "," +
                               std::to_string(tr.seed) + "," + tr.potential_digest;
    const std::string diag = std::to_string(tr.diag.events) + "," +
                             fmt(tr.diag.max_purity_residual) + "," +
                             fmt(tr.diag.max_isometry_residual);
    if (!tr.ok()) {
      os << prefix << ",,,,," << diag << ",failed: " << sanitize(*tr.error) << "\n";
      continue;
    }
    for (const ObservableSnapshot& snap : tr.snapshots) {
      os << prefix << "," << fmt(snap.t) << "," << fmt(snap.s_half) << ",";
      if (snap.i2) os << fmt(*snap.i2);
      os << ",";
      if (snap.s_cumulant) os << fmt(*snap.s_cumulant);
      os << "," << diag << ",ok\n";
    }
  }
  return os.str();
}

std::string trajectory_correlations_to_csv(const EnsembleResult& result,
                                           const std::string& digest) {
  std::ostringstream os;
  os << "# monferm trajectory correlations v1\n";
  os << "# config_digest=" << digest << "\n";
  int rmax = 0;
  for (const TrajectoryRecord& tr : result.trajectories)
    for (const ObservableSnapshot& snap : tr.snapshots)
      rmax = std::max(rmax, static_cast<int>(snap.c_of_r.size()));
  os << "disorder,trajectory,t,c0";
  for (int r = 1; r <= rmax; ++r) os << ",c_" << r;
  os << "\n";
  for (const TrajectoryRecord& tr : result.trajectories) {
    if (!tr.ok()) continue;
    for (const ObservableSnapshot& snap : tr.snapshots) {
      if (snap.c_of_r.size() == 0) continue;
      os << tr.disorder_index << "," << tr.trajectory_index << "," << fmt(snap.t) << ","
         << fmt(snap.c0);
      for (int q = 0; q < snap.c_of_r.size(); ++q) os << "," << fmt(snap.c_of_r(q));
      os << "\n";
    }
  }
  return os.str();
}

std::string correlations_to_csv(const AggregateRecord& agg, const std::string& digest) {
  std::ostringstream os;
  os << "# monferm correlations v1\n";
  os << "# config_digest=" << digest << "\n";
  os << "# r=0 row: mean of D_ii (1 - D_ii), positive by convention\n";
  os << "r,c_mean,c_ci_low,c_ci_high,c_se,n\n";
  if (!agg.correlations) return os.str();
  const CorrelationStat& cs = *agg.correlations;
  os << "0," << fmt(cs.c0.mean) << "," << fmt(cs.c0.ci_low) << "," << fmt(cs.c0.ci_high)
     << "," << fmt(cs.c0.se) << "," << cs.c0.n << "\n";
  for (std::size_t i = 0; i < cs.r.size(); ++i) {
    const SeriesStat& s = cs.c[i];
    os << fmt(cs.r[i]) << "," << fmt(s.mean) << "," << fmt(s.ci_low) << ","
       << fmt(s.ci_high) << "," << fmt(s.se) << "," << s.n << "\n";
  }
  return os.str();
}

void write_run_outputs(const std::string& dir, const RunConfig& config,
                       EnsembleResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::string digest = config_digest(config);
  result.aggregate.config_digest = digest;

  // embed the canonical config so the run is reproducible from the file
  RunConfig canonical = config;
  canonical.workers = 0;
  canonical.output_dir.clear();
  json agg = json::parse(aggregate_to_json(result.aggregate));
  agg["config"] = json::parse(config_to_json(canonical));

  auto write_file = [&](const std::string& name, const std::string& text) {
    const fs::path p = fs::path(dir) / name;
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open output file: " + p.string());
    os << text;
    if (!os) throw std::runtime_error("write failed: " + p.string());
  };

  write_file("aggregate.json", agg.dump(2) + "\n");
  write_file("trajectories.csv", trajectories_to_csv(result, digest));
  if (result.aggregate.correlations) {
    write_file("correlations.csv", correlations_to_csv(result.aggregate, digest));
    write_file("trajectory_correlations.csv",
               trajectory_correlations_to_csv(result, digest));
  }
}

CorrelationTable read_correlations_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  CorrelationTable out;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // column header row
      continue;
    }
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() < 2) throw std::runtime_error("malformed row in " + path);
    const double r = std::stod(cells[0]);
    if (r == 0.0) continue;
    out.r.push_back(r);
    out.c.push_back(std::stod(cells[1]));
    out.se.push_back(cells.size() > 4 && !cells[4].empty() ? std::stod(cells[4]) : 0.0);
  }
  if (out.r.empty()) throw std::runtime_error("no correlator rows in " + path);
  return out;
}

namespace {

std::string stat_line(const json& s) {
  std::ostringstream os;
  os << s.at("mean").get<double>() << "  [" << s.at("ci_low").get<double>() << ", "
     << s.at("ci_high").get<double>() << "]  (n=" << s.at("n").get<int>() << ")";
  return os.str();
}

}  // namespace

std::string report_from_aggregate_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("aggregate is not valid JSON: ") + e.what());
  }
  std::ostringstream os;
  os << "monferm run report\n";
  os << "  digest:    " << j.value("config_digest", std::string("?")) << "\n";
  os << "  system:    L=" << j.value("L", 0) << "  protocol=" << j.value("protocol", std::string("?"))
     << "  gamma=" << j.value("gamma", 0.0) << "\n";
  if (j.contains("counts")) {
    const json& c = j["counts"];
    os << "  ensemble:  " << c.value("n_disorder", 0) << " disorder x "
       << c.value("n_trajectories", 0) << " trajectories, " << c.value("n_failed", 0)
       << " failed, ci_basis=" << j.value("ci_basis", std::string("?")) << "\n";
  }
  if (j.contains("at_times"))
    for (const json& ts : j["at_times"])
      os << "  S_half(t=" << ts.at("t").get<double>() << "):  " << stat_line(ts.at("s_half"))
         << "\n";
  if (j.contains("time_average"))
    os << "  S_half(avg):  " << stat_line(j["time_average"].at("s_half")) << "\n";
  if (j.contains("lcor")) {
    const json& l = j["lcor"];
    if (l.contains("per_trajectory"))
      os << "  l_cor (per trajectory):  " << stat_line(l.at("per_trajectory")) << "\n";
    if (l.contains("pooled")) {
      const json& p = l.at("pooled");
      os << "  l_cor (pooled fit):      " << p.at("parameter").get<double>() << "  ["
         << p.at("ci_low").get<double>() << ", " << p.at("ci_high").get<double>()
         << "]  (" << p.at("n_points").get<int>() << " points)\n";
    }
    if (l.contains("window"))
      os << "  fit window:  [" << l.at("window")[0].get<double>() << ", "
         << l.at("window")[1].get<double>() << "]\n";
  }
  if (j.contains("diagnostics")) {
    const json& d = j["diagnostics"];
    os << "  residuals:  purity " << d.value("max_purity_residual", 0.0) << ", isometry "
       << d.value("max_isometry_residual", 0.0) << "\n";
  }
  return os.str();
}

ReportTables write_report_tables(const std::vector<std::string>& aggregate_paths,
                                 const std::string& scaling_json,
                                 const std::string& outdir) {
  namespace fs = std::filesystem;
  if (aggregate_paths.empty())
    throw std::runtime_error("report: no aggregate inputs given");
  fs::create_directories(outdir);

  struct LcorPoint {
    double gamma, lcor, ci_low, ci_high;
  };
  std::vector<LcorPoint> points;
  ReportTables out;
  std::ostringstream summary;

  for (const std::string& path : aggregate_paths) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("report: cannot open " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    json j;
    try {
      j = json::parse(ss.str());
    } catch (const json::parse_error& e) {
      throw std::runtime_error(path + " is not valid JSON: " + e.what());
    }
    const std::string digest = j.value("config_digest", std::string("nodigest"));
    const double gamma = j.value("gamma", 0.0);

    if (j.contains("correlations")) {
      const json& c = j["correlations"];
      const auto& r = c.at("r");
      const auto& cm = c.at("c_mean");
      const auto& cl = c.at("c_ci_low");
      const auto& ch = c.at("c_ci_high");
      const fs::path p = fs::path(outdir) / ("corr_" + digest + ".csv");
      std::ofstream os(p, std::ios::binary | std::ios::trunc);
      if (!os) throw std::runtime_error("report: cannot open " + p.string());
      os << "# source=" << path << "\n";
      os << "# config_digest=" << digest << "\n";
      os << "# gamma=" << fmt(gamma) << "\n";
      os << "r,abs_c,ci_low,ci_high\n";
      for (std::size_t i = 0; i < r.size(); ++i) {
        // |C| flips the band: the upper CI edge of C is the lower edge of |C|
        const double m = cm[i].get<double>();
        const double lo = ch[i].get<double>();
        const double hi = cl[i].get<double>();
        os << fmt(r[i].get<double>()) << "," << fmt(std::fabs(m)) << ","
           << fmt(std::fabs(lo)) << "," << fmt(std::fabs(hi)) << "\n";
      }
      out.written.push_back(p.string());
    }

    bool have_lcor = false;
    if (j.contains("lcor")) {
      const json& l = j["lcor"];
      if (l.contains("per_trajectory")) {
        const json& s = l["per_trajectory"];
        points.push_back({gamma, s.at("mean").get<double>(),
                          s.at("ci_low").get<double>(), s.at("ci_high").get<double>()});
        have_lcor = true;
      } else if (l.contains("pooled")) {
        const json& p = l["pooled"];
        points.push_back({gamma, p.at("parameter").get<double>(),
                          p.at("ci_low").get<double>(), p.at("ci_high").get<double>()});
        have_lcor = true;
      }
    }
    if (!have_lcor) out.missing.push_back(path);
  }

  if (!points.empty()) {
    std::sort(points.begin(), points.end(),
              [](const LcorPoint& a, const LcorPoint& b) { return a.gamma < b.gamma; });
    const fs::path p = fs::path(outdir) / "lcor_vs_gamma.csv";
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("report: cannot open " + p.string());
    os << "# monferm lcor table v1\n";
    if (!scaling_json.empty()) {
      os << "# scaling_fit:\n";
      std::istringstream sj(scaling_json);
      std::string line;
      while (std::getline(sj, line)) os << "# " << line << "\n";
    }
    os << "gamma,lcor,ci_low,ci_high,ln_lcor\n";
    for (const LcorPoint& q : points)
      os << fmt(q.gamma) << "," << fmt(q.lcor) << "," << fmt(q.ci_low) << ","
         << fmt(q.ci_high) << "," << fmt(q.lcor > 0.0 ? std::log(q.lcor) : 0.0) << "\n";
    out.written.push_back(p.string());
  }

  summary << "report: wrote " << out.written.size() << " table(s) to " << outdir;
  if (!out.missing.empty()) {
    summary << "; missing l_cor series in:";
    for (const std::string& m : out.missing) summary << " " << m;
  }
  out.summary = summary.str();
  return out;
}

}  // namespace monferm
