#include "monferm/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "monferm/digest.hpp"

namespace monferm {

std::vector<double> RunConfig::effective_record_times() const {
  if (!record_times.empty()) return record_times;
  const double L = static_cast<double>(lattice.L);
  return {L / 2.0, 3.0 * L / 4.0, L};
}

void RunConfig::validate() const {
  lattice.validate();
  if (!(gamma >= 0.0) || !std::isfinite(gamma))
    throw std::invalid_argument("gamma must be >= 0 and finite");
  if (n_disorder < 1) throw std::invalid_argument("n_disorder must be >= 1");
  if (n_trajectories < 1) throw std::invalid_argument("n_trajectories must be >= 1");
  if (n_disorder > 1 && !lattice.potential.is_random())
    throw std::invalid_argument(
        "n_disorder > 1 requires box_disorder with W > 0; other potentials have "
        "a single realization");
  if (workers < 0) throw std::invalid_argument("workers must be >= 0");
  if (fit.lcor && !observables.correlations)
    throw std::invalid_argument("fit.lcor requires observables.correlations");
  if (fit.window && !(fit.window->lo >= 0.0 && fit.window->hi > fit.window->lo))
    throw std::invalid_argument("fit.window must satisfy 0 <= lo < hi");
  // protocol-level validation with the derived parameter structs
  if (protocol == ProtocolKind::pm) {
    PmParams p;
    p.gamma = gamma;
    p.t_max = t_max;
    p.record_times = effective_record_times();
    p.validate();
  } else {
    QsdParams q;
    q.gamma = gamma;
    q.dt = dt;
    q.t_max = t_max;
    q.record_times = effective_record_times();
    q.validate();
  }
}

namespace {

struct TwoLevel {
  // values grouped by disorder realization; empty groups allowed
  std::vector<std::vector<double>> groups;

  void add(int d, double v) { groups[static_cast<std::size_t>(d)].push_back(v); }
};

SeriesStat finish(const TwoLevel& tl, const std::string& basis) {
  std::vector<double> disorder_means;
  std::vector<double> pooled;
  for (const auto& g : tl.groups) {
    if (g.empty()) continue;
    disorder_means.push_back(mean(g));
    pooled.insert(pooled.end(), g.begin(), g.end());
  }
  SeriesStat out;
  if (disorder_means.empty()) return out;
  const double grand = mean(disorder_means);
  const std::vector<double>& spread =
      basis == "disorder" ? disorder_means : pooled;
  const MeanCi ci = confidence_interval(spread);
  out.mean = grand;
  out.n = static_cast<int>(spread.size());
  if (ci.defined) {
    const double half = 0.5 * (ci.ci_high - ci.ci_low);
    out.ci_low = grand - half;
    out.ci_high = grand + half;
    const double tq = student_t_quantile(0.975, static_cast<double>(out.n - 1));
    out.se = half / tq;
  } else {
    out.ci_low = out.ci_high = grand;
  }
  return out;
}

}  // namespace

EnsembleResult run_ensemble(const RunConfig& config) {
  config.validate();
  const int nd = config.n_disorder;
  const int nt = config.n_trajectories;
  const int n_tasks = nd * nt;
  const std::vector<double> record_times = config.effective_record_times();

  // one Hamiltonian per disorder realization, shared between its trajectories
  std::vector<std::shared_ptr<const Hamiltonian>> hams;
  hams.reserve(static_cast<std::size_t>(nd));
  for (int d = 0; d < nd; ++d) {
    RandomSource pot_rng(derive_potential_seed(config.master_seed,
                                               static_cast<std::uint64_t>(d)));
    hams.push_back(Hamiltonian::build(config.lattice, pot_rng));
  }

  PmParams pm;
  pm.gamma = config.gamma;
  pm.t_max = config.t_max;
  pm.record_times = record_times;
  pm.observables = config.observables;
  pm.engine = config.pm_engine;
  QsdParams qsd;
  qsd.gamma = config.gamma;
  qsd.dt = config.dt;
  qsd.t_max = config.t_max;
  qsd.record_times = record_times;
  qsd.observables = config.observables;

  std::vector<TrajectoryRecord> records(static_cast<std::size_t>(n_tasks));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int task = next.fetch_add(1);
      if (task >= n_tasks) return;
      const int d = task / nt;
      const int k = task % nt;
      TrajectoryRecord rec;
      try {
        const std::uint64_t seed =
            derive_seed(config.master_seed, static_cast<std::uint64_t>(d),
                        static_cast<std::uint64_t>(k));
        rec = config.protocol == ProtocolKind::pm
                  ? run_pm_trajectory(hams[static_cast<std::size_t>(d)], pm, seed)
                  : run_qsd_trajectory(hams[static_cast<std::size_t>(d)], qsd, seed);
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
      rec.disorder_index = d;
      rec.trajectory_index = k;
      records[static_cast<std::size_t>(task)] = std::move(rec);
    }
  };

  int n_workers = config.workers > 0
                      ? config.workers
                      : static_cast<int>(std::thread::hardware_concurrency());
  n_workers = std::clamp(n_workers, 1, n_tasks);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // --- fold, strictly in task order ---------------------------------------
  int n_failed = 0;
  for (const auto& r : records)
    if (!r.ok()) ++n_failed;
  if (10 * n_failed > n_tasks)
    throw EnsembleError(std::to_string(n_failed) + " of " + std::to_string(n_tasks) +
                        " trajectories failed (over the 10% budget)");

  AggregateRecord agg;
  agg.master_seed = config.master_seed;
  agg.L = config.lattice.L;
  agg.protocol = config.protocol == ProtocolKind::pm ? "pm" : "qsd";
  agg.gamma = config.gamma;
  agg.n_disorder = nd;
  agg.n_trajectories = nt;
  agg.n_failed = n_failed;

  int live_groups = 0;
  {
    std::vector<bool> seen(static_cast<std::size_t>(nd), false);
    for (const auto& r : records)
      if (r.ok()) seen[static_cast<std::size_t>(r.disorder_index)] = true;
    for (bool b : seen) live_groups += b ? 1 : 0;
  }
  agg.ci_basis = live_groups >= 3 ? "disorder" : "pooled";

  const std::size_t n_times = record_times.size();
  auto make_tl = [&] {
    TwoLevel tl;
    tl.groups.resize(static_cast<std::size_t>(nd));
    return tl;
  };

  const bool want_cum = config.observables.cumulant;
  const bool want_i2 = config.observables.i2;
  const bool want_corr = config.observables.correlations;
  const int rmax = config.lattice.L / 2;

  std::vector<TwoLevel> s_half_t(n_times, make_tl()), s_cum_t, i2_t;
  if (want_cum) s_cum_t.assign(n_times, make_tl());
  if (want_i2) i2_t.assign(n_times, make_tl());
  TwoLevel s_half_avg = make_tl(), s_cum_avg = make_tl(), i2_avg = make_tl();
  TwoLevel c0_tl = make_tl();
  std::vector<TwoLevel> c_tl;
  if (want_corr) c_tl.assign(static_cast<std::size_t>(rmax), make_tl());
  // per-trajectory time-averaged correlation curves, for the l_cor fits
  std::vector<Eigen::VectorXd> traj_curves;
  std::vector<int> traj_curve_disorder;

  for (const auto& r : records) {
    if (!r.ok()) continue;
    if (r.snapshots.size() != n_times)
      throw EnsembleError("trajectory produced an unexpected snapshot count");
    agg.max_purity_residual =
        std::max(agg.max_purity_residual, r.diag.max_purity_residual);
    agg.max_isometry_residual =
        std::max(agg.max_isometry_residual, r.diag.max_isometry_residual);
    const int d = r.disorder_index;
    double sh = 0.0, sc = 0.0, si = 0.0, c0 = 0.0;
    Eigen::VectorXd curve = Eigen::VectorXd::Zero(rmax);
    for (std::size_t j = 0; j < n_times; ++j) {
      const ObservableSnapshot& snap = r.snapshots[j];
      s_half_t[j].add(d, snap.s_half);
      sh += snap.s_half;
      if (want_cum) {
        s_cum_t[j].add(d, snap.s_cumulant.value());
        sc += snap.s_cumulant.value();
      }
      if (want_i2) {
        i2_t[j].add(d, snap.i2.value());
        si += snap.i2.value();
      }
      if (want_corr) {
        curve += snap.c_of_r;
        c0 += snap.c0;
      }
    }
    const double inv = 1.0 / static_cast<double>(n_times);
    s_half_avg.add(d, sh * inv);
    if (want_cum) s_cum_avg.add(d, sc * inv);
    if (want_i2) i2_avg.add(d, si * inv);
    if (want_corr) {
      curve *= inv;
      c0_tl.add(d, c0 * inv);
      for (int q = 0; q < rmax; ++q) c_tl[static_cast<std::size_t>(q)].add(d, curve(q));
      traj_curves.push_back(curve);
      traj_curve_disorder.push_back(d);
    }
  }

  for (std::size_t j = 0; j < n_times; ++j) {
    TimeStat ts;
    ts.t = record_times[j];
    ts.s_half = finish(s_half_t[j], agg.ci_basis);
    if (want_cum) ts.s_cumulant = finish(s_cum_t[j], agg.ci_basis);
    if (want_i2) ts.i2 = finish(i2_t[j], agg.ci_basis);
    agg.at_times.push_back(ts);
  }
  agg.time_average.s_half = finish(s_half_avg, agg.ci_basis);
  if (want_cum) agg.time_average.s_cumulant = finish(s_cum_avg, agg.ci_basis);
  if (want_i2) agg.time_average.i2 = finish(i2_avg, agg.ci_basis);

  if (want_corr) {
    CorrelationStat cs;
    cs.r.resize(static_cast<std::size_t>(rmax));
    cs.c.resize(static_cast<std::size_t>(rmax));
    for (int q = 0; q < rmax; ++q) {
      cs.r[static_cast<std::size_t>(q)] = q + 1;
      cs.c[static_cast<std::size_t>(q)] = finish(c_tl[static_cast<std::size_t>(q)],
                                                 agg.ci_basis);
    }
    cs.c0 = finish(c0_tl, agg.ci_basis);
    agg.correlations = std::move(cs);
  }

  if (config.fit.lcor && want_corr && !traj_curves.empty()) {
    LcorStat ls;
    std::vector<double> rv(static_cast<std::size_t>(rmax));
    std::vector<double> cmean(static_cast<std::size_t>(rmax));
    std::vector<double> cse(static_cast<std::size_t>(rmax));
    bool have_se = true;
    for (int q = 0; q < rmax; ++q) {
      rv[static_cast<std::size_t>(q)] = q + 1;
      cmean[static_cast<std::size_t>(q)] = agg.correlations->c[static_cast<std::size_t>(q)].mean;
      const double se = agg.correlations->c[static_cast<std::size_t>(q)].se;
      cse[static_cast<std::size_t>(q)] = se;
      if (!(se > 0.0)) have_se = false;
    }
    Window win;
    if (config.fit.window) {
      win = *config.fit.window;
    } else {
      const double guess = estimate_lcor_guess(rv, cmean);
      win = default_exponential_window(guess, config.lattice.L);
    }
    ls.window_lo = win.lo;
    ls.window_hi = win.hi;

    TwoLevel l_tl = make_tl();
    for (std::size_t i = 0; i < traj_curves.size(); ++i) {
      std::vector<double> cv(traj_curves[i].data(), traj_curves[i].data() + rmax);
      try {
        const DecayFit f = fit_exponential(rv, cv, {}, win.lo, win.hi);
        l_tl.add(traj_curve_disorder[i], f.parameter);
        ls.values.push_back(f.parameter);
      } catch (const std::exception&) {
        ++ls.n_fit_failures;
      }
    }
    const SeriesStat per_traj = finish(l_tl, agg.ci_basis);
    if (per_traj.n > 0) ls.per_trajectory = per_traj;

    try {
      ls.pooled = fit_exponential(rv, cmean, have_se ? cse : std::vector<double>{},
                                  win.lo, win.hi);
    } catch (const std::exception& e) {
      ls.pooled_error = e.what();
    }
    agg.lcor = std::move(ls);
  }

  EnsembleResult out;
  out.trajectories = std::move(records);
  out.aggregate = std::move(agg);
  return out;
}

}  // namespace monferm
