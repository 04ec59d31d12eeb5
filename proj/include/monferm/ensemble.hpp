#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "monferm/fitting.hpp"
#include "monferm/lattice.hpp"
#include "monferm/pm_protocol.hpp"
#include "monferm/qsd_protocol.hpp"
#include "monferm/stats.hpp"
#include "monferm/trajectory.hpp"

namespace monferm {

enum class ProtocolKind { pm, qsd };

struct FitOptions {
  bool lcor = false;
  enum class Averaging { per_trajectory, pooled } averaging = Averaging::per_trajectory;
  std::optional<Window> window;  // overrides the automatic tail window
};

struct RunConfig {
  LatticeSpec lattice;
  ProtocolKind protocol = ProtocolKind::qsd;
  double gamma = 1.0;
  double dt = 0.05;  // diffusive protocol only
  double t_max = 0.0;
  std::vector<double> record_times;  // empty -> {L/2, 3L/4, L}
  SnapshotOptions observables;
  int n_disorder = 1;
  int n_trajectories = 8;  // per disorder realization
  std::uint64_t master_seed = 1;
  int workers = 0;  // 0 -> hardware concurrency
  FitOptions fit;
  std::string output_dir;  // empty -> no files, in-memory result only
  PmParams::Engine pm_engine = PmParams::Engine::automatic;

  std::vector<double> effective_record_times() const;
  void validate() const;
};

// Aggregated statistics carry the mean, the 95% CI and the standard error of
// the mean. `basis` records which level supplied the spread: "disorder" when
// at least 3 disorder means exist, otherwise "pooled" over trajectories.
struct SeriesStat {
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double se = 0.0;
  int n = 0;
};

struct TimeStat {
  double t = 0.0;
  SeriesStat s_half;
  std::optional<SeriesStat> s_cumulant;
  std::optional<SeriesStat> i2;
};

struct CorrelationStat {
  std::vector<double> r;  // 1..L/2
  std::vector<SeriesStat> c;
  SeriesStat c0;
};

struct LcorStat {
  double window_lo = 0.0, window_hi = 0.0;
  std::vector<double> values;                // one l_cor per fitted trajectory
  std::optional<SeriesStat> per_trajectory;  // absent if too few usable fits
  int n_fit_failures = 0;
  std::optional<DecayFit> pooled;  // fit of the mean curve, SE weights
  std::optional<std::string> pooled_error;
};

struct AggregateRecord {
  std::string config_digest;
  std::uint64_t master_seed = 0;
  int L = 0;
  std::string protocol;
  double gamma = 0.0;
  int n_disorder = 0;
  int n_trajectories = 0;
  int n_failed = 0;
  std::string ci_basis;  // "disorder" or "pooled"
  std::vector<TimeStat> at_times;
  TimeStat time_average;  // t field unused
  std::optional<CorrelationStat> correlations;
  std::optional<LcorStat> lcor;
  double max_purity_residual = 0.0;
  double max_isometry_residual = 0.0;
};

struct EnsembleResult {
  std::vector<TrajectoryRecord> trajectories;  // task order, failures included
  AggregateRecord aggregate;
};

// Runs n_disorder x n_trajectories trajectories on a worker pool and folds
// the statistics in task order, so the result is identical for any worker
// count. Throws EnsembleError if more than 10% of trajectories fail; fewer
// failures are excluded from the statistics and counted in the aggregate.
// Does not write any files (see io.hpp for that).
class EnsembleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

EnsembleResult run_ensemble(const RunConfig& config);

}  // namespace monferm
