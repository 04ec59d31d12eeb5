#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "monferm/observables.hpp"

namespace monferm {

struct TrajectoryDiagnostics {
  double max_purity_residual = 0.0;
  double max_isometry_residual = 0.0;
  double r_diag_min = std::numeric_limits<double>::infinity();
  double r_diag_max = 0.0;
  long events = 0;  // measurement events (projective) or steps (diffusive)
  int extra_orthonormalizations = 0;
};

struct TrajectoryRecord {
  int disorder_index = 0;
  int trajectory_index = 0;
  std::uint64_t seed = 0;
  std::string potential_digest;
  std::vector<ObservableSnapshot> snapshots;
  TrajectoryDiagnostics diag;
  std::optional<std::string> error;  // set when the trajectory was aborted

  bool ok() const { return !error.has_value(); }
};

}  // namespace monferm
