#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "monferm/gaussian_state.hpp"
#include "monferm/lattice.hpp"
#include "monferm/trajectory.hpp"

namespace monferm {

// Projective monitoring: local occupations n_i are measured at Poisson times
// with total rate gamma * N, site chosen uniformly, outcome Born-sampled.
struct PmParams {
  double gamma = 1.0;  // per-particle measurement rate, >= 0
  double t_max = 0.0;
  std::vector<double> record_times;  // ascending, within (0, t_max]
  SnapshotOptions observables;
  enum class Engine { automatic, correlation, orbital } engine = Engine::automatic;

  void validate() const;
};

// Exponential waiting time with rate gamma * n_particles. Consumes exactly
// one uniform draw. Infinite when the rate is zero.
double sample_waiting_time(double gamma, int n_particles, RandomSource& rng);

// Heisenberg propagation D -> e^{-iHt} D e^{+iHt} through the cached
// eigenbasis of H.
CorrelationMatrix propagate_unitary(const CorrelationMatrix& d, const Hamiltonian& h,
                                    double t);

// One Born-sampled occupation measurement on `site`. Consumes exactly one
// uniform draw. Returns the collapsed matrix and the outcome (0 or 1). When
// the Born weight of the sampled branch is below kTolBranch the opposite
// outcome is forced.
std::pair<CorrelationMatrix, int> project_site(const CorrelationMatrix& d, int site,
                                               RandomSource& rng);

// Full trajectory from the Neel state. Per event the stream is consumed in a
// fixed order: waiting time, site, Born draw. Snapshots are taken exactly at
// the requested times (the state is propagated to each record time before the
// next event is applied). Engine::orbital is an exact rotation-based update
// on the orbital coefficients, kept bit-compatible in its random stream with
// Engine::correlation; automatic switches to it above L = 96.
TrajectoryRecord run_pm_trajectory(std::shared_ptr<const Hamiltonian> h,
                                   const PmParams& params, std::uint64_t seed);

}  // namespace monferm
