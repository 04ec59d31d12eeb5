#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "monferm/gaussian_state.hpp"
#include "monferm/lattice.hpp"
#include "monferm/trajectory.hpp"

namespace monferm {

// Continuous monitoring (quantum state diffusion). The orbital coefficients
// follow dU = G(t) U dt with
//   G = -i H + diag(dW_i/dt) + (2 <n_i> - 1) gamma
// where the dW_i are independent Wiener increments of variance gamma dt and
// <n_i> is the instantaneous occupation. The nonlinear norm terms keep the
// drift bounded; exact normalization is restored each step.
struct QsdParams {
  double gamma = 1.0;
  double dt = 0.05;  // validated up to 0.1
  double t_max = 0.0;
  std::vector<double> record_times;
  SnapshotOptions observables;

  void validate() const;
};

// One set of Wiener increments, N(0, gamma dt) per site. Consumes 2*ceil(L/2)
// underlying uniforms (Box-Muller pairs).
Eigen::VectorXd sample_noise(int L, double gamma, double dt, RandomSource& rng);

struct QsdStepReport {
  double gram_residual_pre = 0.0;
  double r_diag_min = 0.0;
  double r_diag_max = 0.0;
  double probe_residual_post = 0.0;
  bool second_pass = false;
};

// One step: classical fourth-order Runge-Kutta on dU = G U dt with the noise
// frozen across the substages, then Cholesky-QR re-orthonormalization. The
// occupations entering G are recomputed at every substage from the raw
// substage state.
QsdStepReport qsd_step(StateCoefficients& s, const Hamiltonian& h,
                       const QsdParams& params, RandomSource& rng);

// Full trajectory from the Neel state. `resume` continues from a checkpoint
// (records strictly after resume->t are taken); `capture` receives the final
// state when non-null.
TrajectoryRecord run_qsd_trajectory(std::shared_ptr<const Hamiltonian> h,
                                    const QsdParams& params, std::uint64_t seed,
                                    const TrajectoryCheckpoint* resume = nullptr,
                                    TrajectoryCheckpoint* capture = nullptr);

}  // namespace monferm
