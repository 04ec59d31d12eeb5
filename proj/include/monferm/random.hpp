#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace monferm {

// SplitMix64 finalizer (Steele/Lea/Flood). Used for seed derivation only.
std::uint64_t splitmix64(std::uint64_t x);

// Deterministic per-trajectory seed. Bit-stable across platforms and worker
// counts: the same (master, disorder, trajectory) triple always yields the
// same stream, so scheduling order cannot change results.
std::uint64_t derive_seed(std::uint64_t master_seed,
                          std::uint64_t disorder_index,
                          std::uint64_t trajectory_index);

// Disorder potentials get their own stream, tagged so it can never collide
// with a trajectory stream of the same disorder index.
std::uint64_t derive_potential_seed(std::uint64_t master_seed,
                                    std::uint64_t disorder_index);

// mt19937_64 core with hand-rolled distributions. The standard library's
// distribution objects are implementation-defined, which would break the
// byte-identical-aggregate guarantee across toolchains; these are not.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : engine_(seed) {}

  // uniform on [0, 1), 53-bit resolution
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // uniform on (0, 1]; safe argument for log()
  double uniform_open_closed() { return 1.0 - uniform01(); }

  // uniform integer in [0, n), rejection sampled, no modulo bias
  std::uint64_t uniform_int(std::uint64_t n);

  // standard normal via Box-Muller, one spare cached
  double gaussian();

  std::uint64_t raw() { return engine_(); }

  // textual engine state for checkpoints; gaussian spare is dropped on
  // purpose (checkpoints only happen between steps, where it is empty)
  std::string serialize_state() const;
  void restore_state(const std::string& s);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace monferm
