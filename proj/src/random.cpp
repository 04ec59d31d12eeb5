#include "monferm/random.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace monferm {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed,
                          std::uint64_t disorder_index,
                          std::uint64_t trajectory_index) {
  std::uint64_t x = splitmix64(master_seed ^ 0xA0761D6478BD642Full);
  x = splitmix64(x ^ (disorder_index * 0x9E3779B97F4A7C15ull + 0x8BB84B93962EACC9ull));
  x = splitmix64(x ^ (trajectory_index * 0xD6E8FEB86659FD93ull + 0x2F5870A5AEE8C5F1ull));
  return x;
}

std::uint64_t derive_potential_seed(std::uint64_t master_seed,
                                    std::uint64_t disorder_index) {
  // tag outside the reachable trajectory index range
  return derive_seed(master_seed, disorder_index, 0xFFFFFFFFFFFFFFFFull);
}

std::uint64_t RandomSource::uniform_int(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double RandomSource::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u = uniform_open_closed();
  const double v = uniform01();
  const double rho = std::sqrt(-2.0 * std::log(u));
  const double theta = 6.283185307179586476925286766559 * v;
  spare_ = rho * std::sin(theta);
  has_spare_ = true;
  return rho * std::cos(theta);
}

std::string RandomSource::serialize_state() const {
  std::ostringstream os;
  os << engine_;
  return os.str();
}

void RandomSource::restore_state(const std::string& s) {
  std::istringstream is(s);
  is >> engine_;
  if (is.fail()) throw std::runtime_error("RandomSource: bad serialized state");
  has_spare_ = false;
  spare_ = 0.0;
}

}  // namespace monferm
