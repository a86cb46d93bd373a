#include "mandera/rng.hpp"

#include <cmath>

namespace mandera {

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t state = seed ^ 0xd6e8feb86659fd93ull;
  std::uint64_t out = splitmix64(state);
  for (std::uint64_t part : path) {
    state ^= part + 0x9e3779b97f4a7c15ull + (state << 6) + (state >> 2);
    out = splitmix64(state);
  }
  return out;
}

std::uint64_t Rng::uniform_below(std::uint64_t bound) {
  // rejection keeps the draw unbiased
  std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform01() - 1.0;
    v = 2.0 * uniform01() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

}  // namespace mandera
