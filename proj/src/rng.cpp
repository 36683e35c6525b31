#include "bkb/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bkb {

CounterRng CounterRng::stream(std::uint64_t seed, Stream tag, std::uint64_t index) {
  const std::uint64_t base = mix64(seed ^ mix64(static_cast<std::uint64_t>(tag)));
  return CounterRng(mix64(base + mix64(index)));
}

double CounterRng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t CounterRng::uniform_index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: empty range");
  auto idx = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return idx < n ? idx : n - 1;
}

}  // namespace bkb
