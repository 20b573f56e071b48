#include "dakit/rng.hpp"

#include <cmath>

namespace dakit {

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}
} // namespace

std::uint64_t SeededRng::mix(std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(a) ^ (0x9E3779B97F4A7C15ULL + b));
}

SeededRng::SeededRng(std::uint64_t seed, std::uint64_t stream) : eng_(mix(seed, stream)) {}

double SeededRng::uniform() {
  // 53 random mantissa bits -> [0, 1)
  return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double SeededRng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double th = 2.0 * M_PI * u2;
  spare_ = r * std::sin(th);
  have_spare_ = true;
  return r * std::cos(th);
}

} // namespace dakit
