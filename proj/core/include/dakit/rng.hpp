#pragma once

#include <cstdint>
#include <random>

namespace dakit {

/// Deterministic random stream. Identical (seed, stream) pairs yield
/// identical draws; distinct streams are decorrelated through a splitmix64
/// hash of the pair. Normal variates use Box-Muller on the raw engine output
/// so draws do not depend on the standard library's distribution internals.
class SeededRng {
public:
  explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64() { return eng_(); }

  /// uniform in [0, 1)
  double uniform();
  /// uniform in [a, b)
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  /// standard normal
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  static std::uint64_t mix(std::uint64_t a, std::uint64_t b);

private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

} // namespace dakit
