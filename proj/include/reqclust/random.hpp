#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace reqclust {

/// Mixes a base seed with a stream index so that independent work items
/// (restarts, bootstrap replicates) get uncorrelated, order-free seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Seeded generator whose output is identical on every platform.
///
/// The standard distributions are implementation-defined, so the
/// uniform/normal transforms are done here on top of the raw 64-bit
/// Mersenne Twister stream, which the standard does pin down.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace reqclust
