#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace acerac {

/// Seeded random stream. Streams derived from the same seed with different
/// stream ids are independent, so noise, environment resets and minibatch
/// sampling never share draws.
///
/// Variate generation is implemented here rather than through
/// <random> distributions so runs are bit-reproducible across standard
/// library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal (Box-Muller).
  double normal();
  Eigen::VectorXd normal_vector(Eigen::Index n);

  /// Uniform integer on [0, n), unbiased. n must be positive.
  std::uint64_t index(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

/// Well-known stream ids used by the experiment harness.
enum class Stream : std::uint64_t {
  kInit = 1,
  kNoise = 2,
  kEnv = 3,
  kMinibatch = 4,
  kEval = 5,
};

inline Rng make_stream(std::uint64_t seed, Stream s) {
  return Rng(seed, static_cast<std::uint64_t>(s));
}

}  // namespace acerac
