#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Core>

namespace fiberalign {

// Deterministic, splittable random source.
//
// A stream is identified by a 64-bit key. Child streams are derived by
// hashing the parent key with a name or an index, so adding a new consumer
// never shifts the draws seen by an existing one, and work split into
// indexed blocks produces the same numbers no matter how many threads run it.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  RandomStream substream(std::string_view name) const;
  RandomStream substream(std::uint64_t index) const;

  std::uint64_t key() const noexcept { return key_; }

  std::mt19937_64& engine() noexcept { return engine_; }

  // Uniform on [lo, hi).
  double uniform(double lo = 0.0, double hi = 1.0);
  double normal(double mean = 0.0, double stddev = 1.0);

  Eigen::VectorXd normal_vector(Eigen::Index n);
  // Uniform direction scaled by a radius drawn uniformly from [0, max_radius].
  Eigen::VectorXd ball_perturbation(Eigen::Index n, double max_radius);

 private:
  struct FromKey {};
  RandomStream(FromKey, std::uint64_t key);

  std::uint64_t key_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace fiberalign
