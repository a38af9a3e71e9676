#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace partcolor {

// Deterministic random source keyed by (seed, stream). Every solver run owns one;
// child streams are derived with split() so concurrent runs never share state.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  // Independent source whose stream id is derived from this one and `child`.
  GaussianSource split(std::uint64_t child) const;

  std::uint64_t next_u64() { return engine_(); }
  double uniform();  // in [0, 1)
  std::size_t uniform_index(std::size_t n);
  bool coin() { return (engine_() >> 63) != 0; }
  double normal() { return normal_(engine_); }
  Eigen::VectorXd normal_vector(Eigen::Index m);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace partcolor
