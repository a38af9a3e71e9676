#include "partcolor/rng.hpp"

namespace partcolor {

std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

GaussianSource::GaussianSource(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(mix64(seed ^ mix64(stream + 0x51ed270b27f1a3c5ULL))) {}

GaussianSource GaussianSource::split(std::uint64_t child) const {
  return GaussianSource(seed_, mix64(stream_ * 0x100000001b3ULL + child + 1));
}

double GaussianSource::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t GaussianSource::uniform_index(std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

Eigen::VectorXd GaussianSource::normal_vector(Eigen::Index m) {
  Eigen::VectorXd g(m);
  for (Eigen::Index i = 0; i < m; ++i) g[i] = normal_(engine_);
  return g;
}

}  // namespace partcolor
