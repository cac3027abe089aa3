#include "fiberalign/rng.hpp"

#include <cmath>

namespace fiberalign {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) : RandomStream(FromKey{}, splitmix64(seed)) {}

RandomStream::RandomStream(FromKey, std::uint64_t key) : key_(key), engine_(key) {}

RandomStream RandomStream::substream(std::string_view name) const {
  return RandomStream(FromKey{}, splitmix64(key_ ^ fnv1a(name)));
}

RandomStream RandomStream::substream(std::uint64_t index) const {
  return RandomStream(FromKey{}, splitmix64(splitmix64(key_ + 0x632be59bd9b4e019ULL) ^ index));
}

double RandomStream::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

double RandomStream::normal(double mean, double stddev) {
  return mean + stddev * normal_(engine_);
}

Eigen::VectorXd RandomStream::normal_vector(Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index k = 0; k < n; ++k) v[k] = normal_(engine_);
  return v;
}

Eigen::VectorXd RandomStream::ball_perturbation(Eigen::Index n, double max_radius) {
  if (max_radius <= 0.0 || n == 0) return Eigen::VectorXd::Zero(n);
  Eigen::VectorXd dir = normal_vector(n);
  double norm = dir.norm();
  while (norm == 0.0) {
    dir = normal_vector(n);
    norm = dir.norm();
  }
  const double radius = uniform(0.0, max_radius);
  Eigen::VectorXd delta = dir * (radius / norm);
  // rounding can push the norm a hair past the bound
  const double got = delta.norm();
  if (got > max_radius) delta *= max_radius / got;
  return delta;
}

}  // namespace fiberalign
