#include <algorithm>
#include <cmath>

#include "fiberalign/errors.hpp"
#include "fiberalign/fiber.hpp"
#include "fiberalign/parallel.hpp"
#include "fiberalign/rng.hpp"

namespace fiberalign {

namespace {

constexpr std::size_t kMcBlock = 1 << 15;

void require_matching(const GaussianSpec& f, const GaussianSpec& g) {
  f.validate();
  g.validate();
  if (f.dim() != g.dim()) {
    throw DomainError("Gaussian dimensions differ: " + std::to_string(f.dim()) + " vs " +
                      std::to_string(g.dim()));
  }
}

}  // namespace

std::vector<SizeEstimate> estimate_size_mc(const GaussianSpec& spec_f,
                                           const GaussianSpec& spec_g,
                                           std::span<const double> eps_grid,
                                           std::size_t n_samples, std::uint64_t seed,
                                           std::size_t workers) {
  require_matching(spec_f, spec_g);
  if (n_samples < 1) throw DomainError("n_samples must be >= 1");
  for (double e : eps_grid) JoinConfig{e}.validate();

  const auto dim = static_cast<Eigen::Index>(spec_f.dim());
  const double sd_f = std::sqrt(spec_f.variance);
  const double sd_g = std::sqrt(spec_g.variance);
  const RandomStream root = RandomStream(seed).substream("mc-size");
  const std::size_t n_blocks = (n_samples + kMcBlock - 1) / kMcBlock;
  const std::size_t n_eps = eps_grid.size();
  std::vector<std::size_t> hits(n_blocks * n_eps, 0);

  for_each_block(n_blocks, workers, [&](std::size_t b) {
    RandomStream rng = root.substream(static_cast<std::uint64_t>(b));
    const std::size_t begin = b * kMcBlock;
    const std::size_t end = std::min(n_samples, begin + kMcBlock);
    Eigen::VectorXd z(dim), w(dim);
    std::size_t* block_hits = hits.data() + b * n_eps;
    for (std::size_t s = begin; s < end; ++s) {
      for (Eigen::Index k = 0; k < dim; ++k) z[k] = spec_f.mean[k] + sd_f * rng.normal();
      for (Eigen::Index k = 0; k < dim; ++k) w[k] = spec_g.mean[k] + sd_g * rng.normal();
      const double dist = euclidean_distance(z, w);
      for (std::size_t e = 0; e < n_eps; ++e) block_hits[e] += dist <= eps_grid[e];
    }
  });

  std::vector<SizeEstimate> out(n_eps);
  const auto n = static_cast<double>(n_samples);
  for (std::size_t e = 0; e < n_eps; ++e) {
    std::size_t total = 0;
    for (std::size_t b = 0; b < n_blocks; ++b) total += hits[b * n_eps + e];
    const double p = static_cast<double>(total) / n;
    // sample standard deviation of the indicator, over sqrt(n)
    const double se = n_samples > 1 ? std::sqrt(p * (1.0 - p) / (n - 1.0)) : 0.0;
    out[e] = {p, se, n_samples};
  }
  return out;
}

SizeEstimate estimate_size_mc(const GaussianSpec& spec_f, const GaussianSpec& spec_g,
                              double epsilon, std::size_t n_samples, std::uint64_t seed,
                              std::size_t workers) {
  const double grid[] = {epsilon};
  return estimate_size_mc(spec_f, spec_g, grid, n_samples, seed, workers).front();
}

double closed_form_gaussian_size(const GaussianSpec& spec_f, const GaussianSpec& spec_g,
                                 double epsilon) {
  require_matching(spec_f, spec_g);
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw DomainError("closed-form size needs a finite epsilon > 0");
  }
  const double sep2 = (spec_f.mean - spec_g.mean).squaredNorm();
  const double d = static_cast<double>(spec_f.dim());
  return std::pow(epsilon, d) * std::exp(-sep2 / (2.0 * (spec_f.variance + spec_g.variance)));
}

}  // namespace fiberalign
