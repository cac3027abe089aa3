#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fiberalign/embed.hpp"
#include "fiberalign/estimate.hpp"
#include "fiberalign/report.hpp"

namespace fiberalign {

// Tolerance of the approximate fiber product under the Euclidean metric.
struct JoinConfig {
  double epsilon = 0.0;

  void validate() const;
};

enum class JoinEngine { brute, grid };

std::string_view to_string(JoinEngine e) noexcept;

struct MatchedPair {
  std::string image_id;
  std::string text_id;
  double distance = 0.0;

  bool operator==(const MatchedPair&) const = default;
};

// All cross-modal pairs with ||x - y|| <= epsilon (closed ball), sorted by
// (image_id, text_id). The id columns are the two projections of the
// fiber product back onto its factors.
struct JoinResult {
  double epsilon = 0.0;
  std::vector<MatchedPair> pairs;
  JoinEngine engine = JoinEngine::brute;  // engine that actually ran
  std::size_t distance_evals = 0;

  std::size_t size() const noexcept { return pairs.size(); }
};

double euclidean_distance(const Eigen::Ref<const Eigen::VectorXd>& a,
                          const Eigen::Ref<const Eigen::VectorXd>& b);

JoinResult join_bruteforce(const PointSet& images, const PointSet& texts, const JoinConfig& cfg);

// Uniform grid with cell side epsilon; each query scans the cells covering
// epsilon box. Falls back to brute force for
// epsilon == 0, dim > kGridMaxDim, or coordinates too large to bucket.
JoinResult join_grid(const PointSet& images, const PointSet& texts, const JoinConfig& cfg);

inline constexpr std::size_t kGridMaxDim = 12;

JoinResult join(const PointSet& images, const PointSet& texts, const JoinConfig& cfg,
                JoinEngine engine = JoinEngine::grid);

std::size_t empirical_size(const PointSet& images, const PointSet& texts, const JoinConfig& cfg,
                           JoinEngine engine = JoinEngine::grid);

// Largest cross-modal distance; 0 if either side is empty.
double cross_diameter(const PointSet& images, const PointSet& texts);

// True if every pair of `inner` (by ids) also appears in `outer`.
bool pairs_included(const JoinResult& inner, const JoinResult& outer);

// CSV `image_id,text_id,distance` with a header row.
void write_join_csv(const JoinResult& r, std::ostream& out);

using SizeEstimate = McEstimate;

// P(||z - z'|| <= epsilon) for independent z ~ spec_f, z' ~ spec_g. The
// empirical join size of |X| x |Y| samples is |X| |Y| times this value.
SizeEstimate estimate_size_mc(const GaussianSpec& spec_f, const GaussianSpec& spec_g,
                              double epsilon, std::size_t n_samples, std::uint64_t seed,
                              std::size_t workers = 0);

// Same estimator on a whole epsilon grid with common samples, so the
// estimates are monotone in epsilon.
std::vector<SizeEstimate> estimate_size_mc(const GaussianSpec& spec_f,
                                           const GaussianSpec& spec_g,
                                           std::span<const double> eps_grid,
                                           std::size_t n_samples, std::uint64_t seed,
                                           std::size_t workers = 0);

// eps^d * exp(-||mu_f - mu_g||^2 / (2 (var_f + var_g))). A proportionality,
// not a probability: compare slopes, never absolute values.
double closed_form_gaussian_size(const GaussianSpec& spec_f, const GaussianSpec& spec_g,
                                 double epsilon);

struct NoiseSpec {
  double eta = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Nesting of pair sets and non-decreasing counts along an increasing grid,
// plus the |X| |Y| limit once the grid passes the diameter.
CheckReport verify_monotonicity(const PointSet& images, const PointSet& texts,
                                std::span<const double> eps_grid,
                                JoinEngine engine = JoinEngine::grid);

// Perturbed epsilon-join is contained in the clean (epsilon + 2 eta)-join.
CheckReport verify_noise_tolerance(const PointSet& images, const PointSet& texts,
                                   const JoinConfig& cfg, const NoiseSpec& noise,
                                   std::size_t trials, JoinEngine engine = JoinEngine::grid);

// Diagnostic for the stronger claim that the perturbed epsilon-join stays
// inside the clean epsilon-join whenever eta <= epsilon / 2. Searches random
// perturbations and a worst-case construction (push each pair together by
// 2 eta along the line joining them) for counterexamples. `passed` means no
// counterexample was found.
CheckReport check_inclusion_claim(const PointSet& images, const PointSet& texts,
                                  const JoinConfig& cfg, const NoiseSpec& noise,
                                  std::size_t trials = 100,
                                  JoinEngine engine = JoinEngine::grid);

// Number of principal components of the matched-pair midpoints needed to
// reach `variance_threshold` of their total variance (0 for a point mass).
std::size_t estimate_join_dimension(const JoinResult& join, const PointSet& images,
                                    const PointSet& texts, double variance_threshold = 0.99);

}  // namespace fiberalign
