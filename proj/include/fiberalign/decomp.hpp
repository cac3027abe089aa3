#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "fiberalign/embed.hpp"
#include "fiberalign/estimate.hpp"
#include "fiberalign/report.hpp"

namespace fiberalign {

class RandomStream;

enum class Subspace { shared, image, text };

std::string_view to_string(Subspace s) noexcept;

// Raw basis matrices (columns are basis vectors). This is the parameter
// type of the optimizer and the loss functions, so no orthonormality is
// assumed here.
struct SubspaceBases {
  Eigen::MatrixXd shared;
  Eigen::MatrixXd image;
  Eigen::MatrixXd text;

  const Eigen::MatrixXd& operator[](Subspace s) const;
  Eigen::MatrixXd& operator[](Subspace s);
  Eigen::Index dim() const noexcept { return shared.rows(); }
};

inline constexpr double kOrthonormalTol = 1e-10;

// Z = Z_s + Z_I + Z_T with a column-orthonormal basis for each summand.
// Bases of different summands need not be orthogonal to each other (a
// trained decomposition may be only approximately so); `orthogonal()`
// certifies that they are.
class Decomposition {
 public:
  // Throws DomainError on inconsistent row counts, d_s + d_I + d_T > d, or a
  // basis whose columns are not orthonormal to kOrthonormalTol.
  explicit Decomposition(SubspaceBases bases);

  // Canonical axes: e_0.. for Z_s, then Z_I, then Z_T.
  static Decomposition axis_aligned(std::size_t ds, std::size_t di, std::size_t dt);
  // Orthogonal decomposition obtained by splitting a Haar-random rotation.
  static Decomposition random_orthogonal(std::size_t ds, std::size_t di, std::size_t dt,
                                         RandomStream& rng);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(bases_.dim()); }
  std::size_t ds() const noexcept { return static_cast<std::size_t>(bases_.shared.cols()); }
  std::size_t di() const noexcept { return static_cast<std::size_t>(bases_.image.cols()); }
  std::size_t dt() const noexcept { return static_cast<std::size_t>(bases_.text.cols()); }

  const SubspaceBases& bases() const noexcept { return bases_; }
  const Eigen::MatrixXd& basis(Subspace s) const { return bases_[s]; }

  bool complete() const noexcept { return ds() + di() + dt() == dim(); }
  double max_cross_inner_product() const;
  bool orthogonal(double tol = kOrthonormalTol) const { return max_cross_inner_product() <= tol; }

  // B B^T for the selected summand.
  Eigen::MatrixXd projector(Subspace s) const;

 private:
  SubspaceBases bases_;
};

// Pi z = B (B^T z).
Eigen::VectorXd project(const Decomposition& dec, const Eigen::VectorXd& z, Subspace which);

struct ComponentSplit {
  Eigen::VectorXd z_s;
  Eigen::VectorXd z_i;
  Eigen::VectorXd z_t;
};

// Requires an orthogonal, complete decomposition.
ComponentSplit split(const Decomposition& dec, const Eigen::VectorXd& z);

void write_decomposition(const Decomposition& dec, std::ostream& out);
Decomposition read_decomposition(std::istream& in, const std::string& source = "<stream>");
void save_decomposition(const Decomposition& dec, const std::filesystem::path& path);
Decomposition load_decomposition(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Loss

enum class SpecificityMode { literal, hinge };

std::string_view to_string(SpecificityMode m) noexcept;
std::optional<SpecificityMode> parse_specificity_mode(std::string_view s) noexcept;

struct LossWeights {
  double lambda = 1.0;
  double gamma = 0.1;
  SpecificityMode specificity_mode = SpecificityMode::literal;
  double hinge_margin = 1.0;

  void validate() const;
};

struct LossBreakdown {
  double align = 0.0;
  double orth = 0.0;
  double specificity = 0.0;
  double total = 0.0;
};

// Corpus rearranged for the loss kernels (one column per point).
struct LossInputs {
  Eigen::MatrixXd pair_diffs;  // f(i) - g(t) for every declared pair
  Eigen::MatrixXd pair_images;
  Eigen::MatrixXd pair_texts;
  Eigen::MatrixXd images;
  Eigen::MatrixXd texts;

  static LossInputs from_corpus(const EmbeddedCorpus& corpus);
  Eigen::Index dim() const noexcept { return images.rows(); }
};

// Sum over pairs of ||Pi_s f(i) - Pi_s g(t)||^2. Throws if there are no pairs.
double loss_align(const Decomposition& dec, const EmbeddedCorpus& corpus);
// Sum over every corpus point of (z_s.z_I)^2 + (z_s.z_T)^2 + (z_I.z_T)^2.
double loss_orth(const Decomposition& dec, const EmbeddedCorpus& corpus);
// Literal: sum of ||Pi_I f(i)||^2 over images plus ||Pi_T g(t)||^2 over texts.
// Hinge: sum of max(0, margin - ||.||^2) over the same components.
double loss_specificity(const Decomposition& dec, const EmbeddedCorpus& corpus,
                        const LossWeights& weights);
double total_loss(const Decomposition& dec, const EmbeddedCorpus& corpus,
                  const LossWeights& weights);

LossBreakdown evaluate_loss(const SubspaceBases& bases, const LossInputs& in,
                            const LossWeights& weights);
LossBreakdown evaluate_loss(const Decomposition& dec, const EmbeddedCorpus& corpus,
                            const LossWeights& weights);

// Analytic gradient of the total loss with respect to every basis entry.
SubspaceBases loss_gradient(const SubspaceBases& bases, const LossInputs& in,
                            const LossWeights& weights);

// ---------------------------------------------------------------------------
// Optimization

struct DimensionPlan {
  std::size_t ds = 1;
  std::size_t di = 1;
  std::size_t dt = 1;

  std::size_t sum() const noexcept { return ds + di + dt; }
  // Each part >= 1 and the parts sum to `dim`.
  void validate(std::size_t dim) const;
  bool operator==(const DimensionPlan&) const = default;
};

// Apportions d in proportion to (var_f + var_g)/(var_f var_g) : var_f/var_g
// : var_g/var_f by largest remainder, then lifts empty parts to 1 by taking
// from the largest part.
DimensionPlan allocate_dimensions(std::size_t d, double var_f, double var_g);

// Modified Gram-Schmidt (two passes) on the columns, in place.
void orthonormalize_columns(Eigen::MatrixXd& basis);

struct OptimizeOptions {
  std::size_t steps = 1000;
  double learning_rate = 1e-2;
  std::uint64_t seed = 0;
};

struct OptimizeResult {
  Decomposition decomposition;
  std::vector<LossBreakdown> trace;  // loss after each step
  bool certified_orthogonal = false;
};

// Full-batch gradient descent on the stacked bases from a random orthogonal
// start. Each basis is re-orthonormalized after every step; orthogonality
// between summands is left to the lambda * L_orth penalty.
OptimizeResult optimize(const EmbeddedCorpus& corpus, const DimensionPlan& plan,
                        const LossWeights& weights, const OptimizeOptions& options);

// Max relative error between loss_gradient and central differences (step
// 1e-5) at a random point with per-summand orthonormal bases.
double gradient_check(const EmbeddedCorpus& corpus, const DimensionPlan& plan,
                      const LossWeights& weights, std::uint64_t seed);
double gradient_check(const SubspaceBases& at, const LossInputs& in, const LossWeights& weights,
                      double step = 1e-5);

void write_loss_trace(std::span<const LossBreakdown> trace, std::ostream& out);

// ---------------------------------------------------------------------------
// Checks and diagnostics

// Idempotence and mutual annihilation (1e-10) and completeness (1e-9) on
// random vectors.
CheckReport projector_laws_check(const Decomposition& dec, std::size_t n_vectors,
                                 std::uint64_t seed);

// ||z||^2 equals the sum of squared component norms to relative 1e-9.
CheckReport norm_decomposition_check(const Decomposition& dec, std::size_t n_vectors,
                                     std::uint64_t seed);

// ||delta||^2 = sum of squared component norms (1e-9, relative) and
// ||Pi(z + delta) - Pi(z)|| <= eta for random z and ||delta|| <= eta.
CheckReport perturb_stability_check(const Decomposition& dec, std::size_t trials, double eta,
                                    std::uint64_t seed);

inline constexpr double kDefaultRankTol = 1e-8;

// Singular values above rank_tol * sigma_max.
std::size_t numerical_rank(const Eigen::MatrixXd& m, double rank_tol = kDefaultRankTol);

struct DimConstraintResult {
  std::size_t rank_f = 0;
  std::size_t rank_g = 0;
  std::size_t rank_shared = 0;

  bool holds() const noexcept { return rank_shared <= std::min(rank_f, rank_g); }
  CheckReport report() const;
};

// Ranks of f(I), g(T) and of the span of their Pi_s projections. Without a
// decomposition, Z_s is taken to be the intersection of the column spans of
// f(I) and g(T). Point matrices are dim x n.
DimConstraintResult check_dim_constraint(const Eigen::MatrixXd& points_f,
                                         const Eigen::MatrixXd& points_g,
                                         double rank_tol = kDefaultRankTol,
                                         const Decomposition* dec = nullptr);

struct AlignmentVolume {
  McEstimate product;  // integral of mu_f mu_g over Z_s
  McEstimate bound;    // integral of min(mu_f, mu_g) over Z_s
};

// Importance sampling from the equal mixture of the two densities.
AlignmentVolume alignment_volume_mc(const GaussianSpec& spec_f, const GaussianSpec& spec_g,
                                    std::size_t n_samples, std::uint64_t seed,
                                    std::size_t workers = 0);

struct SweepRow {
  DimensionPlan plan;
  double sup_misalignment = 0.0;  // max over pairs of ||f_s(i) - g_s(t)||^2
  LossBreakdown final_loss;
};

// For each d_s, splits the remaining dimensions between Z_I and Z_T (image
// gets the extra one), optimizes, and records the worst pair misalignment.
std::vector<SweepRow> misalignment_vs_ds_sweep(const EmbeddedCorpus& corpus,
                                               std::span<const std::size_t> ds_values,
                                               const LossWeights& weights,
                                               const OptimizeOptions& options);

// ---------------------------------------------------------------------------
// Planted model

struct PlantedModel {
  EmbeddedCorpus corpus;
  Decomposition truth;
};

struct PlantedOptions {
  std::size_t n_pairs = 64;
  double shared_scale = 1.0;
  double specific_scale = 1.0;
  double noise_sd = 1e-3;
};

// Random orthogonal decomposition; each pair shares one draw of Z_s
// coordinates, the image adds Z_I coordinates, the text adds Z_T
// coordinates, and both get isotropic Gaussian noise.
PlantedModel make_planted_model(const DimensionPlan& plan, const PlantedOptions& options,
                                std::uint64_t seed);

}  // namespace fiberalign
