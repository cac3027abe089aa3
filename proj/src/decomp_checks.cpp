#include <array>
#include <cmath>

#include <Eigen/SVD>

#include "fiberalign/decomp.hpp"
#include "fiberalign/errors.hpp"
#include "fiberalign/parallel.hpp"
#include "fiberalign/rng.hpp"

namespace fiberalign {

namespace {

constexpr double kProjectorTol = 1e-10;
constexpr double kCompletenessTol = 1e-9;

void require_orthogonal_complete(const Decomposition& dec, const char* what) {
  if (!dec.complete() || !dec.orthogonal()) {
    throw DomainError(std::string(what) + " needs an orthogonal, complete decomposition");
  }
}

}  // namespace

CheckReport projector_laws_check(const Decomposition& dec, std::size_t n_vectors,
                                 std::uint64_t seed) {
  require_orthogonal_complete(dec, "projector_laws_check");
  CheckReport report;
  report.check = "projector_laws";
  report.trials = n_vectors;

  const Subspace all[] = {Subspace::shared, Subspace::image, Subspace::text};
  double idempotence = 0.0, annihilation = 0.0, completeness = 0.0;
  RandomStream rng = RandomStream(seed).substream("projector-laws");
  const auto d = static_cast<Eigen::Index>(dec.dim());
  for (std::size_t t = 0; t < n_vectors; ++t) {
    const Eigen::VectorXd z = rng.normal_vector(d);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
    for (Subspace s : all) {
      const Eigen::VectorXd p = project(dec, z, s);
      idempotence = std::max(idempotence, (project(dec, p, s) - p).cwiseAbs().maxCoeff());
      for (Subspace o : all) {
        if (o == s) continue;
        annihilation = std::max(annihilation, project(dec, p, o).cwiseAbs().maxCoeff());
      }
      sum += p;
    }
    completeness = std::max(completeness, (sum - z).cwiseAbs().maxCoeff());
  }
  report.passed = idempotence <= kProjectorTol && annihilation <= kProjectorTol &&
                  completeness <= kCompletenessTol;
  report.details.push_back({{"max_idempotence_error", idempotence},
                            {"max_annihilation_error", annihilation},
                            {"max_completeness_error", completeness},
                            {"tol_projector", kProjectorTol},
                            {"tol_completeness", kCompletenessTol}});
  return report;
}

CheckReport norm_decomposition_check(const Decomposition& dec, std::size_t n_vectors,
                                     std::uint64_t seed) {
  require_orthogonal_complete(dec, "norm_decomposition_check");
  CheckReport report;
  report.check = "norm_decomposition";
  report.trials = n_vectors;
  RandomStream rng = RandomStream(seed).substream("norm-decomposition");
  double worst = 0.0;
  for (std::size_t t = 0; t < n_vectors; ++t) {
    const Eigen::VectorXd z = rng.normal_vector(static_cast<Eigen::Index>(dec.dim()));
    const ComponentSplit parts = split(dec, z);
    const double rhs = parts.z_s.squaredNorm() + parts.z_i.squaredNorm() + parts.z_t.squaredNorm();
    worst = std::max(worst, std::abs(z.squaredNorm() - rhs) / z.squaredNorm());
  }
  report.passed = worst <= kCompletenessTol;
  report.details.push_back({{"max_rel_error", worst}, {"tol", kCompletenessTol}});
  return report;
}

CheckReport perturb_stability_check(const Decomposition& dec, std::size_t trials, double eta,
                                    std::uint64_t seed) {
  require_orthogonal_complete(dec, "perturb_stability_check");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw DomainError("eta must be finite and >= 0");
  CheckReport report;
  report.check = "perturbation_stability";
  report.trials = trials;

  const Subspace all[] = {Subspace::shared, Subspace::image, Subspace::text};
  // projections are differences of rounded vectors; allow a few ulps
  const double bound = eta * (1.0 + 1e-12) + 1e-14;
  RandomStream rng = RandomStream(seed).substream("perturbation-stability");
  const auto d = static_cast<Eigen::Index>(dec.dim());
  std::size_t passed = 0;
  double worst_identity = 0.0, worst_shift = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const Eigen::VectorXd z = rng.normal_vector(d);
    const Eigen::VectorXd delta = rng.ball_perturbation(d, eta);
    double parts = 0.0;
    bool ok = true;
    for (Subspace s : all) {
      parts += project(dec, delta, s).squaredNorm();
      const double shift = (project(dec, z + delta, s) - project(dec, z, s)).norm();
      worst_shift = std::max(worst_shift, shift);
      ok = ok && shift <= bound;
    }
    const double total = delta.squaredNorm();
    const double err = std::abs(total - parts);
    worst_identity = std::max(worst_identity, total > 0.0 ? err / total : err);
    ok = ok && err <= 1e-9 * total;
    passed += ok;
  }
  report.passed = passed == trials;
  report.details.push_back({{"eta", eta},
                            {"trials_passed", passed},
                            {"max_identity_rel_error", worst_identity},
                            {"max_projection_shift", worst_shift}});
  return report;
}

std::size_t numerical_rank(const Eigen::MatrixXd& m, double rank_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || !(sv[0] > 0.0)) return 0;
  std::size_t r = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) r += sv[k] > rank_tol * sv[0];
  return r;
}

namespace {

// Orthonormal basis of the numerical column span.
Eigen::MatrixXd span_basis(const Eigen::MatrixXd& m, double rank_tol) {
  const std::size_t r = numerical_rank(m, rank_tol);
  if (r == 0) return Eigen::MatrixXd(m.rows(), 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(static_cast<Eigen::Index>(r));
}

}  // namespace

CheckReport DimConstraintResult::report() const {
  CheckReport r;
  r.check = "dimensionality_constraint";
  r.trials = 1;
  r.passed = holds();
  r.details.push_back(
      {{"rank_f", rank_f}, {"rank_g", rank_g}, {"rank_shared", rank_shared}});
  return r;
}

DimConstraintResult check_dim_constraint(const Eigen::MatrixXd& points_f,
                                         const Eigen::MatrixXd& points_g, double rank_tol,
                                         const Decomposition* dec) {
  if (points_f.cols() == 0 || points_g.cols() == 0) {
    throw DomainError("dimensionality check needs non-empty point sets");
  }
  if (points_f.rows() != points_g.rows()) throw DomainError("point sets differ in dimension");
  if (dec && static_cast<Eigen::Index>(dec->dim()) != points_f.rows()) {
    throw DomainError("decomposition and point dimensions differ");
  }

  DimConstraintResult out;
  out.rank_f = numerical_rank(points_f, rank_tol);
  out.rank_g = numerical_rank(points_g, rank_tol);

  Eigen::MatrixXd shared_basis;
  if (dec) {
    shared_basis = dec->basis(Subspace::shared);
  } else {
    // span(F) ∩ span(G): principal vectors whose cosine is 1 within tolerance
    const Eigen::MatrixXd uf = span_basis(points_f, rank_tol);
    const Eigen::MatrixXd ug = span_basis(points_g, rank_tol);
    if (uf.cols() == 0 || ug.cols() == 0) {
      shared_basis.resize(points_f.rows(), 0);
    } else {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(uf.transpose() * ug, Eigen::ComputeThinU);
      Eigen::Index k = 0;
      while (k < svd.singularValues().size() && svd.singularValues()[k] >= 1.0 - rank_tol) ++k;
      shared_basis = uf * svd.matrixU().leftCols(k);
    }
  }
  Eigen::MatrixXd stacked(points_f.rows(), points_f.cols() + points_g.cols());
  stacked << points_f, points_g;
  const Eigen::MatrixXd proj = shared_basis * (shared_basis.transpose() * stacked);
  // relative to the data scale, not to the projections themselves
  const double scale = stacked.cwiseAbs().maxCoeff();
  const Eigen::MatrixXd cleaned =
      proj.unaryExpr([&](double v) { return std::abs(v) <= rank_tol * scale ? 0.0 : v; });
  out.rank_shared = numerical_rank(cleaned, rank_tol);
  return out;
}

AlignmentVolume alignment_volume_mc(const GaussianSpec& spec_f, const GaussianSpec& spec_g,
                                    std::size_t n_samples, std::uint64_t seed,
                                    std::size_t workers) {
  spec_f.validate();
  spec_g.validate();
  if (spec_f.dim() != spec_g.dim()) throw DomainError("Gaussian dimensions differ");
  if (spec_f.dim() < 1 || spec_f.dim() > 8) throw DomainError("alignment volume needs 1 <= d <= 8");
  if (n_samples < 1) throw DomainError("n_samples must be >= 1");

  const auto d = static_cast<Eigen::Index>(spec_f.dim());
  const double dd = static_cast<double>(d);
  const double log2pi = std::log(2.0 * M_PI);
  auto log_density = [&](const GaussianSpec& s, const Eigen::VectorXd& z) {
    return -0.5 * (z - s.mean).squaredNorm() / s.variance - 0.5 * dd * (log2pi + std::log(s.variance));
  };

  constexpr std::size_t kBlock = 1 << 14;
  const std::size_t n_blocks = (n_samples + kBlock - 1) / kBlock;
  // per block: sum and sum of squares of both importance weights
  std::vector<std::array<double, 4>> sums(n_blocks, {0.0, 0.0, 0.0, 0.0});
  const RandomStream root = RandomStream(seed).substream("alignment-volume");
  const double sd_f = std::sqrt(spec_f.variance), sd_g = std::sqrt(spec_g.variance);

  for_each_block(n_blocks, workers, [&](std::size_t b) {
    RandomStream rng = root.substream(static_cast<std::uint64_t>(b));
    const std::size_t end = std::min(n_samples, (b + 1) * kBlock);
    auto& acc = sums[b];
    for (std::size_t s = b * kBlock; s < end; ++s) {
      const bool from_f = rng.uniform() < 0.5;
      const Eigen::VectorXd z = from_f ? Eigen::VectorXd(spec_f.mean + sd_f * rng.normal_vector(d))
                                       : Eigen::VectorXd(spec_g.mean + sd_g * rng.normal_vector(d));
      const double lf = log_density(spec_f, z);
      const double lg = log_density(spec_g, z);
      const double hi = std::max(lf, lg);
      // log of the mixture density (mu_f + mu_g) / 2
      const double lq = hi + std::log(0.5 * (std::exp(lf - hi) + std::exp(lg - hi)));
      const double w_prod = std::exp(lf + lg - lq);
      const double w_min = std::exp(std::min(lf, lg) - lq);
      acc[0] += w_prod;
      acc[1] += w_prod * w_prod;
      acc[2] += w_min;
      acc[3] += w_min * w_min;
    }
  });

  std::array<double, 4> tot = {0.0, 0.0, 0.0, 0.0};
  for (const auto& a : sums) {
    for (int k = 0; k < 4; ++k) tot[k] += a[k];
  }
  const auto n = static_cast<double>(n_samples);
  auto finish = [&](double sum, double sum_sq) {
    const double mean = sum / n;
    double se = 0.0;
    if (n_samples > 1) {
      const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
      se = std::sqrt(var / n);
    }
    return McEstimate{mean, se, n_samples};
  };
  return {finish(tot[0], tot[1]), finish(tot[2], tot[3])};
}

std::vector<SweepRow> misalignment_vs_ds_sweep(const EmbeddedCorpus& corpus,
                                               std::span<const std::size_t> ds_values,
                                               const LossWeights& weights,
                                               const OptimizeOptions& options) {
  const std::size_t d = corpus.dim();
  std::vector<DimensionPlan> plans;
  for (std::size_t ds : ds_values) {
    if (ds < 1 || ds + 2 > d) {
      throw DomainError("d_s = " + std::to_string(ds) +
                        " leaves no room for both modality subspaces in d = " + std::to_string(d));
    }
    const std::size_t rest = d - ds;
    plans.push_back({ds, rest - rest / 2, rest / 2});
  }

  const LossInputs in = LossInputs::from_corpus(corpus);
  std::vector<SweepRow> rows;
  for (const auto& plan : plans) {
    OptimizeResult res = optimize(corpus, plan, weights, options);
    const auto& bs = res.decomposition.basis(Subspace::shared);
    const Eigen::MatrixXd proj = bs * (bs.transpose() * in.pair_diffs);
    rows.push_back({plan, proj.colwise().squaredNorm().maxCoeff(), res.trace.back()});
  }
  return rows;
}

}  // namespace fiberalign
