#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <ostream>

#include "fiberalign/csv.hpp"
#include "fiberalign/decomp.hpp"
#include "fiberalign/errors.hpp"
#include "fiberalign/rng.hpp"

namespace fiberalign {

void DimensionPlan::validate(std::size_t dim) const {
  if (ds < 1 || di < 1 || dt < 1) throw DomainError("every subspace needs at least 1 dimension");
  if (sum() != dim) {
    throw DomainError("plan (" + std::to_string(ds) + "," + std::to_string(di) + "," +
                      std::to_string(dt) + ") does not sum to " + std::to_string(dim));
  }
}

DimensionPlan allocate_dimensions(std::size_t d, double var_f, double var_g) {
  if (d < 3) throw DomainError("allocation needs d >= 3");
  if (!(var_f > 0.0) || !(var_g > 0.0) || !std::isfinite(var_f) || !std::isfinite(var_g)) {
    throw DomainError("variances must be positive and finite");
  }
  const std::array<double, 3> w = {(var_f + var_g) / (var_f * var_g), var_f / var_g,
                                   var_g / var_f};
  // w_I + w_T is evaluated symmetrically so swapping the variances swaps
  // the quotas bit for bit
  const double total = w[0] + (w[1] + w[2]);
  std::array<double, 3> quota{};
  std::array<std::size_t, 3> part{};
  std::size_t assigned = 0;
  for (int k = 0; k < 3; ++k) {
    quota[k] = static_cast<double>(d) * w[k] / total;
    part[k] = static_cast<std::size_t>(std::floor(quota[k]));
    assigned += part[k];
  }
  // Orders by a key, breaking ties on the exact quota and then on position.
  auto ranked = [&](auto key) {
    std::array<int, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      if (key(a) != key(b)) return key(a) > key(b);
      return quota[a] > quota[b];
    });
    return order;
  };
  const auto by_remainder = ranked([&](int k) { return quota[k] - std::floor(quota[k]); });
  for (std::size_t r = 0; assigned < d; ++r, ++assigned) ++part[by_remainder[r % 3]];

  for (int k = 0; k < 3; ++k) {
    if (part[k] > 0) continue;
    const auto donors = ranked([&](int j) { return static_cast<double>(part[j]); });
    --part[donors[0]];
    ++part[k];
  }
  return {part[0], part[1], part[2]};
}

namespace {

SubspaceBases random_bases(const DimensionPlan& plan, std::size_t dim, RandomStream& rng) {
  const auto d = static_cast<Eigen::Index>(dim);
  auto draw = [&](std::size_t cols) {
    Eigen::MatrixXd b(d, static_cast<Eigen::Index>(cols));
    for (Eigen::Index c = 0; c < b.cols(); ++c) b.col(c) = rng.normal_vector(d);
    orthonormalize_columns(b);
    return b;
  };
  SubspaceBases out;
  out.shared = draw(plan.ds);
  out.image = draw(plan.di);
  out.text = draw(plan.dt);
  return out;
}

bool finite(const LossBreakdown& l) {
  return std::isfinite(l.align) && std::isfinite(l.orth) && std::isfinite(l.specificity) &&
         std::isfinite(l.total);
}

}  // namespace

OptimizeResult optimize(const EmbeddedCorpus& corpus, const DimensionPlan& plan,
                        const LossWeights& weights, const OptimizeOptions& options) {
  plan.validate(corpus.dim());
  weights.validate();
  if (options.steps < 1) throw DomainError("optimize needs steps >= 1");
  if (!(options.learning_rate > 0.0) || !std::isfinite(options.learning_rate)) {
    throw DomainError("learning rate must be positive and finite");
  }
  const LossInputs in = LossInputs::from_corpus(corpus);
  if (in.pair_diffs.cols() == 0) throw DomainError("optimize needs a corpus with pairs");

  RandomStream rng = RandomStream(options.seed).substream("optimize-init");
  SubspaceBases bases =
      Decomposition::random_orthogonal(plan.ds, plan.di, plan.dt, rng).bases();

  std::vector<LossBreakdown> trace;
  trace.reserve(options.steps);
  for (std::size_t step = 1; step <= options.steps; ++step) {
    const SubspaceBases grad = loss_gradient(bases, in, weights);
    for (Subspace s : {Subspace::shared, Subspace::image, Subspace::text}) {
      bases[s] -= options.learning_rate * grad[s];
      if (!bases[s].allFinite()) throw OptimizationError(step, "non-finite basis entry");
      try {
        orthonormalize_columns(bases[s]);
      } catch (const DomainError& e) {
        throw OptimizationError(step, e.what());
      }
    }
    const LossBreakdown loss = evaluate_loss(bases, in, weights);
    if (!finite(loss)) throw OptimizationError(step, "non-finite loss");
    trace.push_back(loss);
  }

  Decomposition dec(std::move(bases));
  const bool certified = dec.orthogonal();
  return {std::move(dec), std::move(trace), certified};
}

double gradient_check(const SubspaceBases& at, const LossInputs& in, const LossWeights& weights,
                      double step) {
  const SubspaceBases analytic = loss_gradient(at, in, weights);
  double scale = 0.0;
  for (Subspace s : {Subspace::shared, Subspace::image, Subspace::text}) {
    if (analytic[s].size() > 0) scale = std::max(scale, analytic[s].cwiseAbs().maxCoeff());
  }
  // entries far below the largest gradient are compared on an absolute scale
  const double floor = 1e-6 * std::max(1.0, scale);

  double worst = 0.0;
  SubspaceBases probe = at;
  for (Subspace s : {Subspace::shared, Subspace::image, Subspace::text}) {
    for (Eigen::Index k = 0; k < probe[s].size(); ++k) {
      double& x = probe[s].data()[k];
      const double saved = x;
      x = saved + step;
      const double up = evaluate_loss(probe, in, weights).total;
      x = saved - step;
      const double down = evaluate_loss(probe, in, weights).total;
      x = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[s].data()[k];
      const double err = std::abs(a - numeric);
      if (err == 0.0) continue;
      worst = std::max(worst, err / std::max({std::abs(a), std::abs(numeric), floor}));
    }
  }
  return worst;
}

double gradient_check(const EmbeddedCorpus& corpus, const DimensionPlan& plan,
                      const LossWeights& weights, std::uint64_t seed) {
  plan.validate(corpus.dim());
  const LossInputs in = LossInputs::from_corpus(corpus);
  RandomStream rng = RandomStream(seed).substream("gradient-check");
  return gradient_check(random_bases(plan, corpus.dim(), rng), in, weights);
}

void write_loss_trace(std::span<const LossBreakdown> trace, std::ostream& out) {
  out << "step,total,align,orth,specificity\n";
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const auto& l = trace[k];
    out << k + 1 << ',' << format_double(l.total) << ',' << format_double(l.align) << ','
        << format_double(l.orth) << ',' << format_double(l.specificity) << '\n';
  }
}

}  // namespace fiberalign
