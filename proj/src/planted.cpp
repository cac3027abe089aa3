#include "fiberalign/decomp.hpp"
#include "fiberalign/errors.hpp"
#include "fiberalign/rng.hpp"

namespace fiberalign {

PlantedModel make_planted_model(const DimensionPlan& plan, const PlantedOptions& options,
                                std::uint64_t seed) {
  plan.validate(plan.sum());
  if (options.n_pairs < 1) throw DomainError("planted model needs n_pairs >= 1");
  if (!(options.noise_sd >= 0.0)) throw DomainError("noise_sd must be >= 0");

  const RandomStream root(seed);
  RandomStream basis_rng = root.substream("planted-basis");
  Decomposition truth = Decomposition::random_orthogonal(plan.ds, plan.di, plan.dt, basis_rng);

  RandomStream rng = root.substream("planted-points");
  const std::size_t d = plan.sum();
  const auto di = static_cast<Eigen::Index>(d);
  EmbeddedCorpus corpus(d);
  for (std::size_t k = 0; k < options.n_pairs; ++k) {
    const Eigen::VectorXd shared =
        truth.basis(Subspace::shared) *
        (options.shared_scale * rng.normal_vector(static_cast<Eigen::Index>(plan.ds)));
    const Eigen::VectorXd img =
        shared +
        truth.basis(Subspace::image) *
            (options.specific_scale * rng.normal_vector(static_cast<Eigen::Index>(plan.di))) +
        options.noise_sd * rng.normal_vector(di);
    const Eigen::VectorXd txt =
        shared +
        truth.basis(Subspace::text) *
            (options.specific_scale * rng.normal_vector(static_cast<Eigen::Index>(plan.dt))) +
        options.noise_sd * rng.normal_vector(di);
    corpus.add_point(make_id("i", k, options.n_pairs), Modality::image, img);
    corpus.add_point(make_id("t", k, options.n_pairs), Modality::text, txt);
  }
  for (std::size_t k = 0; k < options.n_pairs; ++k) {
    corpus.add_pair(make_id("i", k, options.n_pairs), make_id("t", k, options.n_pairs));
  }
  return {std::move(corpus), std::move(truth)};
}

}  // namespace fiberalign
