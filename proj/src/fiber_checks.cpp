#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <Eigen/Eigenvalues>

#include "fiberalign/errors.hpp"
#include "fiberalign/fiber.hpp"
#include "fiberalign/rng.hpp"

namespace fiberalign {

void NoiseSpec::validate() const {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw DomainError("eta must be finite and >= 0");
}

namespace {

PointSet perturbed(const PointSet& s, double eta, RandomStream& rng) {
  PointSet out = s;
  for (Eigen::Index c = 0; c < out.coords.cols(); ++c) {
    out.coords.col(c) += rng.ball_perturbation(out.coords.rows(), eta);
  }
  return out;
}

// Pairs of `inner` whose ids are missing from `outer`.
std::vector<MatchedPair> pairs_missing(const JoinResult& inner, const JoinResult& outer) {
  auto by_ids = [](const MatchedPair& a, const MatchedPair& b) {
    if (a.image_id != b.image_id) return a.image_id < b.image_id;
    return a.text_id < b.text_id;
  };
  std::vector<MatchedPair> out;
  std::set_difference(inner.pairs.begin(), inner.pairs.end(), outer.pairs.begin(),
                      outer.pairs.end(), std::back_inserter(out), by_ids);
  return out;
}

std::unordered_map<std::string, Eigen::Index> column_index(const PointSet& s) {
  std::unordered_map<std::string, Eigen::Index> idx;
  for (std::size_t k = 0; k < s.ids.size(); ++k) idx.emplace(s.ids[k], static_cast<Eigen::Index>(k));
  return idx;
}

}  // namespace

CheckReport verify_monotonicity(const PointSet& images, const PointSet& texts,
                                std::span<const double> eps_grid, JoinEngine engine) {
  for (std::size_t k = 0; k < eps_grid.size(); ++k) {
    JoinConfig{eps_grid[k]}.validate();
    if (k > 0 && !(eps_grid[k] > eps_grid[k - 1])) {
      throw DomainError("epsilon grid must be strictly increasing");
    }
  }

  CheckReport report;
  report.check = "monotonicity";
  const double diameter = cross_diameter(images, texts);
  JoinResult prev;
  for (std::size_t k = 0; k < eps_grid.size(); ++k) {
    JoinResult cur = join(images, texts, JoinConfig{eps_grid[k]}, engine);
    bool nested = true;
    if (k > 0) nested = pairs_included(prev, cur) && prev.size() <= cur.size();
    ++report.trials;
    report.passed = report.passed && nested;
    report.details.push_back(
        {{"epsilon", eps_grid[k]}, {"count", cur.size()}, {"nested_in_previous", nested}});
    prev = std::move(cur);
  }

  const std::size_t full = images.size() * texts.size();
  if (!eps_grid.empty() && eps_grid.back() >= diameter) {
    const bool converged = prev.size() == full;
    report.passed = report.passed && converged;
    report.details.push_back({{"convergence", converged},
                              {"diameter", diameter},
                              {"final_count", prev.size()},
                              {"full_product", full}});
  }
  return report;
}

CheckReport verify_noise_tolerance(const PointSet& images, const PointSet& texts,
                                   const JoinConfig& cfg, const NoiseSpec& noise,
                                   std::size_t trials, JoinEngine engine) {
  cfg.validate();
  noise.validate();
  CheckReport report;
  report.check = "noise_tolerance";
  const JoinResult clean = join(images, texts, JoinConfig{cfg.epsilon + 2.0 * noise.eta}, engine);
  const RandomStream root = RandomStream(noise.seed).substream("noise");
  std::size_t passed = 0;
  std::size_t max_pairs = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    RandomStream rng = root.substream(static_cast<std::uint64_t>(t));
    const PointSet noisy_images = perturbed(images, noise.eta, rng);
    const PointSet noisy_texts = perturbed(texts, noise.eta, rng);
    const JoinResult noisy = join(noisy_images, noisy_texts, cfg, engine);
    max_pairs = std::max(max_pairs, noisy.size());
    const auto missing = pairs_missing(noisy, clean);
    if (missing.empty()) {
      ++passed;
    } else {
      report.details.push_back({{"trial", t},
                                {"violations", missing.size()},
                                {"example", {missing.front().image_id, missing.front().text_id}}});
    }
  }
  report.trials = trials;
  report.passed = passed == trials;
  report.details.push_back({{"epsilon", cfg.epsilon},
                            {"eta", noise.eta},
                            {"clean_pairs_at_eps_plus_2eta", clean.size()},
                            {"max_perturbed_pairs", max_pairs},
                            {"trials_passed", passed}});
  return report;
}

CheckReport check_inclusion_claim(const PointSet& images, const PointSet& texts,
                                  const JoinConfig& cfg, const NoiseSpec& noise,
                                  std::size_t trials, JoinEngine engine) {
  cfg.validate();
  noise.validate();
  CheckReport report;
  report.check = "inclusion_claim";
  report.theorem_backed = false;

  // the claim only speaks about eta <= eps / 2
  const double eta = std::min(noise.eta, cfg.epsilon / 2.0);
  const JoinResult clean = join(images, texts, cfg, engine);

  std::size_t random_violations = 0;
  nlohmann::json examples = nlohmann::json::array();
  auto record = [&](const MatchedPair& p, double clean_dist, double noisy_dist, const char* how) {
    if (examples.size() < 5) {
      examples.push_back({{"image_id", p.image_id},
                          {"text_id", p.text_id},
                          {"clean_distance", clean_dist},
                          {"perturbed_distance", noisy_dist},
                          {"source", how}});
    }
  };

  const RandomStream root = RandomStream(noise.seed).substream("inclusion-claim");
  for (std::size_t t = 0; t < trials; ++t) {
    RandomStream rng = root.substream(static_cast<std::uint64_t>(t));
    const JoinResult noisy =
        join(perturbed(images, eta, rng), perturbed(texts, eta, rng), cfg, engine);
    const auto missing = pairs_missing(noisy, clean);
    random_violations += missing.size();
    for (const auto& p : missing) record(p, std::nan(""), p.distance, "random");
  }

  // Worst case: move x towards y and y towards x by eta each. Only pairs in
  // (eps, eps + 2 eta] can become violations.
  std::size_t adversarial_violations = 0;
  if (eta > 0.0) {
    const auto image_col = column_index(images);
    const auto text_col = column_index(texts);
    const JoinResult wide = join(images, texts, JoinConfig{cfg.epsilon + 2.0 * eta}, engine);
    for (const auto& p : pairs_missing(wide, clean)) {
      const Eigen::VectorXd x = images.coords.col(image_col.at(p.image_id));
      const Eigen::VectorXd y = texts.coords.col(text_col.at(p.text_id));
      const Eigen::VectorXd dir = (y - x) / p.distance;
      const Eigen::VectorXd x_pert = x + eta * dir;
      const Eigen::VectorXd y_pert = y - eta * dir;
      const double noisy_dist = euclidean_distance(x_pert, y_pert);
      if (noisy_dist <= cfg.epsilon) {
        ++adversarial_violations;
        record(p, p.distance, noisy_dist, "adversarial");
      }
    }
  }

  report.trials = trials + 1;
  const std::size_t total = random_violations + adversarial_violations;
  report.passed = total == 0;
  report.details.push_back({{"epsilon", cfg.epsilon},
                            {"eta_requested", noise.eta},
                            {"eta_used", eta},
                            {"random_violations", random_violations},
                            {"adversarial_violations", adversarial_violations},
                            {"claim_reproducible_as_printed", total == 0},
                            {"examples", examples}});
  return report;
}

std::size_t estimate_join_dimension(const JoinResult& join, const PointSet& images,
                                    const PointSet& texts, double variance_threshold) {
  if (join.pairs.empty()) throw DomainError("cannot estimate the dimension of an empty join");
  if (!(variance_threshold > 0.0 && variance_threshold < 1.0)) {
    throw DomainError("variance threshold must lie in (0, 1)");
  }
  const auto image_col = column_index(images);
  const auto text_col = column_index(texts);
  const auto n = static_cast<Eigen::Index>(join.pairs.size());
  Eigen::MatrixXd mid(static_cast<Eigen::Index>(images.dim()), n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& p = join.pairs[static_cast<std::size_t>(k)];
    const auto ic = image_col.find(p.image_id);
    const auto tc = text_col.find(p.text_id);
    if (ic == image_col.end() || tc == text_col.end()) {
      throw DomainError("join pair (" + p.image_id + ", " + p.text_id + ") not in point sets");
    }
    mid.col(k) = 0.5 * (images.coords.col(ic->second) + texts.coords.col(tc->second));
  }
  const Eigen::MatrixXd centered = mid.colwise() - mid.rowwise().mean();
  const Eigen::MatrixXd cov = centered * centered.transpose() / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov, Eigen::EigenvaluesOnly);
  Eigen::VectorXd ev = solver.eigenvalues().cwiseMax(0.0).reverse();  // descending
  const double total = ev.sum();
  if (total < 1e-18) return 0;
  double acc = 0.0;
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    acc += ev[k];
    if (acc >= variance_threshold * total) return static_cast<std::size_t>(k + 1);
  }
  return static_cast<std::size_t>(ev.size());
}

}  // namespace fiberalign
