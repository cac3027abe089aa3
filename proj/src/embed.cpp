#include "fiberalign/embed.hpp"

#include <cmath>
#include <string>

#include "fiberalign/errors.hpp"
#include "fiberalign/rng.hpp"

namespace fiberalign {

EmbeddingMap EmbeddingMap::build(std::uint64_t seed, std::size_t input_len, std::size_t out_dim,
                                 RingPoly::Coeff modulus) {
  if (input_len < 1 || out_dim < 1) throw DomainError("embedding map dimensions must be >= 1");
  if (modulus < 2) throw DomainError("embedding map modulus must be >= 2");
  RandomStream rng = RandomStream(seed).substream("embedding-map");
  const double bound = 1.0 / std::sqrt(static_cast<double>(input_len));
  Eigen::MatrixXd w(out_dim, input_len);
  // row-major fill so the stream order does not depend on Eigen's storage
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-bound, bound);
  }
  return EmbeddingMap(std::move(w), modulus, seed);
}

EmbeddingMap::EmbeddingMap(Eigen::MatrixXd weights, RingPoly::Coeff modulus, std::uint64_t seed)
    : weights_(std::move(weights)), modulus_(modulus), seed_(seed) {
  if (weights_.rows() < 1 || weights_.cols() < 1) {
    throw DomainError("embedding map dimensions must be >= 1");
  }
  if (modulus_ < 2) throw DomainError("embedding map modulus must be >= 2");
}

Eigen::VectorXd EmbeddingMap::operator()(const RingPoly& p) const {
  if (p.modulus() != modulus_) {
    throw DomainError("polynomial modulus " + std::to_string(p.modulus()) +
                      " does not match map modulus " + std::to_string(modulus_));
  }
  if (p.size() > input_len()) {
    throw DomainError("polynomial has " + std::to_string(p.size()) +
                      " coefficients, map accepts at most " + std::to_string(input_len()));
  }
  Eigen::VectorXd x = Eigen::VectorXd::Zero(weights_.cols());
  const double scale = static_cast<double>(modulus_ - 1);
  for (std::size_t k = 0; k < p.size(); ++k) {
    x[static_cast<Eigen::Index>(k)] = static_cast<double>(p.coeffs()[k]) / scale;
  }
  return weights_ * x;
}

std::string_view to_string(Modality m) noexcept {
  return m == Modality::image ? "image" : "text";
}

std::optional<Modality> parse_modality(std::string_view s) noexcept {
  if (s == "image") return Modality::image;
  if (s == "text") return Modality::text;
  return std::nullopt;
}

void GaussianSpec::validate() const {
  if (mean.size() < 1) throw DomainError("Gaussian dimension must be >= 1");
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw DomainError("Gaussian variance must be positive and finite");
  }
  if (!mean.allFinite()) throw DomainError("Gaussian mean must be finite");
}

PointSet PointSet::from_columns(const Eigen::MatrixXd& coords, std::string_view prefix) {
  PointSet s;
  const auto n = static_cast<std::size_t>(coords.cols());
  s.ids.reserve(n);
  for (std::size_t k = 0; k < n; ++k) s.ids.push_back(make_id(prefix, k, n));
  s.coords = coords;
  return s;
}

void EmbeddedCorpus::add_point(std::string id, Modality modality, Eigen::VectorXd vector) {
  if (static_cast<std::size_t>(vector.size()) != dim_) {
    throw DomainError("point '" + id + "' has " + std::to_string(vector.size()) +
                      " entries, corpus dim is " + std::to_string(dim_));
  }
  if (!vector.allFinite()) throw DomainError("point '" + id + "' has a non-finite entry");
  if (id.empty()) throw DomainError("point id must be non-empty");
  auto& idx = modality == Modality::image ? image_index_ : text_index_;
  if (!idx.emplace(id, points_.size()).second) {
    throw DomainError("duplicate " + std::string(to_string(modality)) + " id '" + id + "'");
  }
  points_.push_back({std::move(id), modality, std::move(vector)});
}

void EmbeddedCorpus::add_pair(std::string image_id, std::string text_id) {
  if (!image_index_.contains(image_id)) {
    throw DomainError("pair references unknown image id '" + image_id + "'");
  }
  if (!text_index_.contains(text_id)) {
    throw DomainError("pair references unknown text id '" + text_id + "'");
  }
  pairs_.emplace_back(std::move(image_id), std::move(text_id));
}

std::size_t EmbeddedCorpus::count(Modality m) const noexcept { return index(m).size(); }

PointSet EmbeddedCorpus::points_of(Modality m) const {
  PointSet s;
  s.coords.resize(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(count(m)));
  Eigen::Index col = 0;
  for (const auto& p : points_) {
    if (p.modality != m) continue;
    s.ids.push_back(p.id);
    s.coords.col(col++) = p.vector;
  }
  return s;
}

const EmbeddedPoint& EmbeddedCorpus::find(Modality m, std::string_view id) const {
  const auto& idx = index(m);
  if (auto it = idx.find(std::string(id)); it != idx.end()) return points_[it->second];
  throw DomainError("no " + std::string(to_string(m)) + " point with id '" + std::string(id) + "'");
}

std::string make_id(std::string_view prefix, std::size_t index, std::size_t count) {
  std::size_t width = 1;
  for (std::size_t c = count > 0 ? count - 1 : 0; c >= 10; c /= 10) ++width;
  std::string digits = std::to_string(index);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return std::string(prefix) + digits;
}

EmbeddedCorpus sample_gaussian_corpus(const GaussianSpec& spec_f, const GaussianSpec& spec_g,
                                      std::size_t n_image, std::size_t n_text,
                                      std::uint64_t seed) {
  spec_f.validate();
  spec_g.validate();
  if (spec_f.dim() != spec_g.dim()) {
    throw DomainError("Gaussian dimensions differ: " + std::to_string(spec_f.dim()) + " vs " +
                      std::to_string(spec_g.dim()));
  }
  if (n_image < 1 || n_text < 1) throw DomainError("sample counts must be >= 1");

  const RandomStream root(seed);
  EmbeddedCorpus corpus(spec_f.dim());
  auto draw = [&](const GaussianSpec& spec, std::size_t n, Modality m, std::string_view name,
                  std::string_view prefix) {
    RandomStream rng = root.substream(name);
    const double sd = std::sqrt(spec.variance);
    for (std::size_t k = 0; k < n; ++k) {
      Eigen::VectorXd v = spec.mean + sd * rng.normal_vector(spec.mean.size());
      corpus.add_point(make_id(prefix, k, n), m, std::move(v));
    }
  };
  draw(spec_f, n_image, Modality::image, "gaussian-image", "i");
  draw(spec_g, n_text, Modality::text, "gaussian-text", "t");
  return corpus;
}

}  // namespace fiberalign
