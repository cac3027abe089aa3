#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fiberalign/ring_poly.hpp"

namespace fiberalign {

// Seeded linear map from normalized coefficient vectors of Z_m[x] into R^d.
// Weights depend only on (seed, input_len, out_dim).
class EmbeddingMap {
 public:
  // Weights drawn i.i.d. uniform in [-1/sqrt(input_len), +1/sqrt(input_len)].
  static EmbeddingMap build(std::uint64_t seed, std::size_t input_len, std::size_t out_dim,
                            RingPoly::Coeff modulus);

  // Explicit weights, shape out_dim x input_len.
  EmbeddingMap(Eigen::MatrixXd weights, RingPoly::Coeff modulus, std::uint64_t seed = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t input_len() const noexcept { return static_cast<std::size_t>(weights_.cols()); }
  std::size_t out_dim() const noexcept { return static_cast<std::size_t>(weights_.rows()); }
  RingPoly::Coeff modulus() const noexcept { return modulus_; }
  const Eigen::MatrixXd& weights() const noexcept { return weights_; }

  // Zero-pads to input_len, divides by (modulus - 1), applies the weights.
  Eigen::VectorXd operator()(const RingPoly& p) const;

 private:
  Eigen::MatrixXd weights_;
  RingPoly::Coeff modulus_;
  std::uint64_t seed_;
};

inline EmbeddingMap build_map(std::uint64_t seed, std::size_t input_len, std::size_t out_dim,
                              RingPoly::Coeff modulus) {
  return EmbeddingMap::build(seed, input_len, out_dim, modulus);
}

inline Eigen::VectorXd embed_poly(const EmbeddingMap& map, const RingPoly& p) { return map(p); }

enum class Modality { image, text };

std::string_view to_string(Modality m) noexcept;
std::optional<Modality> parse_modality(std::string_view s) noexcept;

// Isotropic Gaussian N(mean, variance * I).
struct GaussianSpec {
  Eigen::VectorXd mean;
  double variance = 1.0;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(mean.size()); }
  void validate() const;

  static GaussianSpec centered(std::size_t dim, double variance = 1.0) {
    return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim)), variance};
  }
};

struct EmbeddedPoint {
  std::string id;
  Modality modality = Modality::image;
  Eigen::VectorXd vector;

  bool operator==(const EmbeddedPoint& o) const {
    return id == o.id && modality == o.modality && vector == o.vector;
  }
};

// Points of one modality laid out for geometry kernels: column k of `coords`
// is the embedding of ids[k].
struct PointSet {
  std::vector<std::string> ids;
  Eigen::MatrixXd coords;  // dim x n

  std::size_t size() const noexcept { return ids.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(coords.rows()); }

  static PointSet from_columns(const Eigen::MatrixXd& coords, std::string_view prefix);
};

class EmbeddedCorpus {
 public:
  using Pair = std::pair<std::string, std::string>;  // (image_id, text_id)

  explicit EmbeddedCorpus(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<EmbeddedPoint>& points() const noexcept { return points_; }
  const std::vector<Pair>& pairs() const noexcept { return pairs_; }

  // Both throw DomainError on a wrong-length or non-finite vector, a duplicate
  // id within a modality, or a pair naming an unknown id.
  void add_point(std::string id, Modality modality, Eigen::VectorXd vector);
  void add_pair(std::string image_id, std::string text_id);

  std::size_t count(Modality m) const noexcept;
  PointSet points_of(Modality m) const;
  const EmbeddedPoint& find(Modality m, std::string_view id) const;

  bool operator==(const EmbeddedCorpus& o) const {
    return dim_ == o.dim_ && points_ == o.points_ && pairs_ == o.pairs_;
  }

 private:
  const std::unordered_map<std::string, std::size_t>& index(Modality m) const noexcept {
    return m == Modality::image ? image_index_ : text_index_;
  }

  std::size_t dim_;
  std::vector<EmbeddedPoint> points_;
  std::vector<Pair> pairs_;
  std::unordered_map<std::string, std::size_t> image_index_;
  std::unordered_map<std::string, std::size_t> text_index_;
};

// n_image draws from spec_f tagged image, n_text from spec_g tagged text.
EmbeddedCorpus sample_gaussian_corpus(const GaussianSpec& spec_f, const GaussianSpec& spec_g,
                                      std::size_t n_image, std::size_t n_text, std::uint64_t seed);

// Zero-padded identifier, e.g. make_id("i", 7, 1000) == "i007".
std::string make_id(std::string_view prefix, std::size_t index, std::size_t count);

void write_corpus(const EmbeddedCorpus& c, std::ostream& out);
EmbeddedCorpus read_corpus(std::istream& in, const std::string& source = "<stream>");
void save_corpus(const EmbeddedCorpus& c, const std::filesystem::path& path);
EmbeddedCorpus load_corpus(const std::filesystem::path& path);

}  // namespace fiberalign
