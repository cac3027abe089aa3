#include <cmath>

#include "fiberalign/decomp.hpp"
#include "fiberalign/errors.hpp"

namespace fiberalign {

std::string_view to_string(SpecificityMode m) noexcept {
  return m == SpecificityMode::literal ? "literal" : "hinge";
}

std::optional<SpecificityMode> parse_specificity_mode(std::string_view s) noexcept {
  if (s == "literal") return SpecificityMode::literal;
  if (s == "hinge") return SpecificityMode::hinge;
  return std::nullopt;
}

void LossWeights::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be finite and >= 0");
  if (!std::isfinite(gamma)) throw DomainError("gamma must be finite");
  if (!(hinge_margin >= 0.0) || !std::isfinite(hinge_margin)) {
    throw DomainError("hinge margin must be finite and >= 0");
  }
}

LossInputs LossInputs::from_corpus(const EmbeddedCorpus& corpus) {
  LossInputs in;
  in.images = corpus.points_of(Modality::image).coords;
  in.texts = corpus.points_of(Modality::text).coords;
  const auto d = static_cast<Eigen::Index>(corpus.dim());
  const auto n = static_cast<Eigen::Index>(corpus.pairs().size());
  in.pair_images.resize(d, n);
  in.pair_texts.resize(d, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& [img, txt] = corpus.pairs()[static_cast<std::size_t>(k)];
    in.pair_images.col(k) = corpus.find(Modality::image, img).vector;
    in.pair_texts.col(k) = corpus.find(Modality::text, txt).vector;
  }
  in.pair_diffs = in.pair_images - in.pair_texts;
  return in;
}

namespace {

// Columns of B B^T Z.
Eigen::MatrixXd projected(const Eigen::MatrixXd& basis, const Eigen::MatrixXd& points) {
  return basis * (basis.transpose() * points);
}

// Pulls a cotangent G = dL/dC back through C = B B^T Z:
// dL/dB = G (B^T Z)^T + Z (B^T G)^T.
void accumulate_pullback(const Eigen::MatrixXd& basis, const Eigen::MatrixXd& points,
                         const Eigen::MatrixXd& cotangent, Eigen::MatrixXd& grad) {
  grad.noalias() += cotangent * (basis.transpose() * points).transpose();
  grad.noalias() += points * (basis.transpose() * cotangent).transpose();
}

struct OrthTerms {
  Eigen::MatrixXd cs, ci, ct;
  Eigen::RowVectorXd si, st, it;  // per-point dot products
};

OrthTerms orth_terms(const SubspaceBases& b, const Eigen::MatrixXd& all) {
  OrthTerms t;
  t.cs = projected(b.shared, all);
  t.ci = projected(b.image, all);
  t.ct = projected(b.text, all);
  t.si = t.cs.cwiseProduct(t.ci).colwise().sum();
  t.st = t.cs.cwiseProduct(t.ct).colwise().sum();
  t.it = t.ci.cwiseProduct(t.ct).colwise().sum();
  return t;
}

Eigen::MatrixXd all_points(const LossInputs& in) {
  Eigen::MatrixXd all(in.dim(), in.images.cols() + in.texts.cols());
  all << in.images, in.texts;
  return all;
}

double specificity_term(const Eigen::RowVectorXd& sq_norms, const LossWeights& w) {
  if (w.specificity_mode == SpecificityMode::literal) return sq_norms.sum();
  return (w.hinge_margin - sq_norms.array()).max(0.0).sum();
}

// d/d(component) of the specificity term, column by column.
Eigen::MatrixXd specificity_cotangent(const Eigen::MatrixXd& comps,
                                      const Eigen::RowVectorXd& sq_norms, const LossWeights& w) {
  if (w.specificity_mode == SpecificityMode::literal) return 2.0 * comps;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(comps.rows(), comps.cols());
  for (Eigen::Index k = 0; k < comps.cols(); ++k) {
    if (w.hinge_margin - sq_norms[k] > 0.0) g.col(k) = -2.0 * comps.col(k);
  }
  return g;
}

void require_pairs(const LossInputs& in) {
  if (in.pair_diffs.cols() == 0) throw DomainError("alignment loss needs at least one pair");
}

void require_dim(const SubspaceBases& b, const LossInputs& in) {
  if (b.dim() != in.dim() || b.image.rows() != in.dim() || b.text.rows() != in.dim()) {
    throw DomainError("decomposition and corpus dimensions differ");
  }
}

}  // namespace

LossBreakdown evaluate_loss(const SubspaceBases& b, const LossInputs& in, const LossWeights& w) {
  w.validate();
  require_dim(b, in);
  require_pairs(in);
  LossBreakdown out;
  out.align = projected(b.shared, in.pair_diffs).squaredNorm();

  const OrthTerms t = orth_terms(b, all_points(in));
  out.orth = t.si.squaredNorm() + t.st.squaredNorm() + t.it.squaredNorm();

  const Eigen::MatrixXd img_i = projected(b.image, in.images);
  const Eigen::MatrixXd txt_t = projected(b.text, in.texts);
  out.specificity = specificity_term(img_i.colwise().squaredNorm(), w) +
                    specificity_term(txt_t.colwise().squaredNorm(), w);

  out.total = out.align + w.lambda * out.orth + w.gamma * out.specificity;
  return out;
}

SubspaceBases loss_gradient(const SubspaceBases& b, const LossInputs& in, const LossWeights& w) {
  w.validate();
  require_dim(b, in);
  require_pairs(in);
  SubspaceBases g{Eigen::MatrixXd::Zero(b.shared.rows(), b.shared.cols()),
                  Eigen::MatrixXd::Zero(b.image.rows(), b.image.cols()),
                  Eigen::MatrixXd::Zero(b.text.rows(), b.text.cols())};

  // alignment: L = ||C||^2 with C = Pi_s U, so dL/dC = 2 C
  accumulate_pullback(b.shared, in.pair_diffs, 2.0 * projected(b.shared, in.pair_diffs), g.shared);

  if (w.lambda != 0.0) {
    const Eigen::MatrixXd all = all_points(in);
    const OrthTerms t = orth_terms(b, all);
    // d(a.b)^2 / da = 2 (a.b) b
    const Eigen::MatrixXd gs = 2.0 * w.lambda *
                               (t.ci * t.si.asDiagonal() + t.ct * t.st.asDiagonal());
    const Eigen::MatrixXd gi = 2.0 * w.lambda *
                               (t.cs * t.si.asDiagonal() + t.ct * t.it.asDiagonal());
    const Eigen::MatrixXd gt = 2.0 * w.lambda *
                               (t.cs * t.st.asDiagonal() + t.ci * t.it.asDiagonal());
    accumulate_pullback(b.shared, all, gs, g.shared);
    accumulate_pullback(b.image, all, gi, g.image);
    accumulate_pullback(b.text, all, gt, g.text);
  }

  if (w.gamma != 0.0) {
    const Eigen::MatrixXd img_i = projected(b.image, in.images);
    const Eigen::MatrixXd txt_t = projected(b.text, in.texts);
    accumulate_pullback(b.image, in.images,
                        w.gamma * specificity_cotangent(img_i, img_i.colwise().squaredNorm(), w),
                        g.image);
    accumulate_pullback(b.text, in.texts,
                        w.gamma * specificity_cotangent(txt_t, txt_t.colwise().squaredNorm(), w),
                        g.text);
  }
  return g;
}

LossBreakdown evaluate_loss(const Decomposition& dec, const EmbeddedCorpus& corpus,
                            const LossWeights& weights) {
  return evaluate_loss(dec.bases(), LossInputs::from_corpus(corpus), weights);
}

double loss_align(const Decomposition& dec, const EmbeddedCorpus& corpus) {
  const LossInputs in = LossInputs::from_corpus(corpus);
  require_dim(dec.bases(), in);
  require_pairs(in);
  return projected(dec.basis(Subspace::shared), in.pair_diffs).squaredNorm();
}

double loss_orth(const Decomposition& dec, const EmbeddedCorpus& corpus) {
  const LossInputs in = LossInputs::from_corpus(corpus);
  require_dim(dec.bases(), in);
  const OrthTerms t = orth_terms(dec.bases(), all_points(in));
  return t.si.squaredNorm() + t.st.squaredNorm() + t.it.squaredNorm();
}

double loss_specificity(const Decomposition& dec, const EmbeddedCorpus& corpus,
                        const LossWeights& weights) {
  weights.validate();
  const LossInputs in = LossInputs::from_corpus(corpus);
  require_dim(dec.bases(), in);
  const Eigen::MatrixXd img_i = projected(dec.basis(Subspace::image), in.images);
  const Eigen::MatrixXd txt_t = projected(dec.basis(Subspace::text), in.texts);
  return specificity_term(img_i.colwise().squaredNorm(), weights) +
         specificity_term(txt_t.colwise().squaredNorm(), weights);
}

double total_loss(const Decomposition& dec, const EmbeddedCorpus& corpus,
                  const LossWeights& weights) {
  return evaluate_loss(dec, corpus, weights).total;
}

}  // namespace fiberalign
