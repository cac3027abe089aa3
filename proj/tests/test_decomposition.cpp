#include <gtest/gtest.h>

#include <sstream>

#include <Eigen/QR>

#include "fiberalign/decomp.hpp"
#include "fiberalign/errors.hpp"
#include "fiberalign/rng.hpp"

using namespace fiberalign;

namespace {

Eigen::MatrixXd random_matrix(RandomStream& rng, Eigen::Index r, Eigen::Index c) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j) m.col(j) = rng.normal_vector(r);
  return m;
}

}  // namespace

TEST(Decomposition, AxisAlignedLayout) {
  const Decomposition d = Decomposition::axis_aligned(2, 1, 1);
  EXPECT_EQ(d.dim(), 4u);
  EXPECT_TRUE(d.complete());
  EXPECT_TRUE(d.orthogonal());
  const Eigen::VectorXd z = Eigen::Vector4d(1, 2, 3, 4);
  EXPECT_EQ(project(d, z, Subspace::shared), Eigen::Vector4d(1, 2, 0, 0));
  EXPECT_EQ(project(d, z, Subspace::text), Eigen::Vector4d(0, 0, 0, 4));
}

TEST(Decomposition, RandomOrthogonalIsOrthonormal) {
  RandomStream rng(3);
  const Decomposition d = Decomposition::random_orthogonal(3, 4, 2, rng);
  EXPECT_EQ(d.dim(), 9u);
  EXPECT_LE(d.max_cross_inner_product(), 1e-12);
  Eigen::MatrixXd all(9, 9);
  all << d.basis(Subspace::shared), d.basis(Subspace::image), d.basis(Subspace::text);
  EXPECT_LE((all.transpose() * all - Eigen::MatrixXd::Identity(9, 9)).cwiseAbs().maxCoeff(),
            1e-12);
}

TEST(Decomposition, ConstructorValidates) {
  SubspaceBases b;
  b.shared = Eigen::MatrixXd::Identity(3, 2);
  b.image = Eigen::MatrixXd::Identity(3, 1);
  b.text = Eigen::MatrixXd(3, 0);
  EXPECT_NO_THROW(Decomposition{b});
  EXPECT_FALSE(Decomposition(b).orthogonal());  // e_0 appears twice

  SubspaceBases scaled = b;
  scaled.shared *= 2.0;
  EXPECT_THROW(Decomposition{scaled}, DomainError);

  SubspaceBases too_many = b;
  too_many.text = Eigen::MatrixXd::Identity(3, 2);
  EXPECT_THROW(Decomposition{too_many}, DomainError);

  SubspaceBases rows = b;
  rows.image = Eigen::MatrixXd::Identity(4, 1);
  EXPECT_THROW(Decomposition{rows}, DomainError);
}

TEST(Decomposition, SplitNeedsCompleteOrthogonal) {
  SubspaceBases b;
  b.shared = Eigen::MatrixXd::Identity(3, 1);
  b.image = Eigen::MatrixXd::Identity(3, 2).rightCols(1);
  b.text = Eigen::MatrixXd(3, 0);
  const Decomposition partial(b);
  EXPECT_FALSE(partial.complete());
  EXPECT_THROW(split(partial, Eigen::Vector3d(1, 2, 3)), DomainError);
}

TEST(Decomposition, FileRoundTripIsExact) {
  RandomStream rng(12);
  const Decomposition d = Decomposition::random_orthogonal(2, 3, 1, rng);
  std::stringstream s;
  write_decomposition(d, s);
  const std::string text = s.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "dim=6,ds=2,di=3,dt=1");
  const Decomposition back = read_decomposition(s);
  for (Subspace sub : {Subspace::shared, Subspace::image, Subspace::text}) {
    EXPECT_EQ(back.basis(sub), d.basis(sub));
  }
}

TEST(Decomposition, ReadRejectsMalformedFiles) {
  std::istringstream bad_header("dim=2,ds=1\n1,0\n");
  EXPECT_THROW(read_decomposition(bad_header), ParseError);
  std::istringstream short_rows("dim=2,ds=1,di=1,dt=0\n1,0\n");
  EXPECT_THROW(read_decomposition(short_rows), ParseError);
  std::istringstream bad_value("dim=2,ds=1,di=1,dt=0\n1,zero\n0,1\n");
  EXPECT_THROW(read_decomposition(bad_value), ParseError);
  EXPECT_THROW(load_decomposition("/nonexistent/dec.csv"), IoError);
}

TEST(ProjectorLaws, HoldForRandomDecompositions) {
  RandomStream rng(4);
  for (std::size_t d = 3; d <= 16; d += 3) {
    const Decomposition dec = Decomposition::random_orthogonal(d / 3, d / 3, d - 2 * (d / 3), rng);
    const CheckReport laws = projector_laws_check(dec, 200, d);
    EXPECT_TRUE(laws.passed) << laws.to_json().dump();
    const CheckReport norms = norm_decomposition_check(dec, 200, d);
    EXPECT_TRUE(norms.passed) << norms.to_json().dump();
  }
}

TEST(ProjectorLaws, RejectIncompleteDecomposition) {
  SubspaceBases b;
  b.shared = Eigen::MatrixXd::Identity(3, 1);
  b.image = Eigen::MatrixXd::Identity(3, 2).rightCols(1);
  b.text = Eigen::MatrixXd(3, 0);
  EXPECT_THROW(projector_laws_check(Decomposition(b), 5, 0), DomainError);
  EXPECT_THROW(norm_decomposition_check(Decomposition(b), 5, 0), DomainError);
}

TEST(PerturbStability, HoldsAndDegeneratesAtZero) {
  RandomStream rng(8);
  const Decomposition dec = Decomposition::random_orthogonal(3, 3, 2, rng);
  const CheckReport r = perturb_stability_check(dec, 500, 0.5, 1);
  EXPECT_TRUE(r.passed) << r.to_json().dump();
  const CheckReport z = perturb_stability_check(dec, 50, 0.0, 1);
  EXPECT_TRUE(z.passed);
  EXPECT_EQ(z.details.back()["max_projection_shift"], 0.0);
  EXPECT_THROW(perturb_stability_check(dec, 1, -1.0, 1), DomainError);
}

TEST(PerturbStability, DeltaInsideImageSubspaceOnlyMovesImagePart) {
  RandomStream rng(9);
  const Decomposition dec = Decomposition::random_orthogonal(2, 2, 2, rng);
  const Eigen::VectorXd delta = dec.basis(Subspace::image) * Eigen::Vector2d(0.3, -0.1);
  const ComponentSplit s = split(dec, delta);
  EXPECT_LE(s.z_s.norm(), 1e-15);
  EXPECT_LE(s.z_t.norm(), 1e-15);
  EXPECT_NEAR(s.z_i.norm(), delta.norm(), 1e-15);
}

TEST(NumericalRank, CountsAboveRelativeTolerance) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 4);
  m.diagonal() << 1.0, 1e-3, 1e-9, 0.0;
  EXPECT_EQ(numerical_rank(m), 2u);
  EXPECT_EQ(numerical_rank(m, 1e-10), 3u);
  EXPECT_EQ(numerical_rank(Eigen::MatrixXd::Zero(3, 3)), 0u);
}

TEST(DimConstraint, RandomLowRankConstructions) {
  RandomStream rng(31);
  for (int t = 0; t < 50; ++t) {
    const Eigen::Index r = 1 + t % 3, a = 1 + (t / 3) % 2, b = 1 + (t / 5) % 2;
    const Eigen::Index d = r + a + b + t % 4;
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(random_matrix(rng, d, d))
                                  .householderQ() * Eigen::MatrixXd::Identity(d, d);
    Eigen::MatrixXd bf(d, r + a), bg(d, r + b);
    bf << q.leftCols(r), q.middleCols(r, a);
    // generic (non-orthogonal) extra directions for G
    bg << q.leftCols(r), q.middleCols(r + a, b) + 0.3 * q.middleCols(r, b);
    const Eigen::MatrixXd f = bf * random_matrix(rng, r + a, 30);
    const Eigen::MatrixXd g = bg * random_matrix(rng, r + b, 25);
    const DimConstraintResult res = check_dim_constraint(f, g);
    EXPECT_EQ(res.rank_f, static_cast<std::size_t>(r + a));
    EXPECT_EQ(res.rank_g, static_cast<std::size_t>(r + b));
    EXPECT_EQ(res.rank_shared, static_cast<std::size_t>(r)) << "trial " << t;
    EXPECT_TRUE(res.holds());
  }
}

TEST(DimConstraint, WithExplicitDecomposition) {
  RandomStream rng(2);
  const Decomposition dec = Decomposition::axis_aligned(2, 1, 1);
  const Eigen::MatrixXd f = random_matrix(rng, 4, 10);
  const Eigen::MatrixXd g = random_matrix(rng, 4, 10);
  const DimConstraintResult res = check_dim_constraint(f, g, kDefaultRankTol, &dec);
  EXPECT_EQ(res.rank_shared, 2u);
  EXPECT_TRUE(res.report().passed);
  EXPECT_THROW(check_dim_constraint(f, Eigen::MatrixXd(3, 2)), DomainError);
}
