#include <gtest/gtest.h>

#include <numeric>

#include "fiberalign/parallel.hpp"
#include "fiberalign/rng.hpp"

using namespace fiberalign;

TEST(RandomStream, SameSeedSameDraws) {
  RandomStream a(42), b(42);
  for (int k = 0; k < 100; ++k) ASSERT_EQ(a.normal(), b.normal());
  RandomStream c(43);
  EXPECT_NE(RandomStream(42).uniform(), c.uniform());
}

TEST(RandomStream, SubstreamsDependOnlyOnNameAndParent) {
  const RandomStream root(7);
  RandomStream x1 = root.substream("noise");
  RandomStream parent_used(7);
  for (int k = 0; k < 50; ++k) parent_used.normal();
  RandomStream x2 = parent_used.substream("noise");
  EXPECT_EQ(x1.key(), x2.key());
  EXPECT_EQ(x1.uniform(), x2.uniform());
  EXPECT_NE(root.substream("noise").key(), root.substream("mc").key());
  EXPECT_NE(root.substream(std::uint64_t{0}).key(), root.substream(std::uint64_t{1}).key());
}

TEST(RandomStream, UniformStaysInRange) {
  RandomStream r(3);
  for (int k = 0; k < 10000; ++k) {
    const double u = r.uniform(-2.0, 5.0);
    ASSERT_GE(u, -2.0);
    ASSERT_LT(u, 5.0);
  }
}

TEST(RandomStream, BallPerturbationRespectsRadius) {
  RandomStream r(11);
  double max_norm = 0.0;
  for (int k = 0; k < 5000; ++k) {
    const Eigen::VectorXd d = r.ball_perturbation(6, 0.3);
    ASSERT_LE(d.norm(), 0.3);
    max_norm = std::max(max_norm, d.norm());
  }
  EXPECT_GT(max_norm, 0.29);
  EXPECT_EQ(r.ball_perturbation(4, 0.0).norm(), 0.0);
}

TEST(RandomStream, NormalMomentsRoughlyStandard) {
  RandomStream r(5);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.015);
}

TEST(Parallel, BlocksRunOnceRegardlessOfWorkers) {
  for (std::size_t workers : {1u, 2u, 5u}) {
    std::vector<int> hits(37, 0);
    for_each_block(hits.size(), workers, [&](std::size_t b) { hits[b] += 1; });
    EXPECT_EQ(std::accumulate(hits.begin(), hits.end(), 0), 37);
    EXPECT_TRUE(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  }
}
