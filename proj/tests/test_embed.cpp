#include <gtest/gtest.h>

#include <sstream>

#include "fiberalign/errors.hpp"
#include "fiberalign/embed.hpp"

using namespace fiberalign;

TEST(EmbeddingMap, DeterministicInSeed) {
  const EmbeddingMap a = build_map(9, 16, 4, 256);
  const EmbeddingMap b = build_map(9, 16, 4, 256);
  const EmbeddingMap c = build_map(10, 16, 4, 256);
  EXPECT_EQ(a.weights(), b.weights());
  EXPECT_NE(a.weights(), c.weights());
  const double bound = 1.0 / 4.0;
  EXPECT_LE(a.weights().cwiseAbs().maxCoeff(), bound);
}

TEST(EmbeddingMap, AppliesWeightsToNormalizedCoefficients) {
  Eigen::MatrixXd w(2, 3);
  w << 1, 2, 3, -1, 0, 1;
  const EmbeddingMap map(w, 11);
  // (10, 5) padded to (10, 5, 0), divided by 10
  const Eigen::VectorXd y = embed_poly(map, RingPoly(11, {10, 5}));
  EXPECT_DOUBLE_EQ(y(0), 1.0 + 1.0);
  EXPECT_DOUBLE_EQ(y(1), -1.0);
  EXPECT_EQ(map(RingPoly::zero(11)), Eigen::VectorXd::Zero(2));
}

TEST(EmbeddingMap, RejectsWrongRingOrLength) {
  const EmbeddingMap map = build_map(1, 2, 3, 256);
  EXPECT_THROW(map(RingPoly(7, {1})), DomainError);
  EXPECT_THROW(map(RingPoly(256, {1, 2, 3})), DomainError);
  EXPECT_THROW(build_map(1, 0, 3, 256), DomainError);
}

TEST(EmbeddedCorpus, ValidatesPoints) {
  EmbeddedCorpus c(2);
  c.add_point("a", Modality::image, Eigen::Vector2d(1, 2));
  c.add_point("a", Modality::text, Eigen::Vector2d(1, 2));  // ids are per modality
  EXPECT_THROW(c.add_point("a", Modality::image, Eigen::Vector2d(0, 0)), DomainError);
  EXPECT_THROW(c.add_point("b", Modality::image, Eigen::Vector3d(0, 0, 0)), DomainError);
  EXPECT_THROW(c.add_point("b", Modality::image, Eigen::Vector2d(NAN, 0)), DomainError);
  EXPECT_THROW(c.add_point("", Modality::image, Eigen::Vector2d(0, 0)), DomainError);
  EXPECT_THROW(c.add_pair("a", "zzz"), DomainError);
  c.add_pair("a", "a");
  EXPECT_EQ(c.count(Modality::image), 1u);
  EXPECT_EQ(c.pairs().size(), 1u);
}

TEST(EmbeddedCorpus, GaussianSamplerCountsAndIds) {
  const auto c = sample_gaussian_corpus(GaussianSpec::centered(3), GaussianSpec::centered(3, 2.0),
                                        12, 7, 5);
  EXPECT_EQ(c.count(Modality::image), 12u);
  EXPECT_EQ(c.count(Modality::text), 7u);
  EXPECT_EQ(c.points_of(Modality::image).ids.front(), "i00");
  EXPECT_EQ(c.points_of(Modality::text).ids.back(), "t6");
  EXPECT_EQ(c, sample_gaussian_corpus(GaussianSpec::centered(3),
                                      GaussianSpec::centered(3, 2.0), 12, 7, 5));
  EXPECT_EQ(make_id("i", 7, 1000), "i007");
}

TEST(CorpusIo, RoundTripIsExact) {
  auto c = sample_gaussian_corpus(GaussianSpec::centered(4), GaussianSpec::centered(4), 20, 20, 3);
  c.add_pair("i03", "t17");
  std::stringstream s;
  write_corpus(c, s);
  const EmbeddedCorpus back = read_corpus(s);
  EXPECT_EQ(back, c);
  std::stringstream again;
  write_corpus(back, again);
  std::stringstream first;
  write_corpus(c, first);
  EXPECT_EQ(again.str(), first.str());
}

TEST(CorpusIo, ErrorsNameTheLine) {
  std::istringstream bad_number("dim=2\na,image,1,2\nb,text,1,x\n");
  try {
    read_corpus(bad_number, "c.csv");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.source(), "c.csv");
  }
  std::istringstream bad_modality("dim=1\na,audio,1\n");
  EXPECT_THROW(read_corpus(bad_modality), ParseError);
  std::istringstream bad_header("dimension=1\n");
  EXPECT_THROW(read_corpus(bad_header), ParseError);
  std::istringstream ragged("dim=2\na,image,1,2\nb,text,1\n");
  try {
    read_corpus(ragged, "r.csv");
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("r.csv:3"), std::string::npos);
  }
}

TEST(CorpusIo, MissingFileIsIoError) {
  EXPECT_THROW(load_corpus("/nonexistent/corpus.csv"), IoError);
}
