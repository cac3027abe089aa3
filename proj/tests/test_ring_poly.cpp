#include <gtest/gtest.h>

#include <random>

#include "fiberalign/errors.hpp"
#include "fiberalign/ring_poly.hpp"

using namespace fiberalign;

namespace {

RingPoly random_poly(std::mt19937_64& rng, RingPoly::Coeff m, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<RingPoly::Coeff> c(0, m - 1);
  std::vector<RingPoly::Coeff> v(len(rng));
  for (auto& x : v) x = c(rng);
  return RingPoly(m, std::move(v));
}

// Polynomials compare equal up to trailing zeros.
std::vector<RingPoly::Coeff> trimmed(const RingPoly& p) {
  auto v = p.coeffs();
  while (!v.empty() && v.back() == 0) v.pop_back();
  return v;
}

}  // namespace

TEST(RingPoly, EncodePatchKeepsPixelOrder) {
  const std::vector<std::int64_t> px{5, 0, 0, 200};
  const RingPoly p = encode_patch(px);
  EXPECT_EQ(p.modulus(), 256u);
  EXPECT_EQ(p.coeffs(), (std::vector<RingPoly::Coeff>{5, 0, 0, 200}));
  EXPECT_EQ(decode(p), px);
}

TEST(RingPoly, EncodePatchRejectsOutOfRangePixel) {
  const std::vector<std::int64_t> px{1, 2, 300};
  try {
    encode_patch(px);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("index 2"), std::string::npos);
  }
  const std::vector<std::int64_t> neg{-1};
  EXPECT_THROW(encode_patch(neg), DomainError);
  EXPECT_THROW(encode_patch(std::vector<std::int64_t>{}), DomainError);
}

TEST(RingPoly, PatchWidthPadsOrRejects) {
  const std::vector<std::int64_t> px{7, 8};
  const RingPoly p = encode_patch(px, 5);
  EXPECT_EQ(p.coeffs(), (std::vector<RingPoly::Coeff>{7, 8, 0, 0, 0}));
  EXPECT_THROW(encode_patch(px, 1), DomainError);
}

TEST(RingPoly, EncodeTokens) {
  const std::vector<std::int64_t> toks{101, 2023};
  const RingPoly q = encode_tokens(toks, 50000);
  EXPECT_EQ(q.modulus(), 50000u);
  EXPECT_EQ(q.coeffs(), (std::vector<RingPoly::Coeff>{101, 2023}));
  EXPECT_TRUE(encode_tokens(std::vector<std::int64_t>{}, 50000).empty());
  EXPECT_EQ(encode_tokens(std::vector<std::int64_t>{49999}, 50000).coeffs().front(), 49999u);
  EXPECT_THROW(encode_tokens(std::vector<std::int64_t>{50000}, 50000), DomainError);
  EXPECT_THROW(encode_tokens(toks, 1), DomainError);
}

TEST(RingPoly, ConstructorValidates) {
  EXPECT_THROW(RingPoly(1, {}), DomainError);
  EXPECT_THROW(RingPoly(7, {7}), DomainError);
  EXPECT_NO_THROW(RingPoly(7, {6, 0, 3}));
}

TEST(RingPoly, AddAndMulSmallCases) {
  const RingPoly a(256, {200, 100});
  const RingPoly b(256, {100, 200, 1});
  EXPECT_EQ(ring_add(a, b).coeffs(), (std::vector<RingPoly::Coeff>{44, 44, 1}));
  // (1 + x)(1 + x) = 1 + 2x + x^2 over Z_7; (3 + 4x)(5) = 15 + 20x = 1 + 6x
  const RingPoly c(7, {1, 1});
  EXPECT_EQ(ring_mul(c, c).coeffs(), (std::vector<RingPoly::Coeff>{1, 2, 1}));
  EXPECT_EQ(ring_mul(RingPoly(7, {3, 4}), RingPoly(7, {5})).coeffs(),
            (std::vector<RingPoly::Coeff>{1, 6}));
  EXPECT_TRUE(ring_mul(c, RingPoly::zero(7)).empty());
  EXPECT_THROW(ring_add(c, a), DomainError);
}

TEST(RingPoly, LargeModulusDoesNotOverflow) {
  const RingPoly::Coeff m = ~RingPoly::Coeff{0} - 58;  // 2^64 - 59, prime
  const RingPoly a(m, {m - 1});
  EXPECT_EQ(ring_add(a, a).coeffs().front(), m - 2);
  EXPECT_EQ(ring_mul(a, a).coeffs().front(), 1u);  // (-1)^2
}

TEST(RingPoly, RoundTripRandomized) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> len(1, 64);
  std::uniform_int_distribution<std::int64_t> pix(0, 255);
  std::uniform_int_distribution<std::int64_t> vocab(2, 100000);
  for (int t = 0; t < 2000; ++t) {
    std::vector<std::int64_t> px(len(rng));
    for (auto& x : px) x = pix(rng);
    ASSERT_EQ(decode(encode_patch(px)), px);

    const std::int64_t v = vocab(rng);
    std::uniform_int_distribution<std::int64_t> tok(0, v - 1);
    std::vector<std::int64_t> toks(len(rng) - 1);
    for (auto& x : toks) x = tok(rng);
    ASSERT_EQ(decode(encode_tokens(toks, v)), toks);
  }
}

class RingAxioms : public ::testing::TestWithParam<RingPoly::Coeff> {};

TEST_P(RingAxioms, HoldOnRandomTriples) {
  const RingPoly::Coeff m = GetParam();
  std::mt19937_64 rng(m);
  const RingPoly zero = RingPoly::zero(m);
  const RingPoly one(m, {1});
  for (int t = 0; t < 300; ++t) {
    const RingPoly a = random_poly(rng, m, 6);
    const RingPoly b = random_poly(rng, m, 6);
    const RingPoly c = random_poly(rng, m, 6);
    std::vector<RingPoly::Coeff> neg_a(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) neg_a[k] = (m - a.coeffs()[k]) % m;

    EXPECT_EQ(trimmed(ring_add(a, b)), trimmed(ring_add(b, a)));
    EXPECT_EQ(trimmed(ring_add(ring_add(a, b), c)), trimmed(ring_add(a, ring_add(b, c))));
    EXPECT_EQ(trimmed(ring_add(a, zero)), trimmed(a));
    EXPECT_TRUE(trimmed(ring_add(a, RingPoly(m, neg_a))).empty());
    EXPECT_EQ(trimmed(ring_mul(a, b)), trimmed(ring_mul(b, a)));
    EXPECT_EQ(trimmed(ring_mul(ring_mul(a, b), c)), trimmed(ring_mul(a, ring_mul(b, c))));
    EXPECT_EQ(trimmed(ring_mul(a, one)), trimmed(a));
    EXPECT_EQ(trimmed(ring_mul(a, ring_add(b, c))),
              trimmed(ring_add(ring_mul(a, b), ring_mul(a, c))));
  }
}

INSTANTIATE_TEST_SUITE_P(Moduli, RingAxioms, ::testing::Values(256u, 7u));
