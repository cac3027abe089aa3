#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fiberalign {

// Polynomial over Z_m stored as a positional coefficient vector: coeffs()[k]
// is the degree-k coefficient. Trailing zeros are kept, so the length carries
// the encoder's declared width. An empty vector is the zero polynomial.
class RingPoly {
 public:
  using Coeff = std::uint64_t;

  // Throws DomainError if modulus < 2 or any coefficient is >= modulus.
  RingPoly(Coeff modulus, std::vector<Coeff> coeffs);

  static RingPoly zero(Coeff modulus) { return RingPoly(modulus, {}); }

  Coeff modulus() const noexcept { return modulus_; }
  const std::vector<Coeff>& coeffs() const noexcept { return coeffs_; }
  std::size_t size() const noexcept { return coeffs_.size(); }
  bool empty() const noexcept { return coeffs_.empty(); }

  bool operator==(const RingPoly&) const = default;

 private:
  Coeff modulus_;
  std::vector<Coeff> coeffs_;
};

inline constexpr RingPoly::Coeff kPixelModulus = 256;

// Flattened patch -> element of Z_256[x]. Pixels must lie in [0, 255] and the
// patch must be non-empty; the offending index is named in the error.
RingPoly encode_patch(std::span<const std::int64_t> pixels);

// Same, zero-padded to `width` coefficients. A patch longer than `width` is
// rejected rather than truncated.
RingPoly encode_patch(std::span<const std::int64_t> pixels, std::size_t width);

// Token ids -> element of Z_|V|[x]. An empty sequence is the zero polynomial.
RingPoly encode_tokens(std::span<const std::int64_t> tokens, std::int64_t vocab_size);

std::vector<std::int64_t> decode(const RingPoly& p);

// Coefficient-wise sum mod m; the shorter operand is zero-padded.
RingPoly ring_add(const RingPoly& a, const RingPoly& b);

// Product in Z_m[x]. Length is len(a) + len(b) - 1, or zero if either operand
// is the empty polynomial.
RingPoly ring_mul(const RingPoly& a, const RingPoly& b);

}  // namespace fiberalign
