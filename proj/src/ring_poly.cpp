#include "fiberalign/ring_poly.hpp"

#include <algorithm>
#include <string>

#include "fiberalign/errors.hpp"

namespace fiberalign {

namespace {

void require_same_modulus(const RingPoly& a, const RingPoly& b) {
  if (a.modulus() != b.modulus()) {
    throw DomainError("ring modulus mismatch: " + std::to_string(a.modulus()) + " vs " +
                      std::to_string(b.modulus()));
  }
}

std::vector<RingPoly::Coeff> checked_coeffs(std::span<const std::int64_t> values,
                                            std::int64_t modulus, const char* what) {
  std::vector<RingPoly::Coeff> out;
  out.reserve(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] < 0 || values[k] >= modulus) {
      throw DomainError(std::string(what) + " at index " + std::to_string(k) + " is " +
                        std::to_string(values[k]) + ", outside [0, " +
                        std::to_string(modulus - 1) + "]");
    }
    out.push_back(static_cast<RingPoly::Coeff>(values[k]));
  }
  return out;
}

}  // namespace

RingPoly::RingPoly(Coeff modulus, std::vector<Coeff> coeffs)
    : modulus_(modulus), coeffs_(std::move(coeffs)) {
  if (modulus_ < 2) throw DomainError("ring modulus must be >= 2");
  for (std::size_t k = 0; k < coeffs_.size(); ++k) {
    if (coeffs_[k] >= modulus_) {
      throw DomainError("coefficient at index " + std::to_string(k) + " is not reduced mod " +
                        std::to_string(modulus_));
    }
  }
}

RingPoly encode_patch(std::span<const std::int64_t> pixels) {
  if (pixels.empty()) throw DomainError("patch is empty");
  return RingPoly(kPixelModulus, checked_coeffs(pixels, kPixelModulus, "pixel"));
}

RingPoly encode_patch(std::span<const std::int64_t> pixels, std::size_t width) {
  if (pixels.size() > width) {
    throw DomainError("patch has " + std::to_string(pixels.size()) +
                      " pixels, more than the degree bound " + std::to_string(width));
  }
  RingPoly p = encode_patch(pixels);
  std::vector<RingPoly::Coeff> padded = p.coeffs();
  padded.resize(width, 0);
  return RingPoly(kPixelModulus, std::move(padded));
}

RingPoly encode_tokens(std::span<const std::int64_t> tokens, std::int64_t vocab_size) {
  if (vocab_size < 2) throw DomainError("vocab_size must be >= 2");
  return RingPoly(static_cast<RingPoly::Coeff>(vocab_size),
                  checked_coeffs(tokens, vocab_size, "token"));
}

std::vector<std::int64_t> decode(const RingPoly& p) {
  return {p.coeffs().begin(), p.coeffs().end()};
}

RingPoly ring_add(const RingPoly& a, const RingPoly& b) {
  require_same_modulus(a, b);
  const auto m = a.modulus();
  std::vector<RingPoly::Coeff> out(std::max(a.size(), b.size()), 0);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const RingPoly::Coeff x = k < a.size() ? a.coeffs()[k] : 0;
    const RingPoly::Coeff y = k < b.size() ? b.coeffs()[k] : 0;
    // x, y < m, so x + (y - m) wraps correctly without overflow
    out[k] = x >= m - y ? x - (m - y) : x + y;
  }
  return RingPoly(m, std::move(out));
}

RingPoly ring_mul(const RingPoly& a, const RingPoly& b) {
  require_same_modulus(a, b);
  const auto m = a.modulus();
  if (a.empty() || b.empty()) return RingPoly::zero(m);
  std::vector<RingPoly::Coeff> out(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const auto term = static_cast<unsigned __int128>(a.coeffs()[i]) * b.coeffs()[j] % m;
      out[i + j] = static_cast<RingPoly::Coeff>((out[i + j] + term) % m);
    }
  }
  return RingPoly(m, std::move(out));
}

}  // namespace fiberalign
