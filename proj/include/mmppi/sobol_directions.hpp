#pragma once

#include <array>
#include <cstdint>

namespace mmppi::detail {

inline constexpr std::size_t kSobolTableDimensions = 256;
inline constexpr int kSobolMaxDegree = 11;

struct SobolPolynomial
{
  int degree;
  std::uint32_t coefficients;
  std::array<std::uint32_t, kSobolMaxDegree> initial;
};

extern const std::array<SobolPolynomial, kSobolTableDimensions - 1> kSobolPolynomials;

}  // namespace mmppi::detail
