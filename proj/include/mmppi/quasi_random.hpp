#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace mmppi {

/// Dense row-major block of sample values.
struct PointSet
{
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double operator()(std::size_t row, std::size_t col) const {return values[row * cols + col];}
  double & operator()(std::size_t row, std::size_t col) {return values[row * cols + col];}
};

/// Gray-code ordered Sobol sequence with 32-bit resolution.
///
/// Direction numbers are the Joe-Kuo set (up to 256 dimensions), so the
/// unshifted stream reproduces the usual reference sequence starting with the
/// all-zeros point. An optional seed applies a random digital shift (XOR of a
/// fixed 32-bit word per dimension), which keeps the net structure while
/// giving a distinct point set per seed.
class SobolStream
{
public:
  static constexpr std::size_t kMaxDimension = 256;

  explicit SobolStream(std::size_t dimension, std::optional<std::uint64_t> shift_seed = std::nullopt);

  std::size_t dimension() const {return dimension_;}
  std::uint64_t index() const {return index_;}

  /// Advance past `n` points without producing them.
  void skip(std::uint64_t n);

  /// Next `n` points as an n x dimension matrix with values in [0, 1).
  PointSet next(std::size_t n);

private:
  void advance();

  std::size_t dimension_;
  std::uint64_t index_ = 0;
  std::vector<std::uint32_t> directions_;  // dimension x 32
  std::vector<std::uint32_t> state_;
  std::vector<std::uint32_t> shift_;
};

/// Free-function form of SobolStream::next.
PointSet sobol_points(SobolStream & stream, std::size_t n);

/// Standard normal quantile (Wichura AS241, relative error around 1e-16).
/// Returns -inf / +inf at 0 / 1.
double normal_quantile(double p);

struct PerturbationScale
{
  double sigma_ddelta = 0.25;  // rad/s
  double sigma_jx = 4.0;       // m/s^3
};

/// Maps uniform points to Gaussian perturbations column by column. Columns
/// [0, horizon) are the steering-rate channel and [horizon, 2 * horizon) the
/// jerk channel. Values at exactly 0 or 1 are nudged half a 32-bit cell inward.
PointSet gaussian_perturbations(const PointSet & points, const PerturbationScale & scale, std::size_t horizon);

}  // namespace mmppi
