#include "mmppi/quasi_random.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "mmppi/errors.hpp"
#include "mmppi/sobol_directions.hpp"

namespace mmppi {

namespace {

constexpr int kBits = 32;
constexpr double kScale = 1.0 / 4294967296.0;  // 2^-32

void fill_directions(std::size_t dim, std::uint32_t * v)
{
  if (dim == 0) {
    for (int j = 0; j < kBits; ++j) {
      v[j] = std::uint32_t{1} << (kBits - 1 - j);
    }
    return;
  }
  const auto & poly = detail::kSobolPolynomials[dim - 1];
  const int s = poly.degree;
  for (int j = 0; j < s && j < kBits; ++j) {
    v[j] = poly.initial[j] << (kBits - 1 - j);
  }
  for (int j = s; j < kBits; ++j) {
    v[j] = v[j - s] ^ (v[j - s] >> s);
    for (int k = 1; k < s; ++k) {
      if ((poly.coefficients >> (s - 1 - k)) & 1U) {
        v[j] ^= v[j - k];
      }
    }
  }
}

}  // namespace

SobolStream::SobolStream(std::size_t dimension, std::optional<std::uint64_t> shift_seed)
: dimension_(dimension),
  directions_(dimension * kBits),
  state_(dimension, 0),
  shift_(dimension, 0)
{
  if (dimension == 0) {
    throw ConfigError("Sobol dimension must be at least 1", "dimension");
  }
  if (dimension > kMaxDimension) {
    throw ConfigError(
            "Sobol dimension " + std::to_string(dimension) + " exceeds the direction table (" +
            std::to_string(kMaxDimension) + ")", "dimension");
  }
  for (std::size_t d = 0; d < dimension; ++d) {
    fill_directions(d, &directions_[d * kBits]);
  }
  if (shift_seed) {
    std::mt19937_64 rng(*shift_seed);
    for (auto & word : shift_) {
      word = static_cast<std::uint32_t>(rng() >> 32);
    }
  }
}

void SobolStream::advance()
{
  if (index_ >= (std::uint64_t{1} << kBits) - 1) {
    throw std::out_of_range("Sobol stream exhausted");
  }
  // Gray-code update: flip the direction number of the lowest zero bit.
  const int bit = std::countr_one(index_);
  for (std::size_t d = 0; d < dimension_; ++d) {
    state_[d] ^= directions_[d * kBits + static_cast<std::size_t>(bit)];
  }
  ++index_;
}

void SobolStream::skip(std::uint64_t n)
{
  for (std::uint64_t i = 0; i < n; ++i) {
    advance();
  }
}

PointSet SobolStream::next(std::size_t n)
{
  PointSet out{n, dimension_, std::vector<double>(n * dimension_)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < dimension_; ++d) {
      out.values[i * dimension_ + d] = static_cast<double>(state_[d] ^ shift_[d]) * kScale;
    }
    advance();
  }
  return out;
}

PointSet sobol_points(SobolStream & stream, std::size_t n)
{
  return stream.next(n);
}

double normal_quantile(double p)
{
  if (p <= 0.0) {
    return -std::numeric_limits<double>::infinity();
  }
  if (p >= 1.0) {
    return std::numeric_limits<double>::infinity();
  }

  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * (((((((r * 2509.0809287301226727 +
           33430.575583588128105) * r + 67265.770927008700853) * r +
           45921.953931549871457) * r + 13731.693765509461125) * r +
           1971.5909503065514427) * r + 133.14166789178437745) * r +
           3.387132872796366608) /
           (((((((r * 5226.495278852545925 +
           28729.085735721942674) * r + 39307.89580009271061) * r +
           21213.794301586595867) * r + 5394.1960214247511077) * r +
           687.1870074920579083) * r + 42.313330701600911252) * r + 1.0);
  }

  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((r * 7.7454501427834140764e-4 +
      0.0227238449892691845833) * r + 0.24178072517745061177) * r +
      1.27045825245236838258) * r + 3.64784832476320460504) * r +
      5.7694972214606914055) * r + 4.6303378461565452959) * r +
      1.42343711074968357734) /
      (((((((r * 1.05075007164441684324e-9 +
      5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
      0.14810397642748007459) * r + 0.68976733498510000455) * r +
      1.6763848301838038494) * r + 2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((r * 2.01033439929228813265e-7 +
      2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
      0.026532189526576123093) * r + 0.29656057182850489123) * r +
      1.7848265399172913358) * r + 5.4637849111641143699) * r +
      6.6579046435011037772) /
      (((((((r * 2.04426310338993978564e-15 +
      1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
      7.868691311456132591e-4) * r + 0.0148753612908506148525) * r +
      0.13692988092273580531) * r + 0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -value : value;
}

PointSet gaussian_perturbations(const PointSet & points, const PerturbationScale & scale, std::size_t horizon)
{
  if (points.cols != 2 * horizon) {
    throw ConfigError("perturbation points must have 2 * horizon columns", "T");
  }
  constexpr double lo = 0.5 * kScale;
  constexpr double hi = 1.0 - 0.5 * kScale;
  PointSet out{points.rows, points.cols, std::vector<double>(points.values.size())};
  for (std::size_t i = 0; i < points.rows; ++i) {
    for (std::size_t c = 0; c < points.cols; ++c) {
      double u = points(i, c);
      if (u < lo) {
        u = lo;
      } else if (u > hi) {
        u = hi;
      }
      const double sigma = c < horizon ? scale.sigma_ddelta : scale.sigma_jx;
      out(i, c) = normal_quantile(u) * sigma;
    }
  }
  return out;
}

}  // namespace mmppi
