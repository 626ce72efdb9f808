#pragma once

#include "gdmap/errors.hpp"
#include "gdmap/point_cloud.hpp"
#include "gdmap/random.hpp"

#include <boost/math/distributions/normal.hpp>
#include <doctest.h>

#include <cmath>
#include <functional>

namespace gdmap::test {

/// Runs f and returns the kind of the gdmap::Error it throws.
inline std::optional<ErrorKind> error_kind(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

#define CHECK_ERROR(expr, kind) CHECK(::gdmap::test::error_kind([&] { (void)(expr); }) == (kind))

inline PointCloud grid_1d(double lo, double hi, int m) {
  RowMatrix x(m, 1);
  for (int i = 0; i < m; ++i) x(i, 0) = lo + (hi - lo) * i / (m - 1);
  return PointCloud(x);
}

inline PointCloud uniform_cloud(std::size_t m, std::size_t n, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  Philox4x32 rng(seed);
  RowMatrix x(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = lo + (hi - lo) * rng.uniform();
  return PointCloud(x);
}

/// Points with density proportional to 1 + x on [0, 1] at the quantiles
/// (i + 1/2) / m of the distribution function (x + x^2/2) / (3/2).
inline PointCloud linear_density_quantiles(int m) {
  RowMatrix x(m, 1);
  for (int i = 0; i < m; ++i) {
    const double u = (i + 0.5) / m;
    x(i, 0) = -1.0 + std::sqrt(1.0 + 3.0 * u);
  }
  return PointCloud(x);
}

// Distance from a boundary beyond which the kernel weight exp(-r^2 / 4 eps) is below e^-16.
inline double boundary_margin(double eps) { return 8.0 * std::sqrt(eps); }

inline double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

}  // namespace gdmap::test
