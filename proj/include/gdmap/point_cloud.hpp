#pragma once

#include <Eigen/Core>

#include <cstddef>

namespace gdmap {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// m samples in N-dimensional ambient space. Row i is sample x_i for the
/// lifetime of every matrix built from the cloud.
class PointCloud {
 public:
  /// Throws invalid-argument on an empty matrix or a non-finite coordinate.
  explicit PointCloud(RowMatrix points);

  std::size_t size() const noexcept { return static_cast<std::size_t>(points_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(points_.cols()); }

  auto point(std::size_t i) const noexcept { return points_.row(static_cast<Eigen::Index>(i)); }
  const RowMatrix& matrix() const noexcept { return points_; }

 private:
  RowMatrix points_;
};

}  // namespace gdmap
