#include "gdmap/point_cloud.hpp"

#include "gdmap/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace gdmap {

PointCloud::PointCloud(RowMatrix points) : points_(std::move(points)) {
  if (points_.rows() < 1 || points_.cols() < 1)
    fail(ErrorKind::invalid_argument, "kernels", "point cloud needs at least one point and one coordinate");
  for (Eigen::Index i = 0; i < points_.rows(); ++i)
    for (Eigen::Index k = 0; k < points_.cols(); ++k)
      if (!std::isfinite(points_(i, k)))
        fail(ErrorKind::invalid_argument, "kernels",
             fmt::format("non-finite coordinate {} of point", k), static_cast<std::size_t>(i));
}

}  // namespace gdmap
