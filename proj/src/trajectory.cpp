#include "gdmap/trajectory.hpp"

#include "gdmap/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace gdmap {

void TrajectoryData::validate() const {
  if (frames.rows() < 2 || frames.cols() < 1)
    fail(ErrorKind::invalid_argument, "estimators", "a trajectory needs at least two frames of dimension >= 1");
  if (!(dt > 0.0) || !std::isfinite(dt))
    fail(ErrorKind::invalid_argument, "estimators", fmt::format("dt must be positive, got {}", dt));
  for (Eigen::Index i = 0; i < frames.rows(); ++i)
    if (!frames.row(i).allFinite())
      fail(ErrorKind::invalid_argument, "estimators", "non-finite trajectory frame", static_cast<std::size_t>(i));
}

PointCloud thin(const TrajectoryData& trajectory, std::size_t m) {
  const std::size_t total = trajectory.size();
  if (m < 1 || m > total)
    fail(ErrorKind::invalid_argument, "reference", fmt::format("cannot thin {} frames to {}", total, m));
  const std::size_t stride = total / m;
  RowMatrix points(static_cast<Eigen::Index>(m), trajectory.frames.cols());
  for (std::size_t j = 0; j < m; ++j)
    points.row(static_cast<Eigen::Index>(j)) = trajectory.frames.row(static_cast<Eigen::Index>(j * stride));
  return PointCloud(std::move(points));
}

}  // namespace gdmap
