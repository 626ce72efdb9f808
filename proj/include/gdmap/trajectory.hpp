#pragma once

#include "gdmap/point_cloud.hpp"

namespace gdmap {

/// Time-ordered frames with uniform spacing dt.
struct TrajectoryData {
  RowMatrix frames;  // m_T x N
  double dt = 0.0;

  std::size_t size() const noexcept { return static_cast<std::size_t>(frames.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(frames.cols()); }

  /// Throws invalid-argument unless m_T >= 2, N >= 1, dt > 0 and frames are finite.
  void validate() const;
};

/// Every floor(m_T / m)-th frame, starting with frame 0.
PointCloud thin(const TrajectoryData& trajectory, std::size_t m);

}  // namespace gdmap
