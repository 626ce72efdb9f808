#pragma once

#include "gdmap/field.hpp"
#include "gdmap/point_cloud.hpp"
#include "gdmap/trajectory.hpp"

#include <Eigen/Core>

#include <optional>

namespace gdmap {

/// Endpoints X_tau of independent realizations started at the same point.
struct BurstEnsemble {
  Eigen::VectorXd start;
  RowMatrix endpoints;  // n_b x N
  double tau = 0.0;
};

struct KramersMoyalEstimate {
  Eigen::VectorXd drift;      // mean(X_tau - x) / tau
  Eigen::MatrixXd diffusion;  // cov(X_tau - x) / (2 tau), divisor n_b - 1
  /// Largest per-entry standard error of the diffusion estimate.
  double standard_error = 0.0;
  std::size_t samples = 0;
};

/// Throws insufficient-samples when n_b < 2.
KramersMoyalEstimate km_from_bursts(const BurstEnsemble& ensemble);

/// Per-query estimate from the frames of one long trajectory lying within
/// radius of the query, each paired with its successor at lag round(tau / dt).
/// eta defaults to the median per-point standard error.
DriftDiffusionField km_from_trajectory(const TrajectoryData& trajectory, const PointCloud& queries, double radius,
                                       double tau, std::optional<double> eta = std::nullopt);

}  // namespace gdmap
