#pragma once

#include "gdmap/point_cloud.hpp"

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace gdmap {

enum class Provenance { analytic, estimated };

/// Per-point drift b(x_i) and diffusion matrix A(x_i) = sigma sigma^T / 2.
///
/// The kernels use A(x_i) + eta I, which must be symmetric positive definite
/// for every i. That is checked when the factorization is attempted, so a
/// field can be built before eta is tuned.
struct DriftDiffusionField {
  RowMatrix drift;                        // m x N
  std::vector<Eigen::MatrixXd> diffusion; // m entries, each N x N symmetric
  double eta = 0.0;
  Provenance provenance = Provenance::analytic;
  /// Per-point scale of the statistical error of the diffusion estimate.
  std::optional<Eigen::VectorXd> diffusion_stderr;
  /// Lag used by the estimators; recorded for provenance only.
  std::optional<double> tau;

  std::size_t size() const noexcept { return static_cast<std::size_t>(drift.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(drift.cols()); }

  /// Throws invalid-argument when shapes disagree with the cloud, when a
  /// value is non-finite, when a diffusion matrix is not symmetric, or eta < 0.
  void validate(const PointCloud& cloud) const;

  /// Constant diffusion matrix at every point.
  static DriftDiffusionField constant_diffusion(RowMatrix drift, const Eigen::MatrixXd& diffusion,
                                                double eta = 0.0,
                                                Provenance provenance = Provenance::analytic);
};

}  // namespace gdmap
