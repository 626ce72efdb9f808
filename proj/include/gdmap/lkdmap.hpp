#pragma once

#include "gdmap/field.hpp"
#include "gdmap/generator.hpp"
#include "gdmap/point_cloud.hpp"

#include <Eigen/Core>

#include <optional>

namespace gdmap {

/// Backward and forward generator built from one local kernel matrix.
struct GeneratorPair {
  GeneratorMatrix backward;
  GeneratorMatrix forward;
  /// D_eps (row sums of the local kernel) for Berry-Sauer, D_eps~ = 1/q_eps~
  /// for LKDmap.
  Eigen::VectorXd density_diag;
};

struct LocalOptions {
  /// Applied to both the local and the isotropic kernel; nullopt keeps all entries.
  std::optional<double> cutoff;
};

/// L = eps^{-1}(D^{-1} K - I), L* = eps^{-1}(K^T D^{-1} - I), D = row sums of
/// the local kernel matrix. Biased when the sampling density is not uniform.
/// The forward matrix is the exact transpose of the backward one. A field
/// with eta > 0 selects the regularized kernel.
GeneratorPair build_berry_sauer(const PointCloud& cloud, const DriftDiffusionField& field, double epsilon,
                                const LocalOptions& options = {});

/// Local-kernel diffusion map with separate dynamics scale eps (time) and
/// density bandwidth eps_tilde (length^2).
///
/// backward = eps^{-1}(D~^{-1} K D - I), forward = eps^{-1}(K^T D D~^{-1} - I)
/// with D = 1/q_eps_tilde and D~ the row sums of K D. The forward matrix acts
/// on density values, so its columns sum to zero under the weights D
/// (stored as forward.aux.measure) and (D backward)^T = D forward.
GeneratorPair build_lkdmap(const PointCloud& cloud, const DriftDiffusionField& field, double epsilon,
                           double epsilon_tilde, const LocalOptions& options = {});

/// Field of the generator v . grad + beta^{-1} Laplacian: b = v, A = beta^{-1} I.
DriftDiffusionField apply_velocity_field(const PointCloud& cloud, const RowMatrix& velocities, double beta_inv);

}  // namespace gdmap
