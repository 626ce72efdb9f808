#pragma once

#include "gdmap/field.hpp"
#include "gdmap/point_cloud.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <optional>

namespace gdmap {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class KernelKind { isotropic, local, regularized_local };

const char* to_string(KernelKind kind) noexcept;

struct KernelSpec {
  KernelKind kind = KernelKind::isotropic;
  double epsilon = 1.0;
  /// Only read for regularized_local; the field's own eta is ignored then.
  double eta = 0.0;
  /// Entries whose exponent (the argument of exp(-.)) exceeds the cutoff are
  /// dropped. nullopt keeps every entry.
  std::optional<double> cutoff;

  void validate() const;
};

/// Cutoff for which the mass dropped from any row is below 1e-12 of the row
/// sum: at most m-1 entries are dropped, each below exp(-cutoff), and an
/// isotropic row sum is at least the self-term 1.
double default_cutoff(std::size_t m);

/// exp(-|x-y|^2 / (4 eps)).
double isotropic_kernel(const Eigen::Ref<const Eigen::VectorXd>& x,
                        const Eigen::Ref<const Eigen::VectorXd>& y, double epsilon);

/// exp(-(x-y+eps b)^T A^{-1} (x-y+eps b) / (4 eps)) with A and b taken at x.
/// A non-SPD A is reported as singular-diffusion.
double local_kernel(const Eigen::Ref<const Eigen::VectorXd>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& y, double epsilon,
                    const Eigen::Ref<const Eigen::MatrixXd>& diffusion,
                    const Eigen::Ref<const Eigen::VectorXd>& drift);

/// local_kernel with A replaced by A_hat + eta I.
double regularized_local_kernel(const Eigen::Ref<const Eigen::VectorXd>& x,
                                const Eigen::Ref<const Eigen::VectorXd>& y, double epsilon,
                                const Eigen::Ref<const Eigen::MatrixXd>& diffusion_hat,
                                const Eigen::Ref<const Eigen::VectorXd>& drift_hat, double eta);

struct KernelMatrix {
  SparseRowMatrix entries;  // (i, j) = k(x_i, x_j); the diagonal is always stored
  KernelSpec spec;
  bool symmetric = false;

  std::size_t size() const noexcept { return static_cast<std::size_t>(entries.rows()); }
};

/// Assembles K(i, j) = k(x_i, x_j), evaluating A and b at the row point.
/// The field must be present exactly when spec.kind is not isotropic.
KernelMatrix build_kernel_matrix(const PointCloud& cloud, const KernelSpec& spec,
                                 const DriftDiffusionField* field = nullptr);

struct DensityEstimate {
  Eigen::VectorXd values;  // unnormalized q_eps(x_i), self-term included
  double epsilon = 0.0;
};

/// Row sums of an isotropic kernel matrix.
DensityEstimate kernel_density_estimate(const KernelMatrix& kernel);

/// Row sums of the isotropic kernel matrix with the given cutoff, computed
/// without storing the matrix; identical to kernel_density_estimate of it.
DensityEstimate isotropic_density(const PointCloud& cloud, double epsilon,
                                  std::optional<double> cutoff = std::nullopt);

/// Sum of all entries of the isotropic kernel matrix, without storing it.
double isotropic_kernel_sum(const PointCloud& cloud, double epsilon);

}  // namespace gdmap
