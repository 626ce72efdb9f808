#include "gdmap/lkdmap.hpp"

#include "gdmap/errors.hpp"
#include "gdmap/kernels.hpp"

#include <fmt/format.h>

#include <cmath>

namespace gdmap {

namespace {

KernelMatrix local_kernel_matrix(const PointCloud& cloud, const DriftDiffusionField& field, double epsilon,
                                 const LocalOptions& options) {
  field.validate(cloud);
  KernelSpec spec;
  spec.kind = field.eta > 0.0 ? KernelKind::regularized_local : KernelKind::local;
  spec.epsilon = epsilon;
  spec.eta = field.eta;
  spec.cutoff = options.cutoff;
  return build_kernel_matrix(cloud, spec, &field);
}

Eigen::VectorXd scaled_row_sums(const SparseRowMatrix& a, const Eigen::VectorXd* col, const char* module) {
  Eigen::VectorXd sums(a.rows());
  for (Eigen::Index i = 0; i < a.outerSize(); ++i) {
    double s = 0.0;
    for (SparseRowMatrix::InnerIterator it(a, i); it; ++it) s += col ? it.value() * (*col)[it.col()] : it.value();
    if (!(s > 0.0) || !std::isfinite(s))
      fail(ErrorKind::isolated_point, module, "row of the kernel matrix sums to zero", static_cast<std::size_t>(i),
           "increase epsilon or the cutoff");
    sums[i] = s;
  }
  return sums;
}

}  // namespace

GeneratorPair build_berry_sauer(const PointCloud& cloud, const DriftDiffusionField& field, double epsilon,
                                const LocalOptions& options) {
  KernelMatrix kernel = local_kernel_matrix(cloud, field, epsilon, options);
  GeneratorPair out;
  out.density_diag = scaled_row_sums(kernel.entries, nullptr, "lkdmap");

  GeneratorMatrix& l = out.backward;
  l.epsilon = epsilon;
  l.direction = Direction::backward;
  l.kind = GeneratorKind::berry_sauer;
  l.entries = std::move(kernel.entries);
  // Entrywise (K_ij / D_i - delta_ij) / eps, so the transpose reproduces
  // eps^{-1}(K^T D^{-1} - I) with identical rounding.
  for (Eigen::Index i = 0; i < l.entries.outerSize(); ++i)
    for (SparseRowMatrix::InnerIterator it(l.entries, i); it; ++it) {
      const double p = it.value() / out.density_diag[i];
      it.valueRef() = ((it.col() == i) ? p - 1.0 : p) / epsilon;
    }
  l.aux.row_sums = out.density_diag;

  GeneratorMatrix& f = out.forward;
  f.epsilon = epsilon;
  f.direction = Direction::forward;
  f.kind = GeneratorKind::berry_sauer;
  f.entries = SparseRowMatrix(l.entries.transpose());
  f.aux.row_sums = out.density_diag;
  return out;
}

GeneratorPair build_lkdmap(const PointCloud& cloud, const DriftDiffusionField& field, double epsilon,
                           double epsilon_tilde, const LocalOptions& options) {
  if (!(epsilon_tilde > 0.0) || !std::isfinite(epsilon_tilde))
    fail(ErrorKind::invalid_argument, "lkdmap", fmt::format("epsilon_tilde must be positive, got {}", epsilon_tilde));
  const DensityEstimate q = isotropic_density(cloud, epsilon_tilde, options.cutoff);
  KernelMatrix kernel = local_kernel_matrix(cloud, field, epsilon, options);
  if (q.values.size() != kernel.entries.rows())
    fail(ErrorKind::internal_error, "lkdmap", "local and isotropic kernels index different point sets");

  GeneratorPair out;
  out.density_diag = q.values.cwiseInverse();
  const Eigen::VectorXd& d = out.density_diag;
  const Eigen::VectorXd row_sums = scaled_row_sums(kernel.entries, &d, "lkdmap");
  const Eigen::VectorXd inv_rows = row_sums.cwiseInverse();

  // forward_ij = (K_ji d_j / D~_j - delta_ij) / eps, built on K^T before K is
  // overwritten.
  GeneratorMatrix& f = out.forward;
  f.epsilon = epsilon;
  f.direction = Direction::forward;
  f.kind = GeneratorKind::lkdmap;
  f.entries = SparseRowMatrix(kernel.entries.transpose());
  const Eigen::VectorXd col_scale = d.cwiseProduct(inv_rows);
  for (Eigen::Index i = 0; i < f.entries.outerSize(); ++i)
    for (SparseRowMatrix::InnerIterator it(f.entries, i); it; ++it) {
      const double p = it.value() * col_scale[it.col()];
      it.valueRef() = ((it.col() == i) ? p - 1.0 : p) / epsilon;
    }
  f.aux.right_scaling = d;
  f.aux.row_sums = row_sums;
  f.aux.measure = d;

  GeneratorMatrix& l = out.backward;
  l.epsilon = epsilon;
  l.direction = Direction::backward;
  l.kind = GeneratorKind::lkdmap;
  l.entries = std::move(kernel.entries);
  for (Eigen::Index i = 0; i < l.entries.outerSize(); ++i)
    for (SparseRowMatrix::InnerIterator it(l.entries, i); it; ++it) {
      const double p = it.value() * d[it.col()] / row_sums[i];
      it.valueRef() = ((it.col() == i) ? p - 1.0 : p) / epsilon;
    }
  l.aux.right_scaling = d;
  l.aux.row_sums = row_sums;
  return out;
}

DriftDiffusionField apply_velocity_field(const PointCloud& cloud, const RowMatrix& velocities, double beta_inv) {
  if (!(beta_inv > 0.0) || !std::isfinite(beta_inv))
    fail(ErrorKind::invalid_argument, "lkdmap", fmt::format("beta_inv must be positive, got {}", beta_inv));
  if (velocities.rows() != static_cast<Eigen::Index>(cloud.size()) ||
      velocities.cols() != static_cast<Eigen::Index>(cloud.dim()))
    fail(ErrorKind::invalid_argument, "lkdmap", "velocities must have one N-vector per point");
  for (Eigen::Index i = 0; i < velocities.rows(); ++i)
    if (!velocities.row(i).allFinite())
      fail(ErrorKind::invalid_argument, "lkdmap", "non-finite velocity", static_cast<std::size_t>(i));
  const auto n = static_cast<Eigen::Index>(cloud.dim());
  return DriftDiffusionField::constant_diffusion(velocities, beta_inv * Eigen::MatrixXd::Identity(n, n));
}

}  // namespace gdmap
