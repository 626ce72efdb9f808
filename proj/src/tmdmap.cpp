#include "gdmap/tmdmap.hpp"

#include "gdmap/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace gdmap {

TargetDensity TargetDensity::from_values(Eigen::VectorXd values) {
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (!(values[i] > 0.0) || !std::isfinite(values[i]))
      fail(ErrorKind::invalid_target, "tmdmap", fmt::format("target density must be positive and finite, got {}", values[i]),
           static_cast<std::size_t>(i), "zero target values disconnect the point; drop it or fix the target");
  TargetDensity t;
  t.values = std::move(values);
  return t;
}

TargetDensity TargetDensity::from_energy(double beta, Eigen::VectorXd energies) {
  if (!(beta > 0.0) || !std::isfinite(beta))
    fail(ErrorKind::invalid_argument, "tmdmap", fmt::format("beta must be positive, got {}", beta));
  if (energies.size() == 0 || !energies.allFinite())
    fail(ErrorKind::invalid_target, "tmdmap", "energies must be finite and nonempty");
  const double shift = energies.minCoeff();
  Eigen::VectorXd values = (-beta * (energies.array() - shift)).exp().matrix();
  TargetDensity t = from_values(std::move(values));
  t.beta = beta;
  t.energies = std::move(energies);
  return t;
}

namespace {

// Turns a kernel matrix in place into eps^{-1}(D~^{-1} K diag(scaling) - I);
// returns the row sums D~.
Eigen::VectorXd normalize_in_place(SparseRowMatrix& k, const Eigen::VectorXd& scaling, double epsilon,
                                   const char* module) {
  const Eigen::Index m = k.rows();
  Eigen::VectorXd row_sums(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    double s = 0.0;
    for (SparseRowMatrix::InnerIterator it(k, i); it; ++it) {
      it.valueRef() *= scaling[it.col()];
      s += it.value();
    }
    if (!(s > 0.0) || !std::isfinite(s))
      fail(ErrorKind::isolated_point, module, "row of the normalized kernel sums to zero",
           static_cast<std::size_t>(i), "increase epsilon or the cutoff");
    row_sums[i] = s;
    for (SparseRowMatrix::InnerIterator it(k, i); it; ++it) {
      const double p = it.value() / s;
      it.valueRef() = ((it.col() == i) ? p - 1.0 : p) / epsilon;
    }
  }
  return row_sums;
}

}  // namespace

GeneratorMatrix build_tmdmap(KernelMatrix kernel, const DensityEstimate& density, const TargetDensity& target) {
  if (kernel.spec.kind != KernelKind::isotropic)
    fail(ErrorKind::invalid_argument, "tmdmap", "TMDmap uses the isotropic kernel");
  const Eigen::Index m = kernel.entries.rows();
  if (density.values.size() != m || target.values.size() != m)
    fail(ErrorKind::invalid_argument, "tmdmap",
         fmt::format("target ({}) and density ({}) must have one value per point ({})", target.values.size(),
                     density.values.size(), m));
  for (Eigen::Index i = 0; i < m; ++i)
    if (!(target.values[i] > 0.0) || !std::isfinite(target.values[i]))
      fail(ErrorKind::invalid_target, "tmdmap", "target density must be positive and finite",
           static_cast<std::size_t>(i));

  Eigen::VectorXd right(m);
  for (Eigen::Index i = 0; i < m; ++i) right[i] = std::sqrt(target.values[i]) / density.values[i];

  GeneratorMatrix out;
  out.epsilon = kernel.spec.epsilon;
  out.direction = Direction::backward;
  out.kind = GeneratorKind::tmdmap;
  out.entries = std::move(kernel.entries);
  out.aux.row_sums = normalize_in_place(out.entries, right, out.epsilon, "tmdmap");
  out.aux.right_scaling = std::move(right);
  return out;
}

GeneratorMatrix build_tmdmap(const PointCloud& cloud, const TargetDensity& target, double epsilon,
                             const IsotropicOptions& options) {
  if (target.values.size() != static_cast<Eigen::Index>(cloud.size()))
    fail(ErrorKind::invalid_argument, "tmdmap", "target must have one value per point");
  KernelSpec spec{KernelKind::isotropic, epsilon, 0.0, options.cutoff};
  KernelMatrix kernel = build_kernel_matrix(cloud, spec);
  const DensityEstimate density = kernel_density_estimate(kernel);
  return build_tmdmap(std::move(kernel), density, target);
}

GeneratorMatrix build_classic_dmap(const PointCloud& cloud, double alpha, double epsilon,
                                   const IsotropicOptions& options) {
  if (!std::isfinite(alpha)) fail(ErrorKind::invalid_argument, "tmdmap", "alpha must be finite");
  KernelSpec spec{KernelKind::isotropic, epsilon, 0.0, options.cutoff};
  KernelMatrix kernel = build_kernel_matrix(cloud, spec);
  const DensityEstimate density = kernel_density_estimate(kernel);
  Eigen::VectorXd right = density.values.array().pow(-alpha).matrix();

  GeneratorMatrix out;
  out.epsilon = epsilon;
  out.direction = Direction::backward;
  out.kind = GeneratorKind::classic_alpha;
  out.entries = std::move(kernel.entries);
  out.aux.row_sums = normalize_in_place(out.entries, right, epsilon, "tmdmap");
  out.aux.right_scaling = std::move(right);
  return out;
}

StationaryWeights stationary_weights(const GeneratorMatrix& generator, const DensityEstimate& density) {
  if (generator.kind != GeneratorKind::tmdmap)
    fail(ErrorKind::invalid_argument, "tmdmap", "stationary weights are defined for TMDmap generators");
  const auto& aux = generator.aux;
  const Eigen::Index m = static_cast<Eigen::Index>(generator.size());
  if (aux.right_scaling.size() != m || aux.row_sums.size() != m || density.values.size() != m)
    fail(ErrorKind::invalid_argument, "tmdmap", "generator normalizers or density have the wrong length");
  StationaryWeights w;
  w.phi0 = aux.right_scaling.cwiseProduct(aux.row_sums);
  w.phi0 /= w.phi0.sum();
  w.pi_estimate = w.phi0.cwiseProduct(density.values);
  w.pi_estimate /= w.pi_estimate.sum();
  return w;
}

SymmetrizedGenerator::SymmetrizedGenerator(const GeneratorMatrix& generator) : generator_(&generator) {
  const auto& aux = generator.aux;
  const Eigen::Index m = static_cast<Eigen::Index>(generator.size());
  if (m == 0) fail(ErrorKind::invalid_argument, "tmdmap", "empty generator");
  if (generator.direction != Direction::backward ||
      (generator.kind != GeneratorKind::tmdmap && generator.kind != GeneratorKind::classic_alpha))
    fail(ErrorKind::invalid_argument, "tmdmap",
         "symmetrization needs a backward generator built from an isotropic kernel");
  if (aux.right_scaling.size() != m || aux.row_sums.size() != m)
    fail(ErrorKind::invalid_argument, "tmdmap", "generator normalizers were not retained");
  weights_ = aux.right_scaling.cwiseProduct(aux.row_sums);
  for (Eigen::Index i = 0; i < m; ++i)
    if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i]))
      fail(ErrorKind::internal_error, "tmdmap", "nonpositive symmetrization weight", static_cast<std::size_t>(i));
  sqrt_weights_ = weights_.cwiseSqrt();
}

void SymmetrizedGenerator::apply(const double* in, double* out) const {
  const Eigen::Index m = static_cast<Eigen::Index>(size());
  Eigen::Map<const Eigen::VectorXd> x(in, m);
  Eigen::Map<Eigen::VectorXd> y(out, m);
  const Eigen::VectorXd u = x.cwiseQuotient(sqrt_weights_);
  const Eigen::VectorXd lu = generator_->entries * u;
  y = (u + generator_->epsilon * lu).cwiseProduct(sqrt_weights_);
}

SparseRowMatrix SymmetrizedGenerator::matrix() const {
  SparseRowMatrix s = generator_->entries;
  const double eps = generator_->epsilon;
  for (Eigen::Index i = 0; i < s.outerSize(); ++i)
    for (SparseRowMatrix::InnerIterator it(s, i); it; ++it) {
      const double p = eps * it.value() + (it.col() == i ? 1.0 : 0.0);
      it.valueRef() = sqrt_weights_[i] * p / sqrt_weights_[it.col()];
    }
  SparseRowMatrix t = s.transpose();
  return 0.5 * (s + t);
}

Eigen::VectorXd SymmetrizedGenerator::to_generator_vector(const Eigen::Ref<const Eigen::VectorXd>& v) const {
  return v.cwiseQuotient(sqrt_weights_);
}

SymmetrizedGenerator symmetrized_eigenproblem(const GeneratorMatrix& generator) {
  return SymmetrizedGenerator(generator);
}

}  // namespace gdmap
