#pragma once

#include "gdmap/generator.hpp"
#include "gdmap/kernels.hpp"
#include "gdmap/point_cloud.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <optional>

namespace gdmap {

/// Target density pi(x_i), known up to a common positive constant.
struct TargetDensity {
  Eigen::VectorXd values;
  std::optional<double> beta;
  std::optional<Eigen::VectorXd> energies;

  /// Throws invalid-target on a nonpositive or non-finite value.
  static TargetDensity from_values(Eigen::VectorXd values);
  /// pi = exp(-beta (U - min U)); the shift avoids underflow, only ratios matter.
  static TargetDensity from_energy(double beta, Eigen::VectorXd energies);
};

/// Options shared by the isotropic-kernel generators.
struct IsotropicOptions {
  std::optional<double> cutoff;
};

/// Target-measure diffusion map L_{eps,pi} = eps^{-1}(D~^{-1} K D - I) with
/// D = pi^{1/2} / q_eps. aux.right_scaling holds D, aux.row_sums holds D~.
GeneratorMatrix build_tmdmap(const PointCloud& cloud, const TargetDensity& target, double epsilon,
                             const IsotropicOptions& options = {});

/// Same construction from a precomputed isotropic kernel matrix and density;
/// used by the invariance checks. The kernel matrix is consumed.
GeneratorMatrix build_tmdmap(KernelMatrix kernel, const DensityEstimate& density, const TargetDensity& target);

/// Classic alpha-normalized diffusion map: right-normalize by q^{-alpha},
/// row-normalize, subtract I, divide by eps.
GeneratorMatrix build_classic_dmap(const PointCloud& cloud, double alpha, double epsilon,
                                   const IsotropicOptions& options = {});

struct StationaryWeights {
  Eigen::VectorXd phi0;        // diag(D D~), normalized to sum 1
  Eigen::VectorXd pi_estimate; // phi0 * q_eps, normalized to sum 1
};

/// Left zero eigenvector of a TMDmap generator, read off its normalizers.
StationaryWeights stationary_weights(const GeneratorMatrix& generator, const DensityEstimate& density);

/// Symmetric matrix similar to the Markov part of a TMDmap generator.
///
/// S = W^{1/2} (I + eps L) W^{-1/2} with W = diag(D D~). An eigenpair (mu, v)
/// of S gives the pair (eps^{-1}(mu - 1), W^{-1/2} v) of L. Holds a pointer to
/// the generator, which must outlive this object.
class SymmetrizedGenerator {
 public:
  explicit SymmetrizedGenerator(const GeneratorMatrix& generator);
  explicit SymmetrizedGenerator(GeneratorMatrix&&) = delete;

  const GeneratorMatrix& generator() const noexcept { return *generator_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return generator_->size(); }

  /// out = S in.
  void apply(const double* in, double* out) const;
  /// Explicit S; exactly symmetric (the two triangles are averaged).
  SparseRowMatrix matrix() const;

  double to_generator_eigenvalue(double mu) const noexcept { return (mu - 1.0) / generator_->epsilon; }
  Eigen::VectorXd to_generator_vector(const Eigen::Ref<const Eigen::VectorXd>& v) const;

 private:
  const GeneratorMatrix* generator_;
  Eigen::VectorXd weights_;
  Eigen::VectorXd sqrt_weights_;
};

SymmetrizedGenerator symmetrized_eigenproblem(const GeneratorMatrix& generator);
SymmetrizedGenerator symmetrized_eigenproblem(GeneratorMatrix&&) = delete;  // keeps a pointer to the generator

}  // namespace gdmap
