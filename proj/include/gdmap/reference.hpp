#pragma once

#include "gdmap/generator.hpp"
#include "gdmap/point_cloud.hpp"
#include "gdmap/trajectory.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace gdmap {

/// Tabulated function on a 1D or 2D tensor grid, evaluated by cubic
/// convolution (Catmull-Rom), which is C^1 and exact for quadratics.
class GridFunction {
 public:
  GridFunction(std::vector<Eigen::VectorXd> axes, Eigen::VectorXd values);

  std::size_t dim() const noexcept { return axes_.size(); }
  const std::vector<Eigen::VectorXd>& axes() const noexcept { return axes_; }
  /// Node values, first axis slowest.
  const Eigen::VectorXd& values() const noexcept { return values_; }

  /// Points outside the grid are clamped onto it.
  double operator()(const double* x) const;
  void gradient(const double* x, double* g) const;
  Eigen::VectorXd evaluate(const PointCloud& cloud) const;

 private:
  double eval(const double* x, int derivative_axis) const;

  std::vector<Eigen::VectorXd> axes_;
  Eigen::VectorXd values_;
};

enum class PotentialKind { double_well_2d, temperature_switch, ou_1d, custom_grid };

const char* to_string(PotentialKind kind) noexcept;

/// Built-in energy U with its analytic gradient.
class Potential {
 public:
  /// U = (x^2 - 1)^2 + y^2.
  static Potential double_well_2d();
  /// U = h_x (x^2-1)^2 + (h_y + a(x)) (y^2-1)^2, a = (1 + 5 exp(-(x-x0)^2/delta))^2 / 5.
  static Potential temperature_switch(double hx = 0.5, double hy = 1.0, double x0 = 0.0, double delta = 1.0 / 20.0);
  /// U = theta x^2 / 2.
  static Potential ou_1d(double theta = 1.0);
  /// Interpolated table.
  static Potential custom_grid(GridFunction table);

  PotentialKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  const std::map<std::string, double>& parameters() const noexcept { return parameters_; }

  double value(const double* x) const;
  void gradient(const double* x, double* g) const;
  Eigen::VectorXd values(const PointCloud& cloud) const;
  RowMatrix gradients(const PointCloud& cloud) const;

 private:
  Potential(PotentialKind kind, std::size_t dim) : kind_(kind), dim_(dim) {}
  double p(const char* name) const { return parameters_.at(name); }

  PotentialKind kind_;
  std::size_t dim_;
  std::map<std::string, double> parameters_;
  std::shared_ptr<const GridFunction> table_;
};

/// dX = b(X) dt + sigma(X) dW.
struct Sde {
  std::size_t dim = 0;
  std::function<void(const double* x, double* b)> drift;
  /// Noise matrix sigma(x), N x N row-major; when unset sigma = noise_scale I.
  std::function<void(const double* x, double* sigma)> noise;
  double noise_scale = 0.0;

  /// b = -grad U, sigma = sqrt(2 / beta) I.
  static Sde overdamped_langevin(const Potential& potential, double beta);
};

/// X_{k+1} = X_k + b(X_k) dt + sigma(X_k) sqrt(dt) xi_k with xi_k from
/// Philox4x32-10 (key = seed, stream 0) through Box-Muller. Returns steps + 1
/// frames including x0. Throws blow-up with the step index on a non-finite state.
TrajectoryData euler_maruyama(const Sde& sde, const Eigen::VectorXd& x0, double dt, std::size_t steps,
                              std::uint64_t seed);

struct Box {
  std::vector<std::pair<double, double>> bounds;
};

/// Finite-volume (square-root approximation) discretization of
/// L = Delta - beta grad U . grad on a node grid with zero-flux boundaries.
/// Rates to a neighbor j are exp(-beta (U_j - U_i) / 2) / h^2, so rows sum to
/// zero and W^{1/2} L W^{-1/2} is symmetric with W = exp(-beta U).
struct FDOperator {
  std::vector<Eigen::VectorXd> axes;
  SparseRowMatrix matrix;
  /// -beta (U - min U) at the nodes.
  Eigen::VectorXd log_weight;
  double beta = 1.0;

  std::size_t size() const noexcept { return static_cast<std::size_t>(matrix.rows()); }
  RowMatrix nodes() const;
  /// Symmetric W^{1/2} L W^{-1/2}.
  SparseRowMatrix symmetric_matrix() const;
};

FDOperator fd_generator(const Potential& potential, double beta, const Box& box, std::size_t n);

struct FDSpectrum {
  Eigen::VectorXd eigenvalues;  // descending, lambda_0 = 0
  Eigen::MatrixXd eigenvectors; // right eigenvectors of L on the nodes, unit norm
  Eigen::VectorXd residuals;    // of the symmetric problem
  /// Fraction of the stationary mass on boundary nodes.
  double boundary_mass = 0.0;
  bool boundary_warning = false;

  /// Eigenvector n as an interpolable grid function.
  GridFunction mode(const FDOperator& op, std::size_t n) const;
};

/// Leading k eigenpairs by shift-invert Lanczos on the symmetric form. Warns
/// when more than 1% of the stationary mass sits on the boundary.
FDSpectrum fd_spectrum(const FDOperator& op, std::size_t k, double shift = 1e-2);

/// t_1 of the double well (x^2-1)^2 + y^2 at beta = 6 on [-2.5,2.5] x [-2,2]
/// with n = 200 nodes per axis, frozen from fd_spectrum. The time unit is that
/// of Delta - beta grad U . grad; n = 300 gives 40.2185.
inline constexpr double kDoubleWellOracleT1 = 40.182540447866479;
inline const Box kDoubleWellOracleBox{{{-2.5, 2.5}, {-2.0, 2.0}}};
inline constexpr std::size_t kDoubleWellOracleGrid = 200;

/// Steady double gyre on [0,2] x [0,1]: v = (-d psi/dy, d psi/dx) with
/// psi = A sin(pi x) sin(pi y).
RowMatrix double_gyre_velocity(const PointCloud& cloud, double amplitude);
double double_gyre_streamfunction(double x, double y, double amplitude);

}  // namespace gdmap
