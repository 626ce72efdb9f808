#include "gdmap/reference.hpp"

#include "gdmap/detail/parallel.hpp"
#include "gdmap/errors.hpp"
#include "gdmap/random.hpp"
#include "gdmap/spectral.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gdmap {

namespace {

constexpr const char* kModule = "reference";

void check_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    fail(ErrorKind::invalid_argument, kModule, fmt::format("{} must be positive, got {}", name, v));
}

// Catmull-Rom weights for nodes i-1..i+2 at fraction s, or their s-derivative.
void cubic_weights(double s, bool derivative, double w[4]) {
  if (!derivative) {
    w[0] = 0.5 * (-s * s * s + 2.0 * s * s - s);
    w[1] = 0.5 * (3.0 * s * s * s - 5.0 * s * s + 2.0);
    w[2] = 0.5 * (-3.0 * s * s * s + 4.0 * s * s + s);
    w[3] = 0.5 * (s * s * s - s * s);
  } else {
    w[0] = 0.5 * (-3.0 * s * s + 4.0 * s - 1.0);
    w[1] = 0.5 * (9.0 * s * s - 10.0 * s);
    w[2] = 0.5 * (-9.0 * s * s + 8.0 * s + 1.0);
    w[3] = 0.5 * (3.0 * s * s - 2.0 * s);
  }
}

}  // namespace

GridFunction::GridFunction(std::vector<Eigen::VectorXd> axes, Eigen::VectorXd values)
    : axes_(std::move(axes)), values_(std::move(values)) {
  if (axes_.empty() || axes_.size() > 2)
    fail(ErrorKind::invalid_argument, kModule, "grid functions are 1D or 2D");
  Eigen::Index total = 1;
  for (const auto& a : axes_) {
    if (a.size() < 2) fail(ErrorKind::invalid_argument, kModule, "each grid axis needs at least two nodes");
    const double h = (a[a.size() - 1] - a[0]) / static_cast<double>(a.size() - 1);
    if (!(h > 0.0)) fail(ErrorKind::invalid_argument, kModule, "grid axes must be increasing");
    for (Eigen::Index i = 0; i < a.size(); ++i)
      if (std::abs(a[i] - (a[0] + static_cast<double>(i) * h)) > 1e-9 * std::max(1.0, std::abs(a[i])))
        fail(ErrorKind::invalid_argument, kModule, "grid axes must be uniformly spaced");
    total *= a.size();
  }
  if (values_.size() != total)
    fail(ErrorKind::invalid_argument, kModule,
         fmt::format("grid has {} nodes but {} values were given", total, values_.size()));
  if (!values_.allFinite()) fail(ErrorKind::invalid_argument, kModule, "non-finite grid values");
}

double GridFunction::eval(const double* x, int derivative_axis) const {
  const std::size_t d = axes_.size();
  Eigen::Index base[2] = {0, 0};
  double w[2][4];
  double inv_h[2] = {1.0, 1.0};
  for (std::size_t k = 0; k < d; ++k) {
    const auto& a = axes_[k];
    const Eigen::Index n = a.size();
    const double h = (a[n - 1] - a[0]) / static_cast<double>(n - 1);
    const double t = std::clamp((x[k] - a[0]) / h, 0.0, static_cast<double>(n - 1));
    const Eigen::Index i = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::floor(t)), n - 2);
    base[k] = i;
    inv_h[k] = 1.0 / h;
    cubic_weights(t - static_cast<double>(i), derivative_axis == static_cast<int>(k), w[k]);
  }
  // Ghost nodes beyond the ends by linear extrapolation.
  auto node1 = [&](Eigen::Index i, auto&& at) -> double {
    const Eigen::Index n = axes_[0].size();
    if (i < 0) return 2.0 * at(0) - at(1);
    if (i > n - 1) return 2.0 * at(n - 1) - at(n - 2);
    return at(i);
  };
  double out = 0.0;
  if (d == 1) {
    auto at = [&](Eigen::Index i) { return values_[i]; };
    for (int a = 0; a < 4; ++a) out += w[0][a] * node1(base[0] - 1 + a, at);
  } else {
    const Eigen::Index ny = axes_[1].size();
    auto row = [&](Eigen::Index i) {
      auto at = [&](Eigen::Index j) { return values_[i * ny + j]; };
      double s = 0.0;
      for (int b = 0; b < 4; ++b) {
        const Eigen::Index j = base[1] - 1 + b;
        const double v = j < 0 ? 2.0 * at(0) - at(1) : (j > ny - 1 ? 2.0 * at(ny - 1) - at(ny - 2) : at(j));
        s += w[1][b] * v;
      }
      return s;
    };
    for (int a = 0; a < 4; ++a) out += w[0][a] * node1(base[0] - 1 + a, row);
  }
  return derivative_axis >= 0 ? out * inv_h[derivative_axis] : out;
}

double GridFunction::operator()(const double* x) const { return eval(x, -1); }

void GridFunction::gradient(const double* x, double* g) const {
  for (std::size_t k = 0; k < axes_.size(); ++k) g[k] = eval(x, static_cast<int>(k));
}

Eigen::VectorXd GridFunction::evaluate(const PointCloud& cloud) const {
  if (cloud.dim() != dim()) fail(ErrorKind::invalid_argument, kModule, "cloud and grid differ in dimension");
  Eigen::VectorXd out(static_cast<Eigen::Index>(cloud.size()));
  for (std::size_t i = 0; i < cloud.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = (*this)(cloud.matrix().row(static_cast<Eigen::Index>(i)).data());
  return out;
}

const char* to_string(PotentialKind kind) noexcept {
  switch (kind) {
    case PotentialKind::double_well_2d: return "double-well-2d";
    case PotentialKind::temperature_switch: return "temperature-switch";
    case PotentialKind::ou_1d: return "ou-1d";
    case PotentialKind::custom_grid: return "custom-grid";
  }
  return "unknown";
}

Potential Potential::double_well_2d() { return Potential(PotentialKind::double_well_2d, 2); }

Potential Potential::temperature_switch(double hx, double hy, double x0, double delta) {
  check_positive(delta, "delta");
  if (!std::isfinite(hx) || !std::isfinite(hy) || !std::isfinite(x0))
    fail(ErrorKind::invalid_argument, kModule, "temperature-switch parameters must be finite");
  Potential u(PotentialKind::temperature_switch, 2);
  u.parameters_ = {{"h_x", hx}, {"h_y", hy}, {"x_0", x0}, {"delta", delta}};
  return u;
}

Potential Potential::ou_1d(double theta) {
  check_positive(theta, "theta");
  Potential u(PotentialKind::ou_1d, 1);
  u.parameters_ = {{"theta", theta}};
  return u;
}

Potential Potential::custom_grid(GridFunction table) {
  Potential u(PotentialKind::custom_grid, table.dim());
  u.table_ = std::make_shared<const GridFunction>(std::move(table));
  return u;
}

double Potential::value(const double* x) const {
  switch (kind_) {
    case PotentialKind::double_well_2d: {
      const double a = x[0] * x[0] - 1.0;
      return a * a + x[1] * x[1];
    }
    case PotentialKind::temperature_switch: {
      const double e = std::exp(-(x[0] - p("x_0")) * (x[0] - p("x_0")) / p("delta"));
      const double a = 0.2 * (1.0 + 5.0 * e) * (1.0 + 5.0 * e);
      const double qx = x[0] * x[0] - 1.0, qy = x[1] * x[1] - 1.0;
      return p("h_x") * qx * qx + (p("h_y") + a) * qy * qy;
    }
    case PotentialKind::ou_1d: return 0.5 * p("theta") * x[0] * x[0];
    case PotentialKind::custom_grid: return (*table_)(x);
  }
  return 0.0;
}

void Potential::gradient(const double* x, double* g) const {
  switch (kind_) {
    case PotentialKind::double_well_2d:
      g[0] = 4.0 * x[0] * (x[0] * x[0] - 1.0);
      g[1] = 2.0 * x[1];
      return;
    case PotentialKind::temperature_switch: {
      const double dx = x[0] - p("x_0");
      const double e = std::exp(-dx * dx / p("delta"));
      const double a = 0.2 * (1.0 + 5.0 * e) * (1.0 + 5.0 * e);
      const double da = -4.0 * (1.0 + 5.0 * e) * e * dx / p("delta");
      const double qx = x[0] * x[0] - 1.0, qy = x[1] * x[1] - 1.0;
      g[0] = 4.0 * p("h_x") * x[0] * qx + da * qy * qy;
      g[1] = 4.0 * (p("h_y") + a) * x[1] * qy;
      return;
    }
    case PotentialKind::ou_1d: g[0] = p("theta") * x[0]; return;
    case PotentialKind::custom_grid: table_->gradient(x, g); return;
  }
}

Eigen::VectorXd Potential::values(const PointCloud& cloud) const {
  if (cloud.dim() != dim_) fail(ErrorKind::invalid_argument, kModule, "cloud and potential differ in dimension");
  Eigen::VectorXd out(static_cast<Eigen::Index>(cloud.size()));
  for (std::size_t i = 0; i < cloud.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = value(cloud.matrix().row(static_cast<Eigen::Index>(i)).data());
  return out;
}

RowMatrix Potential::gradients(const PointCloud& cloud) const {
  if (cloud.dim() != dim_) fail(ErrorKind::invalid_argument, kModule, "cloud and potential differ in dimension");
  RowMatrix out(static_cast<Eigen::Index>(cloud.size()), static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < cloud.size(); ++i)
    gradient(cloud.matrix().row(static_cast<Eigen::Index>(i)).data(), out.row(static_cast<Eigen::Index>(i)).data());
  return out;
}

Sde Sde::overdamped_langevin(const Potential& potential, double beta) {
  check_positive(beta, "beta");
  Sde sde;
  sde.dim = potential.dim();
  sde.drift = [potential, n = potential.dim()](const double* x, double* b) {
    potential.gradient(x, b);
    for (std::size_t k = 0; k < n; ++k) b[k] = -b[k];
  };
  sde.noise_scale = std::sqrt(2.0 / beta);
  return sde;
}

TrajectoryData euler_maruyama(const Sde& sde, const Eigen::VectorXd& x0, double dt, std::size_t steps,
                              std::uint64_t seed) {
  check_positive(dt, "dt");
  const std::size_t n = sde.dim;
  if (n == 0 || static_cast<std::size_t>(x0.size()) != n || !sde.drift)
    fail(ErrorKind::invalid_argument, kModule, "SDE dimension, drift and initial state must agree");
  if (!x0.allFinite()) fail(ErrorKind::invalid_argument, kModule, "non-finite initial state");
  TrajectoryData traj;
  traj.dt = dt;
  traj.frames.resize(static_cast<Eigen::Index>(steps + 1), static_cast<Eigen::Index>(n));
  traj.frames.row(0) = x0.transpose();
  Philox4x32 rng(seed, 0);
  const double sqdt = std::sqrt(dt);
  std::vector<double> b(n), xi(n), sigma(n * n);
  for (std::size_t k = 0; k < steps; ++k) {
    const double* x = traj.frames.row(static_cast<Eigen::Index>(k)).data();
    double* y = traj.frames.row(static_cast<Eigen::Index>(k + 1)).data();
    sde.drift(x, b.data());
    for (auto& v : xi) v = rng.normal();
    if (sde.noise) {
      sde.noise(x, sigma.data());
      for (std::size_t r = 0; r < n; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < n; ++c) s += sigma[r * n + c] * xi[c];
        y[r] = x[r] + b[r] * dt + s * sqdt;
      }
    } else {
      for (std::size_t r = 0; r < n; ++r) y[r] = x[r] + b[r] * dt + sde.noise_scale * sqdt * xi[r];
    }
    for (std::size_t r = 0; r < n; ++r)
      if (!std::isfinite(y[r]))
        fail(ErrorKind::blow_up, kModule, fmt::format("state became non-finite at step {}", k + 1), k + 1,
             "reduce the time step");
  }
  return traj;
}

RowMatrix FDOperator::nodes() const {
  const std::size_t d = axes.size();
  Eigen::Index total = 1;
  for (const auto& a : axes) total *= a.size();
  RowMatrix out(total, static_cast<Eigen::Index>(d));
  for (Eigen::Index idx = 0; idx < total; ++idx) {
    Eigen::Index rest = idx;
    for (std::size_t k = d; k-- > 0;) {
      const Eigen::Index n = axes[k].size();
      out(idx, static_cast<Eigen::Index>(k)) = axes[k][rest % n];
      rest /= n;
    }
  }
  return out;
}

SparseRowMatrix FDOperator::symmetric_matrix() const {
  SparseRowMatrix s = matrix;
  for (Eigen::Index i = 0; i < s.outerSize(); ++i)
    for (SparseRowMatrix::InnerIterator it(s, i); it; ++it)
      it.valueRef() *= std::exp(0.5 * (log_weight[i] - log_weight[it.col()]));
  SparseRowMatrix t = s.transpose();
  return 0.5 * (s + t);
}

FDOperator fd_generator(const Potential& potential, double beta, const Box& box, std::size_t n) {
  check_positive(beta, "beta");
  const std::size_t d = potential.dim();
  if (box.bounds.size() != d)
    fail(ErrorKind::invalid_argument, kModule, fmt::format("box has {} axes, potential {}", box.bounds.size(), d));
  if (n < 3) fail(ErrorKind::invalid_argument, kModule, "need at least 3 grid points per axis");
  FDOperator op;
  op.beta = beta;
  std::vector<double> h(d);
  for (std::size_t k = 0; k < d; ++k) {
    const auto [lo, hi] = box.bounds[k];
    if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
      fail(ErrorKind::invalid_argument, kModule, "box bounds must be finite and increasing");
    op.axes.push_back(Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(n), lo, hi));
    h[k] = (hi - lo) / static_cast<double>(n - 1);
  }
  const RowMatrix nodes = op.nodes();
  const Eigen::Index total = nodes.rows();
  Eigen::VectorXd u(total);
  for (Eigen::Index i = 0; i < total; ++i) u[i] = beta * potential.value(nodes.row(i).data());
  if (!u.allFinite()) fail(ErrorKind::invalid_argument, kModule, "potential is not finite on the grid");
  u.array() -= u.minCoeff();
  op.log_weight = -u;

  std::vector<Eigen::Index> stride(d, 1);
  for (std::size_t k = d - 1; k-- > 0;) stride[k] = stride[k + 1] * static_cast<Eigen::Index>(n);
  const auto nn = static_cast<Eigen::Index>(n);
  auto coord = [&](Eigen::Index idx, std::size_t k) { return (idx / stride[k]) % nn; };

  SparseRowMatrix& l = op.matrix;
  l.resize(total, total);
  std::vector<int> counts(static_cast<std::size_t>(total));
  for (Eigen::Index i = 0; i < total; ++i) {
    int c = 1;
    for (std::size_t k = 0; k < d; ++k) c += (coord(i, k) > 0) + (coord(i, k) < nn - 1);
    counts[static_cast<std::size_t>(i)] = c;
  }
  Eigen::Index nnz = 0;
  for (int c : counts) nnz += c;
  l.resizeNonZeros(nnz);
  auto* outer = l.outerIndexPtr();
  outer[0] = 0;
  for (Eigen::Index i = 0; i < total; ++i) outer[i + 1] = outer[i] + counts[static_cast<std::size_t>(i)];
  auto* inner = l.innerIndexPtr();
  auto* values = l.valuePtr();

  detail::parallel_for(static_cast<std::size_t>(total), [&](std::size_t begin, std::size_t end) {
    std::vector<std::pair<Eigen::Index, double>> row;
    for (std::size_t ii = begin; ii < end; ++ii) {
      const auto i = static_cast<Eigen::Index>(ii);
      row.clear();
      double diag = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double inv_h2 = 1.0 / (h[k] * h[k]);
        for (int sgn : {-1, 1}) {
          const Eigen::Index c = coord(i, k) + sgn;
          if (c < 0 || c > nn - 1) continue;  // zero flux through the boundary
          const Eigen::Index j = i + sgn * stride[k];
          const double rate = std::exp(-0.5 * (u[j] - u[i])) * inv_h2;
          row.emplace_back(j, rate);
          diag -= rate;
        }
      }
      row.emplace_back(i, diag);
      std::sort(row.begin(), row.end());
      auto pos = outer[i];
      for (const auto& [j, v] : row) {
        inner[pos] = static_cast<int>(j);
        values[pos] = v;
        ++pos;
      }
    }
  });
  return op;
}

GridFunction FDSpectrum::mode(const FDOperator& op, std::size_t n) const {
  return GridFunction(op.axes, eigenvectors.col(static_cast<Eigen::Index>(n)));
}

FDSpectrum fd_spectrum(const FDOperator& op, std::size_t k, double shift) {
  check_positive(shift, "shift");
  const SymmetricEigenpairs pairs = symmetric_eigs_below(op.symmetric_matrix(), k, shift, 1e-12);
  FDSpectrum out;
  out.eigenvalues = pairs.values;
  out.residuals = pairs.residuals;
  const Eigen::VectorXd inv_sqrt_w = (-0.5 * op.log_weight.array()).exp().matrix();
  out.eigenvectors.resize(pairs.vectors.rows(), pairs.vectors.cols());
  for (Eigen::Index j = 0; j < pairs.vectors.cols(); ++j) {
    Eigen::VectorXd psi = pairs.vectors.col(j).cwiseProduct(inv_sqrt_w);
    psi.normalize();
    const double big = psi.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < psi.size(); ++i)
      if (std::abs(psi[i]) > 1e-12 * big) {
        if (psi[i] < 0.0) psi = -psi;
        break;
      }
    out.eigenvectors.col(j) = psi;
  }

  const Eigen::VectorXd pi = op.log_weight.array().exp().matrix();
  const RowMatrix nodes = op.nodes();
  double edge = 0.0;
  for (Eigen::Index i = 0; i < nodes.rows(); ++i) {
    bool on_boundary = false;
    for (std::size_t a = 0; a < op.axes.size(); ++a) {
      const auto& ax = op.axes[a];
      const double x = nodes(i, static_cast<Eigen::Index>(a));
      on_boundary = on_boundary || x == ax[0] || x == ax[ax.size() - 1];
    }
    if (on_boundary) edge += pi[i];
  }
  out.boundary_mass = edge / pi.sum();
  out.boundary_warning = out.boundary_mass > 0.01;
  if (out.boundary_warning)
    spdlog::warn("reference: {:.2f}% of the stationary mass lies on the box boundary; enlarge the box",
                 100.0 * out.boundary_mass);
  return out;
}

double double_gyre_streamfunction(double x, double y, double amplitude) {
  return amplitude * std::sin(std::numbers::pi * x) * std::sin(std::numbers::pi * y);
}

RowMatrix double_gyre_velocity(const PointCloud& cloud, double amplitude) {
  check_positive(amplitude, "amplitude");
  if (cloud.dim() != 2) fail(ErrorKind::invalid_argument, kModule, "the double gyre is two-dimensional");
  constexpr double pi = std::numbers::pi;
  RowMatrix v(static_cast<Eigen::Index>(cloud.size()), 2);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    const double x = p[0], y = p[1];
    if (x < 0.0 || x > 2.0 || y < 0.0 || y > 1.0)
      fail(ErrorKind::invalid_argument, kModule, fmt::format("point ({}, {}) lies outside [0,2] x [0,1]", x, y), i);
    const auto r = static_cast<Eigen::Index>(i);
    v(r, 0) = -amplitude * pi * std::sin(pi * x) * std::cos(pi * y);
    v(r, 1) = amplitude * pi * std::cos(pi * x) * std::sin(pi * y);
  }
  return v;
}

}  // namespace gdmap
