#include "gdmap/reference.hpp"

#include "helpers.hpp"

#include <cmath>
#include <cstring>

using namespace gdmap;

TEST_SUITE_BEGIN("reference");

namespace {

Potential table_1d(double lo, double hi, int n, const std::function<double(double)>& u) {
  Eigen::VectorXd axis = Eigen::VectorXd::LinSpaced(n, lo, hi);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = u(axis[i]);
  return Potential::custom_grid(GridFunction({axis}, v));
}

double row_sum_defect(const SparseRowMatrix& a) {
  const Eigen::VectorXd rows = a * Eigen::VectorXd::Ones(a.cols());
  return rows.cwiseAbs().maxCoeff() / a.diagonal().cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("Euler-Maruyama with sigma = 0 and constant drift") {
  Sde sde;
  sde.dim = 2;
  sde.drift = [](const double*, double* b) { b[0] = 0.5; b[1] = -2.0; };
  const auto t = euler_maruyama(sde, Eigen::Vector2d(1.0, 3.0), 0.25, 64, 9);
  REQUIRE(t.size() == 65);
  CHECK(t.dt == 0.25);
  for (int k = 0; k <= 64; ++k) {
    CHECK(t.frames(k, 0) == 1.0 + k * 0.5 * 0.25);
    CHECK(t.frames(k, 1) == 3.0 - k * 2.0 * 0.25);
  }
}

TEST_CASE("Euler-Maruyama OU variance") {
  const auto sde = Sde::overdamped_langevin(Potential::ou_1d(1.0), 1.0);
  CHECK(sde.noise_scale == doctest::Approx(std::sqrt(2.0)));
  const auto t = euler_maruyama(sde, Eigen::VectorXd::Zero(1), 0.01, 4000000, 17);
  const auto x = t.frames.col(0).tail(t.frames.rows() - 1000);
  const double var = (x.array() - x.mean()).square().mean();
  CAPTURE(var);
  CHECK(std::abs(var - 1.0) <= 0.05);
}

TEST_CASE("Euler-Maruyama reproducibility and blow-up") {
  const auto sde = Sde::overdamped_langevin(Potential::double_well_2d(), 6.0);
  const auto a = euler_maruyama(sde, Eigen::Vector2d(-1, 0), 0.03, 5000, 1);
  const auto b = euler_maruyama(sde, Eigen::Vector2d(-1, 0), 0.03, 5000, 1);
  const auto c = euler_maruyama(sde, Eigen::Vector2d(-1, 0), 0.03, 5000, 2);
  CHECK(std::memcmp(a.frames.data(), b.frames.data(), sizeof(double) * a.frames.size()) == 0);
  CHECK(a.frames != c.frames);

  Sde cubic;
  cubic.dim = 1;
  cubic.drift = [](const double* x, double* g) { g[0] = x[0] * x[0] * x[0]; };
  try {
    euler_maruyama(cubic, Eigen::VectorXd::Constant(1, 2.0), 1.0, 100, 1);
    FAIL("expected blow-up");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::blow_up);
    REQUIRE(e.index());
    CHECK(*e.index() < 100);
  }
}

TEST_CASE("large time step biases the double-well marginal") {
  const double beta = 6.0;
  const auto t = euler_maruyama(Sde::overdamped_langevin(Potential::double_well_2d(), beta), Eigen::Vector2d(-1, 0), 0.03,
                                1000000, 1);
  // exp(-beta U) factorizes, so the x-marginal is exp(-beta (x^2 - 1)^2).
  const int bins = 100;
  const double lo = -2.5, hi = 2.5, h = (hi - lo) / bins;
  Eigen::VectorXd hist = Eigen::VectorXd::Zero(bins), exact(bins);
  for (Eigen::Index k = 0; k < t.frames.rows(); ++k) {
    const int b = static_cast<int>(std::floor((t.frames(k, 0) - lo) / h));
    if (b >= 0 && b < bins) hist[b] += 1.0;
  }
  for (int b = 0; b < bins; ++b) {
    // midpoint-refined quadrature of the bin
    double s = 0.0;
    for (int j = 0; j < 20; ++j) {
      const double x = lo + (b + (j + 0.5) / 20) * h;
      s += std::exp(-beta * std::pow(x * x - 1, 2));
    }
    exact[b] = s;
  }
  hist /= hist.sum();
  exact /= exact.sum();
  const double l1 = (hist - exact).cwiseAbs().sum();
  CAPTURE(l1);
  CHECK(l1 >= 0.1);
}

TEST_CASE("potential gradients match central differences") {
  std::vector<Potential> ps{Potential::double_well_2d(), Potential::temperature_switch(), Potential::ou_1d(2.5),
                            table_1d(-3, 3, 61, [](double x) { return std::sin(x) + 0.1 * x * x * x; })};
  for (const auto& p : ps) {
    CAPTURE(to_string(p.kind()));
    const auto n = p.dim();
    const auto pts = test::uniform_cloud(100, n, 77, -2.0, 2.0);
    for (std::size_t i = 0; i < 100; ++i) {
      std::vector<double> x(pts.point(i).data(), pts.point(i).data() + n), g(n);
      p.gradient(x.data(), g.data());
      for (std::size_t j = 0; j < n; ++j) {
        const double h = 1e-6;
        auto xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        const double fd = (p.value(xp.data()) - p.value(xm.data())) / (2 * h);
        CHECK(std::abs(fd - g[j]) <= 1e-6 * std::max(1.0, std::abs(g[j])));
      }
    }
  }
  const auto sw = Potential::temperature_switch();
  CHECK(sw.parameters().at("h_x") == 0.5);
  CHECK(sw.parameters().at("h_y") == 1.0);
  CHECK(sw.parameters().at("x_0") == 0.0);
  CHECK(sw.parameters().at("delta") == doctest::Approx(0.05));
}

TEST_CASE("grid functions interpolate quadratics exactly") {
  Eigen::VectorXd ax = Eigen::VectorXd::LinSpaced(11, -1.0, 1.0), ay = Eigen::VectorXd::LinSpaced(9, 0.0, 2.0);
  Eigen::VectorXd v(11 * 9);
  auto f = [](double x, double y) { return 1 + 2 * x - y + 0.5 * x * x + x * y - 0.25 * y * y; };
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 9; ++j) v[i * 9 + j] = f(ax[i], ay[j]);
  const GridFunction g({ax, ay}, v);
  const auto pts = test::uniform_cloud(50, 2, 3);
  for (std::size_t k = 0; k < 50; ++k) {
    // interior cells only: the end cells fall back to lower order
    const double p[2] = {-0.8 + 1.6 * pts.point(k)[0], 0.25 + 1.5 * pts.point(k)[1]};
    CHECK(g(p) == doctest::Approx(f(p[0], p[1])).epsilon(1e-12));
  }
}

TEST_CASE("finite-difference generator: flat potential gives the Neumann Laplacian") {
  const double len = 2.0;
  const auto op = fd_generator(table_1d(0.0, len, 5, [](double) { return 0.0; }), 1.0, Box{{{0.0, len}}}, 400);
  CHECK(row_sum_defect(op.matrix) <= 1e-10);
  const auto s = fd_spectrum(op, 4);
  CHECK(std::abs(s.eigenvalues[0]) <= 1e-10);
  for (int n = 1; n < 4; ++n) CHECK(s.eigenvalues[n] == doctest::Approx(-std::pow(n * M_PI / len, 2)).epsilon(0.01));
}

TEST_CASE("finite-difference generator: OU spectrum") {
  const auto op = fd_generator(Potential::ou_1d(1.0), 1.0, Box{{{-6.0, 6.0}}}, 400);
  const auto s = fd_spectrum(op, 4);
  CHECK(std::abs(s.eigenvalues[0]) <= 1e-10);
  for (int n = 1; n < 4; ++n) CHECK(s.eigenvalues[n] == doctest::Approx(-n).epsilon(0.01));
  CHECK_FALSE(s.boundary_warning);
  // W^{1/2} L W^{-1/2} is symmetric
  const Eigen::MatrixXd sym(op.symmetric_matrix());
  CHECK((sym - sym.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * sym.cwiseAbs().maxCoeff());
}

TEST_CASE("finite-difference oracle for the double well") {
  const auto dw = Potential::double_well_2d();
  const auto op = fd_generator(dw, 6.0, kDoubleWellOracleBox, kDoubleWellOracleGrid);
  CHECK(op.size() == kDoubleWellOracleGrid * kDoubleWellOracleGrid);
  CHECK(row_sum_defect(op.matrix) <= 1e-10);
  const auto s = fd_spectrum(op, 3);
  const double t1 = -1.0 / s.eigenvalues[1];
  CHECK(t1 == doctest::Approx(kDoubleWellOracleT1).epsilon(1e-8));
  CHECK_FALSE(s.boundary_warning);
  CHECK(s.residuals.maxCoeff() <= 1e-8);

  const auto fine = fd_spectrum(fd_generator(dw, 6.0, kDoubleWellOracleBox, 300), 2);
  const double t1_fine = -1.0 / fine.eigenvalues[1];
  CAPTURE(t1_fine);
  CHECK(std::abs(t1_fine - t1) <= 0.02 * t1);

  // the slowest mode separates the wells
  const auto mode = s.mode(op, 1);
  const double left[2] = {-1.0, 0.0}, right[2] = {1.0, 0.0};
  CHECK(mode(left) * mode(right) < 0.0);

  const auto cramped = fd_spectrum(fd_generator(dw, 6.0, Box{{{-1.0, 1.0}, {-1.0, 1.0}}}, 60), 2);
  CHECK(cramped.boundary_warning);
  CHECK(cramped.boundary_mass > 0.01);
}

TEST_CASE("double gyre") {
  const double amp = 0.1;
  RowMatrix c(2, 2);
  c << 0.5, 0.5, 1.5, 0.5;
  const RowMatrix v = double_gyre_velocity(PointCloud(c), amp);
  CHECK(v.cwiseAbs().maxCoeff() <= 1e-15);

  // central-difference divergence on a fine grid
  const int n = 101;
  const double h = 1e-4;
  double div = 0.0;
  for (int i = 1; i < 2 * n; ++i)
    for (int j = 1; j < n; ++j) {
      const double x = 2.0 * i / (2 * n), y = 1.0 * j / n;
      RowMatrix q(4, 2);
      q << x + h, y, x - h, y, x, y + h, x, y - h;
      const RowMatrix w = double_gyre_velocity(PointCloud(q), amp);
      div = std::max(div, std::abs((w(0, 0) - w(1, 0) + w(2, 1) - w(3, 1)) / (2 * h)));
    }
  CHECK(div <= 1e-6);

  // psi is positive in one cell and negative in the other
  CHECK(double_gyre_streamfunction(0.5, 0.5, amp) * double_gyre_streamfunction(1.5, 0.5, amp) < 0.0);

  RowMatrix out(1, 2);
  out << 2.5, 0.5;
  CHECK_ERROR(double_gyre_velocity(PointCloud(out), amp), ErrorKind::invalid_argument);
}

TEST_SUITE_END();
