#include "gdmap/kernels.hpp"

#include "helpers.hpp"

#include <cmath>
#include <limits>

using namespace gdmap;
using gdmap::test::error_kind;

TEST_SUITE_BEGIN("kernels");

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Eigen::MatrixXd mat1(double a) { return Eigen::MatrixXd::Constant(1, 1, a); }

}  // namespace

TEST_CASE("isotropic kernel values") {
  const auto x = vec({0.3, -1.2});
  CHECK(isotropic_kernel(x, x, 0.7) == 1.0);

  // |x - y|^2 = 4 eps
  const double eps = 0.125;
  CHECK(isotropic_kernel(vec({0.0, 0.0}), vec({std::sqrt(4 * eps), 0.0}), eps) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-15));

  // 0.05 / (4 * 0.05) = 0.25
  CHECK(isotropic_kernel(vec({0.0, 0.0}), vec({0.2, 0.1}), 0.05) == doctest::Approx(std::exp(-0.25)).epsilon(1e-15));
}

TEST_CASE("isotropic kernel rejects bad input") {
  CHECK_ERROR(isotropic_kernel(vec({0.0}), vec({1.0}), 0.0), ErrorKind::invalid_argument);
  CHECK_ERROR(isotropic_kernel(vec({0.0}), vec({1.0}), -1.0), ErrorKind::invalid_argument);
  CHECK_ERROR(isotropic_kernel(vec({std::nan("")}), vec({1.0}), 1.0), ErrorKind::invalid_argument);
  CHECK_ERROR(isotropic_kernel(vec({0.0}), vec({HUGE_VAL}), 1.0), ErrorKind::invalid_argument);
}

TEST_CASE("local kernel values") {
  const auto x = vec({0.1, 0.4});
  const auto y = vec({-0.2, 0.5});
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2, 2);
  CHECK(local_kernel(x, y, 0.3, id, Eigen::VectorXd::Zero(2)) ==
        doctest::Approx(isotropic_kernel(x, y, 0.3)).epsilon(1e-15));
  CHECK(local_kernel(x, x, 0.3, 2.0 * id, Eigen::VectorXd::Zero(2)) == 1.0);

  // (0 - 0.1 + 0.01)^2 / (4 * 0.01 * 2)
  CHECK(local_kernel(vec({0.0}), vec({0.1}), 0.01, mat1(2.0), vec({1.0})) ==
        doctest::Approx(std::exp(-0.10125)).epsilon(1e-14));
}

TEST_CASE("local kernel rejects a non-SPD diffusion") {
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3 and -1
  CHECK_ERROR(local_kernel(vec({0, 0}), vec({1, 0}), 0.1, a, vec({0, 0})), ErrorKind::singular_diffusion);
  CHECK_ERROR(local_kernel(vec({0}), vec({1}), 0.1, mat1(0.0), vec({0})), ErrorKind::singular_diffusion);
}

TEST_CASE("regularized local kernel values") {
  const auto x = vec({0.0});
  const auto y = vec({0.1});
  CHECK(regularized_local_kernel(x, y, 0.01, mat1(1.7), vec({0.5}), 0.0) ==
        local_kernel(x, y, 0.01, mat1(1.7), vec({0.5})));
  CHECK(regularized_local_kernel(vec({0.2, 0.3}), vec({0.0, -0.1}), 0.05, Eigen::MatrixXd::Zero(2, 2), vec({0, 0}),
                                 1.0) == doctest::Approx(isotropic_kernel(vec({0.2, 0.3}), vec({0.0, -0.1}), 0.05)));
  CHECK(regularized_local_kernel(x, y, 0.01, mat1(1.9), vec({1.0}), 0.1) ==
        doctest::Approx(std::exp(-0.0081 / 0.08)).epsilon(1e-14));
}

TEST_CASE("regularized kernel failure suggests a larger eta") {
  try {
    regularized_local_kernel(vec({0}), vec({1}), 0.1, mat1(-0.5), vec({0}), 0.1);
    FAIL("expected singular-diffusion");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::singular_diffusion);
    CHECK(e.hint().find("eta") != std::string::npos);
  }
}

TEST_CASE("random-pair identities") {
  Philox4x32 rng(11);
  for (int t = 0; t < 200; ++t) {
    Eigen::VectorXd x(3), y(3), b(3);
    for (int d = 0; d < 3; ++d) {
      x[d] = rng.normal();
      y[d] = rng.normal();
      b[d] = rng.normal();
    }
    const double eps = 0.05 + rng.uniform();
    CHECK(local_kernel(x, y, eps, Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(3)) ==
          doctest::Approx(isotropic_kernel(x, y, eps)).epsilon(1e-14));

    Eigen::MatrixXd g(3, 3);
    for (int i = 0; i < 9; ++i) g(i / 3, i % 3) = rng.normal();
    const Eigen::MatrixXd a = g * g.transpose() + 0.1 * Eigen::MatrixXd::Identity(3, 3);
    CHECK(regularized_local_kernel(x, y, eps, a, b, 0.0) == local_kernel(x, y, eps, a, b));
  }
}

TEST_CASE("isotropic kernel is nondecreasing in epsilon") {
  const auto x = vec({0.0, 0.0});
  const auto y = vec({0.7, -0.3});
  double prev = 0.0;
  for (double eps = 1e-3; eps < 1e2; eps *= 1.5) {
    const double k = isotropic_kernel(x, y, eps);
    CHECK(k >= prev);
    CHECK(local_kernel(x, y, eps, 0.5 * Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2)) > 0.0);
    prev = k;
  }
}

TEST_CASE("kernel matrix of coincident points") {
  RowMatrix x(2, 2);
  x << 0.5, 0.5, 0.5, 0.5;
  const auto k = build_kernel_matrix(PointCloud(x), KernelSpec{KernelKind::isotropic, 0.1});
  CHECK(Eigen::MatrixXd(k.entries) == Eigen::MatrixXd::Ones(2, 2));
  CHECK(kernel_density_estimate(k).values == Eigen::VectorXd::Constant(2, 2.0));
}

TEST_CASE("isotropic kernel matrix is exactly symmetric with unit diagonal") {
  const auto cloud = test::uniform_cloud(60, 2, 5);
  const auto k = build_kernel_matrix(cloud, KernelSpec{KernelKind::isotropic, 0.02});
  CHECK(k.symmetric);
  const Eigen::MatrixXd d(k.entries);
  CHECK((d - d.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(d.diagonal() == Eigen::VectorXd::Ones(60));
  CHECK(d.maxCoeff() <= 1.0);
  CHECK(d.minCoeff() >= 0.0);
}

TEST_CASE("local kernel matrix with position-dependent drift is asymmetric") {
  const auto cloud = test::grid_1d(0.0, 1.0, 3);
  const auto field = DriftDiffusionField::constant_diffusion(cloud.matrix(), mat1(1.0));  // b(x) = x
  const auto k = build_kernel_matrix(cloud, KernelSpec{KernelKind::local, 0.1}, &field);
  CHECK_FALSE(k.symmetric);
  const Eigen::MatrixXd d(k.entries);
  bool asym = false;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) asym = asym || d(i, j) != d(j, i);
  CHECK(asym);
  // Entry (i, j) uses b at x_i.
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(d(i, j) == doctest::Approx(local_kernel(cloud.point(i).transpose(), cloud.point(j).transpose(), 0.1,
                                                    mat1(1.0), cloud.point(i).transpose())));
}

TEST_CASE("kernel matrix argument checks") {
  const auto cloud = test::grid_1d(0.0, 1.0, 4);
  const auto field = DriftDiffusionField::constant_diffusion(RowMatrix::Zero(4, 1), mat1(1.0));
  CHECK_ERROR(build_kernel_matrix(cloud, KernelSpec{KernelKind::isotropic, 0.1}, &field), ErrorKind::invalid_argument);
  CHECK_ERROR(build_kernel_matrix(cloud, KernelSpec{KernelKind::local, 0.1}), ErrorKind::invalid_argument);
  const auto small = DriftDiffusionField::constant_diffusion(RowMatrix::Zero(3, 1), mat1(1.0));
  CHECK_ERROR(build_kernel_matrix(cloud, KernelSpec{KernelKind::local, 0.1}, &small), ErrorKind::invalid_argument);
  auto singular = DriftDiffusionField::constant_diffusion(RowMatrix::Zero(4, 1), mat1(1.0));
  singular.diffusion[2] = mat1(-1.0);
  try {
    build_kernel_matrix(cloud, KernelSpec{KernelKind::local, 0.1}, &singular);
    FAIL("expected singular-diffusion");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::singular_diffusion);
    CHECK(e.index() == std::optional<std::size_t>(2));
  }
}

TEST_CASE("density estimate requires the isotropic kernel") {
  const auto cloud = test::grid_1d(0.0, 1.0, 4);
  const auto field = DriftDiffusionField::constant_diffusion(RowMatrix::Zero(4, 1), mat1(1.0));
  const auto k = build_kernel_matrix(cloud, KernelSpec{KernelKind::local, 0.1}, &field);
  CHECK_ERROR(kernel_density_estimate(k), ErrorKind::invalid_argument);
}

TEST_CASE("density estimate of a single point is the self-term") {
  RowMatrix x(1, 3);
  x << 1, 2, 3;
  const auto q = kernel_density_estimate(build_kernel_matrix(PointCloud(x), KernelSpec{KernelKind::isotropic, 0.5}));
  CHECK(q.values.size() == 1);
  CHECK(q.values[0] == 1.0);
}

TEST_CASE("density estimate of uniform data is flat in the interior") {
  const int m = 500;
  const double eps = 1e-3;
  const auto cloud = test::grid_1d(0.0, 1.0, m);
  const auto q = kernel_density_estimate(build_kernel_matrix(cloud, KernelSpec{KernelKind::isotropic, eps}));
  // Gaussian convolution of the uniform density: m * sqrt(4 pi eps) per unit length, node spacing 1/(m-1).
  const double expected = (m - 1) * std::sqrt(4 * M_PI * eps);
  const double margin = 3 * std::sqrt(2 * eps);
  int checked = 0;
  for (int i = 0; i < m; ++i) {
    const double xi = cloud.point(i)[0];
    if (xi < margin || xi > 1 - margin) continue;
    CHECK(std::abs(q.values[i] / expected - 1.0) <= 0.02);
    ++checked;
  }
  CHECK(checked > 300);
  CHECK(q.values.minCoeff() >= 1.0);
}

TEST_CASE("cutoff drops exactly the entries beyond it") {
  const auto cloud = test::uniform_cloud(80, 2, 9);
  const double eps = 0.01;
  const auto full = build_kernel_matrix(cloud, KernelSpec{KernelKind::isotropic, eps});
  CHECK(full.entries.nonZeros() == 80 * 80);
  const double cutoff = 3.0;
  const Eigen::MatrixXd d(build_kernel_matrix(cloud, KernelSpec{KernelKind::isotropic, eps, 0.0, cutoff}).entries);
  int dropped = 0;
  for (int i = 0; i < 80; ++i)
    for (int j = 0; j < 80; ++j) {
      const double e = (cloud.point(i) - cloud.point(j)).squaredNorm() / (4 * eps);
      if (d(i, j) == 0.0) {
        CHECK(e > cutoff);
        ++dropped;
      } else {
        CHECK(e <= cutoff);
        CHECK(d(i, j) == doctest::Approx(std::exp(-e)).epsilon(1e-14));
      }
    }
  CHECK(dropped > 0);
}

TEST_CASE("default cutoff keeps the dropped mass below 1e-12") {
  CHECK(default_cutoff(1) >= 12 * std::log(10.0));
  CHECK(default_cutoff(10000) == doctest::Approx(12 * std::log(10.0) + std::log(10000.0)));
  const auto cloud = test::uniform_cloud(300, 2, 2);
  const double eps = 0.002;
  const auto full = kernel_density_estimate(build_kernel_matrix(cloud, KernelSpec{KernelKind::isotropic, eps}));
  const auto cut = kernel_density_estimate(
      build_kernel_matrix(cloud, KernelSpec{KernelKind::isotropic, eps, 0.0, default_cutoff(300)}));
  CHECK(((full.values - cut.values).array() / full.values.array()).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("streamed density and kernel sum match the stored matrix") {
  const auto cloud = test::uniform_cloud(120, 3, 4);
  for (std::optional<double> cutoff : {std::optional<double>{}, std::optional<double>{5.0}}) {
    const auto k = build_kernel_matrix(cloud, KernelSpec{KernelKind::isotropic, 0.03, 0.0, cutoff});
    CHECK(isotropic_density(cloud, 0.03, cutoff).values == kernel_density_estimate(k).values);
  }
  const auto k = build_kernel_matrix(cloud, KernelSpec{KernelKind::isotropic, 0.03});
  CHECK(isotropic_kernel_sum(cloud, 0.03) == doctest::Approx(k.entries.sum()).epsilon(1e-12));
}
TEST_SUITE_END();
