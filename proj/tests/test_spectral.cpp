#include "gdmap/lkdmap.hpp"
#include "gdmap/spectral.hpp"
#include "gdmap/tmdmap.hpp"

#include "helpers.hpp"

#include <cmath>
#include <set>

using namespace gdmap;

TEST_SUITE_BEGIN("spectral");

namespace {

Eigen::VectorXd double_well_1d_energy(const PointCloud& c) {
  Eigen::VectorXd u(static_cast<Eigen::Index>(c.size()));
  for (std::size_t i = 0; i < c.size(); ++i) u[static_cast<Eigen::Index>(i)] = std::pow(c.point(i)[0] * c.point(i)[0] - 1, 2);
  return u;
}

GeneratorMatrix nonsymmetric_generator(std::size_t m, std::uint64_t seed) {
  const auto cloud = test::uniform_cloud(m, 2, seed, -1.0, 1.0);
  RowMatrix v(static_cast<Eigen::Index>(m), 2);
  for (std::size_t i = 0; i < m; ++i) v.row(static_cast<Eigen::Index>(i)) << -cloud.point(i)[1], cloud.point(i)[0];
  return build_lkdmap(cloud, apply_velocity_field(cloud, v, 0.2), 0.02, 0.02).backward;
}

SpectralResult by_hand(std::vector<double> values, const Eigen::MatrixXd& vectors) {
  SpectralResult r;
  r.eigenvalues = Eigen::VectorXcd(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) r.eigenvalues[static_cast<Eigen::Index>(i)] = values[i];
  r.right_vectors = vectors.cast<std::complex<double>>();
  r.residuals = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(values.size()));
  return r;
}

}  // namespace

TEST_CASE("k = 1 returns lambda_0 = 0 with a constant vector") {
  const auto g = nonsymmetric_generator(300, 2);
  for (auto solver : {SolverChoice::dense, SolverChoice::iterative}) {
    SpectralOptions o;
    o.solver = solver;
    const auto s = dominant_eigs(g, 1, o);
    REQUIRE(s.count() == 1);
    CHECK(std::abs(s.eigenvalues[0]) <= 1e-8);
    const Eigen::VectorXd psi = s.real_vector(0);
    CHECK((psi.array() - psi.mean()).abs().maxCoeff() <= 1e-6 * std::abs(psi.mean()));
    CHECK(psi[0] > 0.0);
  }
}

TEST_CASE("symmetrized TMDmap spectrum is real and nonpositive") {
  const auto cloud = test::uniform_cloud(900, 2, 12, -1.5, 1.5);
  Eigen::VectorXd u = double_well_1d_energy(cloud) + cloud.matrix().col(1).array().square().matrix();
  const auto l = build_tmdmap(cloud, TargetDensity::from_energy(2.0, u), 0.05);
  for (auto solver : {SolverChoice::dense, SolverChoice::iterative}) {
    SpectralOptions o;
    o.solver = solver;
    const auto s = dominant_eigs(l, 8, o);
    for (std::size_t n = 0; n < s.count(); ++n) {
      CHECK(s.near_real(n));
      CHECK(s.eigenvalues[static_cast<Eigen::Index>(n)].real() <= s.tolerance);
    }
    CHECK(std::abs(s.eigenvalues[0].real()) <= 1e-8);
  }
}

TEST_CASE("residuals are recomputed and below the recorded tolerance") {
  const auto g = nonsymmetric_generator(700, 5);
  SpectralOptions o;
  o.solver = SolverChoice::iterative;
  const auto s = dominant_eigs(g, 6, o);
  const Eigen::VectorXd r = eigen_residuals(g.entries, s.eigenvalues, s.right_vectors);
  CHECK((r - s.residuals).cwiseAbs().maxCoeff() <= 1e-14 * std::max(1.0, r.maxCoeff()));
  CHECK((s.residuals.array() <= s.tolerance).all());
  for (std::size_t n = 0; n < s.count(); ++n) CHECK(s.right_vectors.col(static_cast<Eigen::Index>(n)).norm() == doctest::Approx(1.0));
  // descending real part
  for (std::size_t n = 1; n < s.count(); ++n)
    CHECK(s.eigenvalues[static_cast<Eigen::Index>(n)].real() <= s.eigenvalues[static_cast<Eigen::Index>(n - 1)].real() + 1e-12);
}

TEST_CASE("iterative and dense solvers agree") {
  const auto g = nonsymmetric_generator(600, 7);
  SpectralOptions dense, iter;
  dense.solver = SolverChoice::dense;
  iter.solver = SolverChoice::iterative;
  const auto a = dominant_eigs(g, 6, dense);
  const auto b = dominant_eigs(g, 6, iter);
  for (int n = 0; n < 6; ++n) CHECK(std::abs(a.eigenvalues[n] - b.eigenvalues[n]) <= 1e-8 * std::max(1.0, std::abs(a.eigenvalues[n])));
}

TEST_CASE("complex eigenvalues come in conjugate pairs") {
  const auto g = nonsymmetric_generator(500, 9);
  SpectralOptions o;
  o.solver = SolverChoice::dense;
  const auto s = dominant_eigs(g, 15, o);
  for (Eigen::Index n = 0; n < s.eigenvalues.size(); ++n) {
    if (s.near_real(static_cast<std::size_t>(n))) continue;
    double best = HUGE_VAL;
    for (Eigen::Index j = 0; j < s.eigenvalues.size(); ++j) best = std::min(best, std::abs(s.eigenvalues[j] - std::conj(s.eigenvalues[n])));
    // the partner may be cut off at the end of the list
    if (n + 1 < s.eigenvalues.size()) CHECK(best <= 1e-8 * std::abs(s.eigenvalues[n]));
  }
}

TEST_CASE("left vectors") {
  SUBCASE("biorthogonal for a nonsymmetric generator") {
    const auto g = nonsymmetric_generator(400, 13);
    SpectralOptions o;
    o.left_vectors = true;
    for (auto solver : {SolverChoice::dense, SolverChoice::iterative}) {
      o.solver = solver;
      const auto s = dominant_eigs(g, 5, o);
      REQUIRE(s.left_vectors);
      const Eigen::MatrixXcd gram = s.left_vectors->transpose() * s.right_vectors;
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
          if (i == j) CHECK(std::abs(gram(i, j) - 1.0) <= 1e-6);
          else CHECK(std::abs(gram(i, j)) <= 1e-6);
        }
    }
  }
  SUBCASE("TMDmap left vectors are W psi") {
    const auto cloud = test::uniform_cloud(500, 2, 3, -1.5, 1.5);
    const auto l = build_tmdmap(cloud, TargetDensity::from_energy(1.0, double_well_1d_energy(cloud)), 0.05);
    SpectralOptions o;
    o.left_vectors = true;
    const auto s = dominant_eigs(l, 4, o);
    const Eigen::VectorXd w = l.aux.right_scaling.cwiseProduct(l.aux.row_sums);
    for (int n = 0; n < 4; ++n) {
      const Eigen::VectorXd phi = s.left_vectors->col(n).real();
      const Eigen::VectorXd wpsi = w.cwiseProduct(s.real_vector(static_cast<std::size_t>(n)));
      const double c = phi.dot(wpsi) / wpsi.squaredNorm();
      CHECK((phi - c * wpsi).norm() <= 1e-6 * phi.norm());
    }
  }
}

TEST_CASE("argument checks") {
  const auto g = nonsymmetric_generator(50, 1);
  CHECK_ERROR(dominant_eigs(g, 51), ErrorKind::invalid_argument);
  CHECK_ERROR(dominant_eigs(g, 0), ErrorKind::invalid_argument);
}

TEST_CASE("solver failure carries the best residuals") {
  const auto g = nonsymmetric_generator(2500, 21);
  SpectralOptions o;
  o.solver = SolverChoice::iterative;
  o.max_iterations = 1;
  o.tol = 1e-15;
  try {
    dominant_eigs(g, 6, o);
    FAIL("expected solver-failure");
  } catch (const SolverFailure& e) {
    CHECK(e.kind() == ErrorKind::solver_failure);
  }
}

TEST_CASE("implied time scales") {
  const Eigen::MatrixXd v = Eigen::MatrixXd::Identity(4, 3);
  CHECK(implied_timescales(by_hand({0.0, -0.5}, v.leftCols(2))).values == std::vector<double>{2.0});
  CHECK(implied_timescales(by_hand({0.0, -0.25, -1.0}, v)).values == std::vector<double>{4.0, 1.0});
  const auto t = implied_timescales(by_hand({0.0, 1e-3, -1.0}, v));
  CHECK(t.values == std::vector<double>{1.0});
  CHECK(t.modes == std::vector<std::size_t>{2});
  CHECK(t.omitted == std::vector<std::size_t>{1});
}

TEST_CASE("diffusion embedding") {
  SUBCASE("zero eigenvalues give the raw vectors") {
    Eigen::MatrixXd v(4, 3);
    v << 1, 2, 3, 1, -2, 0.5, 1, 0, -1, 1, 4, 2;
    const auto e = diffusion_embedding(by_hand({0.0, 0.0, 0.0}, v), 2);
    CHECK(Eigen::MatrixXd(e.coordinates) == v.rightCols(2));
  }
  SUBCASE("scaling by exp(lambda)") {
    Eigen::MatrixXd v = Eigen::MatrixXd::Ones(3, 2);
    const auto e = diffusion_embedding(by_hand({0.0, -1.0}, v), 1);
    CHECK(e.coordinates(0, 0) == doctest::Approx(std::exp(-1.0)));
  }
  SUBCASE("complex modes are refused unless allowed") {
    auto r = by_hand({0.0, -1.0, -1.0}, Eigen::MatrixXd::Ones(3, 3));
    r.eigenvalues[1] = {-1.0, 0.5};
    r.eigenvalues[2] = {-1.0, -0.5};
    CHECK_ERROR(diffusion_embedding(r, 1), ErrorKind::invalid_argument);
    CHECK(diffusion_embedding(r, 2, true).coordinates.cols() == 2);
  }
  SUBCASE("first coordinate separates the wells of a symmetric double well") {
    const auto cloud = test::grid_1d(-1.8, 1.8, 800);
    const auto l = build_tmdmap(cloud, TargetDensity::from_energy(3.0, double_well_1d_energy(cloud)), 0.01);
    const auto e = diffusion_embedding(dominant_eigs(l, 3), 1);
    const double left = e.coordinates(0, 0);
    for (int i = 0; i < 800; ++i) {
      const double x = cloud.point(i)[0];
      if (std::abs(x) < 0.3) continue;  // the sign flips inside the barrier
      CHECK(((e.coordinates(i, 0) > 0) == (left > 0)) == (x < 0));
    }
  }
}

TEST_CASE("k-means") {
  SUBCASE("two separated blobs") {
    Philox4x32 rng(3);
    RowMatrix x(200, 1);
    std::vector<int> truth(200);
    for (int i = 0; i < 200; ++i) {
      truth[i] = i % 2;
      x(i, 0) = (i % 2 ? 10.0 : -10.0) + rng.normal();
    }
    const auto r = kmeans_cluster(x, 2, 42);
    CHECK(cluster_agreement(r.labels, truth) == 1.0);
  }
  SUBCASE("k = m") {
    const RowMatrix x = test::uniform_cloud(12, 2, 4).matrix();
    const auto r = kmeans_cluster(x, 12, 1);
    CHECK(r.inertia == 0.0);
    CHECK(std::set<int>(r.labels.begin(), r.labels.end()).size() == 12);
  }
  SUBCASE("deterministic for a fixed seed") {
    const RowMatrix x = test::uniform_cloud(500, 3, 8).matrix();
    const auto a = kmeans_cluster(x, 5, 77);
    const auto b = kmeans_cluster(x, 5, 77);
    CHECK(a.labels == b.labels);
    CHECK(a.inertia == b.inertia);
  }
  SUBCASE("agreement is invariant to relabeling") {
    std::vector<int> a{0, 0, 1, 1, 2, 2, 2};
    std::vector<int> b{2, 2, 0, 0, 1, 1, 0};
    CHECK(cluster_agreement(a, b) == doctest::Approx(6.0 / 7.0));
    std::vector<int> c{5, 5, 7, 7, 9, 9, 7};
    CHECK(cluster_agreement(a, c) == cluster_agreement(a, b));
  }
  SUBCASE("argument checks") {
    const RowMatrix x = test::uniform_cloud(5, 1, 1).matrix();
    CHECK_ERROR(kmeans_cluster(x, 6, 1), ErrorKind::invalid_argument);
    CHECK_ERROR(kmeans_cluster(x, 0, 1), ErrorKind::invalid_argument);
  }
}

TEST_CASE("shift-invert Lanczos on a symmetric matrix") {
  // 1D Neumann Laplacian stencil: eigenvalues -4 sin^2(k pi / (2n)).
  const int n = 300;
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i) {
    double d = 0.0;
    if (i > 0) t.emplace_back(i, i - 1, 1.0), d -= 1.0;
    if (i + 1 < n) t.emplace_back(i, i + 1, 1.0), d -= 1.0;
    t.emplace_back(i, i, d);
  }
  SparseRowMatrix s(n, n);
  s.setFromTriplets(t.begin(), t.end());
  const auto r = symmetric_eigs_below(s, 4, 1e-3);
  for (int k = 0; k < 4; ++k) {
    const double exact = -4 * std::pow(std::sin(k * M_PI / (2 * n)), 2);
    CHECK(r.values[k] == doctest::Approx(exact).epsilon(1e-9).scale(1.0));
  }
  CHECK(r.residuals.maxCoeff() <= 1e-8);
}

TEST_SUITE_END();
