#include "gdmap/spectral.hpp"

#include "gdmap/errors.hpp"
#include "gdmap/random.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

// Last: its C complex header defines a macro I.
#include <arpack/arpack.hpp>
#undef I

namespace gdmap {

namespace {

constexpr const char* kModule = "spectral";
constexpr Eigen::Index kDenseLimit = 2000;
constexpr Eigen::Index kDenseAutomatic = 400;

using arpack::internal::dnaupd_c;
using arpack::internal::dneupd_c;
using arpack::internal::dsaupd_c;
using arpack::internal::dseupd_c;

// Fixed start vector so repeated solves are bit-reproducible regardless of
// ARPACK's internal generator state.
std::vector<double> start_vector(int n) {
  Philox4x32 rng(0x243F6A8885A308D3ull, 1);
  std::vector<double> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = rng.normal();
  return v;
}

int krylov_size(int nev, int n, const SpectralOptions& options) {
  const int ncv = options.ncv ? *options.ncv : std::max(2 * nev + 1, 30);
  return std::min(std::max(ncv, nev + 2), n);
}

struct RitzPairs {
  Eigen::VectorXcd values;
  Eigen::MatrixXcd vectors;
  bool converged = false;
};

template <typename Apply>
RitzPairs arnoldi(Apply&& apply, int n, int nev, const char* which, double tol, int ncv, int max_iterations) {
  int ido = 0, info = 1;
  std::vector<double> resid = start_vector(n);
  std::vector<double> v(static_cast<std::size_t>(n) * ncv), workd(3 * static_cast<std::size_t>(n));
  const int lworkl = 3 * ncv * ncv + 6 * ncv;
  std::vector<double> workl(static_cast<std::size_t>(lworkl));
  int iparam[11] = {1, 0, max_iterations, 1, 0, 0, 1, 0, 0, 0, 0};
  int ipntr[14] = {};
  while (true) {
    dnaupd_c(&ido, "I", n, which, nev, tol, resid.data(), ncv, v.data(), n, iparam, ipntr, workd.data(),
             workl.data(), lworkl, &info);
    if (ido != 1 && ido != -1) break;
    apply(workd.data() + ipntr[0] - 1, workd.data() + ipntr[1] - 1);
  }
  if (info < 0) fail(ErrorKind::internal_error, kModule, fmt::format("dnaupd rejected its input (info {})", info));
  RitzPairs out;
  out.converged = info == 0;
  // Request the Schur basis of the converged invariant subspace and finish
  // with a dense Rayleigh-Ritz step; the Ritz vectors dneupd assembles itself
  // are unreliable with some LAPACK builds.
  std::vector<int> select(static_cast<std::size_t>(ncv));
  std::vector<double> dr(nev + 1), di(nev + 1), workev(3 * ncv);
  int einfo = 0;
  dneupd_c(1, "P", select.data(), dr.data(), di.data(), v.data(), n, 0.0, 0.0, workev.data(), "I", n, which, nev,
           tol, resid.data(), ncv, v.data(), n, iparam, ipntr, workd.data(), workl.data(), lworkl, &einfo);
  const int nconv = std::min(iparam[4], nev);
  if (einfo != 0 || nconv < 1) {
    out.converged = false;
    return out;
  }
  Eigen::Map<const Eigen::MatrixXd> q(v.data(), n, nconv);
  Eigen::MatrixXd pq(n, nconv);
  for (int j = 0; j < nconv; ++j) {
    const Eigen::VectorXd col = q.col(j);
    apply(col.data(), pq.col(j).data());
  }
  const Eigen::MatrixXd h = q.transpose() * pq;
  Eigen::EigenSolver<Eigen::MatrixXd> small(h, true);
  if (small.info() != Eigen::Success) {
    out.converged = false;
    return out;
  }
  out.values = small.eigenvalues();
  out.vectors = q.cast<std::complex<double>>() * small.eigenvectors();
  if (iparam[4] < nev) out.converged = false;
  return out;
}

struct LanczosPairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  bool converged = false;
};

template <typename Apply>
LanczosPairs lanczos(Apply&& apply, int n, int nev, const char* which, double tol, int ncv, int max_iterations) {
  int ido = 0, info = 1;
  std::vector<double> resid = start_vector(n);
  std::vector<double> v(static_cast<std::size_t>(n) * ncv), workd(3 * static_cast<std::size_t>(n));
  const int lworkl = ncv * ncv + 8 * ncv;
  std::vector<double> workl(static_cast<std::size_t>(lworkl));
  int iparam[11] = {1, 0, max_iterations, 1, 0, 0, 1, 0, 0, 0, 0};
  int ipntr[11] = {};
  while (true) {
    dsaupd_c(&ido, "I", n, which, nev, tol, resid.data(), ncv, v.data(), n, iparam, ipntr, workd.data(),
             workl.data(), lworkl, &info);
    if (ido != 1 && ido != -1) break;
    apply(workd.data() + ipntr[0] - 1, workd.data() + ipntr[1] - 1);
  }
  if (info < 0) fail(ErrorKind::internal_error, kModule, fmt::format("dsaupd rejected its input (info {})", info));
  LanczosPairs out;
  out.converged = info == 0;
  std::vector<int> select(static_cast<std::size_t>(ncv));
  std::vector<double> d(nev), z(static_cast<std::size_t>(n) * nev);
  int einfo = 0;
  dseupd_c(1, "A", select.data(), d.data(), z.data(), n, 0.0, "I", n, which, nev, tol, resid.data(), ncv, v.data(),
           n, iparam, ipntr, workd.data(), workl.data(), lworkl, &einfo);
  if (einfo != 0 || iparam[4] < nev) {
    out.converged = false;
    return out;
  }
  out.values = Eigen::Map<const Eigen::VectorXd>(d.data(), nev);
  out.vectors = Eigen::Map<const Eigen::MatrixXd>(z.data(), n, nev);
  return out;
}

// Unit norm, first significant component real and positive.
void normalize_columns(Eigen::MatrixXcd& v) {
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    auto col = v.col(j);
    const double norm = col.norm();
    if (norm == 0.0) continue;
    col /= norm;
    const double big = col.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      const double a = std::abs(col[i]);
      if (a > 1e-12 * big) {
        col *= std::conj(col[i]) / a;
        col[i] = a;
        break;
      }
    }
  }
}

// Sorts by descending real part (then descending imaginary part), keeps k.
void order_and_truncate(Eigen::VectorXcd& values, Eigen::MatrixXcd& vectors, std::size_t k) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(values.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (values[a].real() != values[b].real()) return values[a].real() > values[b].real();
    return values[a].imag() > values[b].imag();
  });
  const auto keep = static_cast<Eigen::Index>(std::min<std::size_t>(k, idx.size()));
  Eigen::VectorXcd v(keep);
  Eigen::MatrixXcd w(vectors.rows(), keep);
  for (Eigen::Index j = 0; j < keep; ++j) {
    v[j] = values[idx[static_cast<std::size_t>(j)]];
    w.col(j) = vectors.col(idx[static_cast<std::size_t>(j)]);
  }
  values = std::move(v);
  vectors = std::move(w);
}

double diagonal_scale(const SparseRowMatrix& l) {
  double d = 1.0;
  for (Eigen::Index i = 0; i < l.outerSize(); ++i)
    for (SparseRowMatrix::InnerIterator it(l, i); it; ++it)
      if (it.col() == i) d = std::max(d, std::abs(it.value()));
  return d;
}

void check_request(const GeneratorMatrix& g, std::size_t k) {
  if (k < 1 || k > g.size())
    fail(ErrorKind::invalid_argument, kModule, fmt::format("k must be in [1, {}], got {}", g.size(), k));
  for (Eigen::Index i = 0; i < g.entries.nonZeros(); ++i)
    if (!std::isfinite(g.entries.valuePtr()[i]))
      fail(ErrorKind::invalid_argument, kModule, "generator has non-finite entries");
}

bool residuals_ok(const SpectralResult& r) {
  return r.residuals.size() > 0 && (r.residuals.array() <= r.tolerance).all();
}

std::vector<double> as_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Pairs every right eigenvalue with the nearest unused left one and scales
// the left vectors so that phi_n^T psi_n = 1.
Eigen::MatrixXcd match_left(const Eigen::VectorXcd& right_values, const Eigen::MatrixXcd& right,
                            const Eigen::VectorXcd& left_values, const Eigen::MatrixXcd& left) {
  Eigen::MatrixXcd out(right.rows(), right.cols());
  std::vector<bool> used(static_cast<std::size_t>(left_values.size()), false);
  for (Eigen::Index n = 0; n < right_values.size(); ++n) {
    Eigen::Index best = -1;
    double dist = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < left_values.size(); ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double d = std::abs(left_values[j] - right_values[n]);
      if (d < dist) {
        dist = d;
        best = j;
      }
    }
    if (best < 0) fail(ErrorKind::solver_failure, kModule, "could not match left and right eigenvalues");
    used[static_cast<std::size_t>(best)] = true;
    Eigen::VectorXcd phi = left.col(best);
    const std::complex<double> s = (phi.transpose() * right.col(n))(0, 0);
    if (std::abs(s) > 0.0) phi /= s;
    out.col(n) = phi;
  }
  return out;
}

SpectralResult finish(Eigen::VectorXcd values, Eigen::MatrixXcd vectors, std::size_t k, const SparseRowMatrix& l,
                      double tolerance, std::string method) {
  order_and_truncate(values, vectors, k);
  normalize_columns(vectors);
  SpectralResult r;
  r.residuals = eigen_residuals(l, values, vectors);
  r.eigenvalues = std::move(values);
  r.right_vectors = std::move(vectors);
  r.tolerance = tolerance;
  r.method = std::move(method);
  return r;
}

SpectralResult dense_nonsymmetric(const GeneratorMatrix& g, std::size_t k, double tolerance, bool left) {
  const Eigen::MatrixXd dense = Eigen::MatrixXd(g.entries);
  Eigen::EigenSolver<Eigen::MatrixXd> es(dense, true);
  if (es.info() != Eigen::Success) fail(ErrorKind::solver_failure, kModule, "dense eigensolver did not converge");
  SpectralResult r = finish(es.eigenvalues(), es.eigenvectors(), k, g.entries, tolerance, "dense-nonsymmetric");
  if (left) {
    Eigen::EigenSolver<Eigen::MatrixXd> lt(dense.transpose(), true);
    if (lt.info() != Eigen::Success) fail(ErrorKind::solver_failure, kModule, "dense eigensolver did not converge");
    r.left_vectors = match_left(r.eigenvalues, r.right_vectors, lt.eigenvalues(), lt.eigenvectors());
  }
  return r;
}

RitzPairs iterative_nonsymmetric(const SparseRowMatrix& l, double epsilon, int nev, double tolerance,
                                 const SpectralOptions& options) {
  const int n = static_cast<int>(l.rows());
  auto apply = [&](const double* in, double* out) {
    Eigen::Map<const Eigen::VectorXd> x(in, n);
    Eigen::Map<Eigen::VectorXd> y(out, n);
    y.noalias() = l * x;
    y = x + epsilon * y;
  };
  // ARPACK's test is |r| <= tol |mu| on P = I + eps L; a residual r on P is
  // r / eps on L.
  const double tol = std::max(0.1 * tolerance * epsilon, 1e-15);
  RitzPairs p = arnoldi(apply, n, nev, "LR", tol, krylov_size(nev, n, options), options.max_iterations);
  for (Eigen::Index j = 0; j < p.values.size(); ++j) p.values[j] = (p.values[j] - 1.0) / epsilon;
  return p;
}

SpectralResult nonsymmetric(const GeneratorMatrix& g, std::size_t k, const SpectralOptions& options) {
  const double tolerance = options.tol * diagonal_scale(g.entries);
  const auto m = static_cast<Eigen::Index>(g.size());
  const int nev = static_cast<int>(std::min<Eigen::Index>(static_cast<Eigen::Index>(k) + 1, m - 2));
  const bool feasible = nev >= static_cast<int>(k);
  bool dense = options.solver == SolverChoice::dense || !feasible ||
               (options.solver == SolverChoice::automatic && m <= kDenseAutomatic);
  if (options.solver == SolverChoice::iterative && !feasible)
    fail(ErrorKind::invalid_argument, kModule, "the iterative solver needs k <= m - 3");
  if (dense) return dense_nonsymmetric(g, k, tolerance, options.left_vectors);

  RitzPairs p = iterative_nonsymmetric(g.entries, g.epsilon, nev, tolerance, options);
  SpectralResult r;
  if (p.values.size() >= static_cast<Eigen::Index>(k))
    r = finish(p.values, p.vectors, k, g.entries, tolerance, "arnoldi-nonsymmetric");
  if (!p.converged || !residuals_ok(r)) {
    if (m <= kDenseLimit && options.solver == SolverChoice::automatic) {
      spdlog::warn("spectral: Arnoldi iteration did not reach tolerance {:.3g}; using the dense solver", tolerance);
      return dense_nonsymmetric(g, k, tolerance, options.left_vectors);
    }
    throw SolverFailure(kModule,
                        fmt::format("Arnoldi iteration did not reach residual tolerance {:.3g} within {} iterations",
                                    tolerance, options.max_iterations),
                        as_vector(r.residuals));
  }
  if (options.left_vectors) {
    const SparseRowMatrix lt = g.entries.transpose();
    RitzPairs q = iterative_nonsymmetric(lt, g.epsilon, nev, tolerance, options);
    if (!q.converged || q.values.size() < static_cast<Eigen::Index>(k))
      throw SolverFailure(kModule, "left eigenvectors did not converge", as_vector(r.residuals));
    r.left_vectors = match_left(r.eigenvalues, r.right_vectors, q.values, q.vectors);
  }
  return r;
}

SpectralResult from_symmetric(const SymmetrizedGenerator& s, const Eigen::VectorXd& mu, const Eigen::MatrixXd& v,
                              std::size_t k, double tolerance, bool left, std::string method) {
  const GeneratorMatrix& g = s.generator();
  Eigen::VectorXcd values(mu.size());
  Eigen::MatrixXcd vectors(v.rows(), v.cols());
  for (Eigen::Index j = 0; j < mu.size(); ++j) {
    values[j] = s.to_generator_eigenvalue(mu[j]);
    vectors.col(j) = s.to_generator_vector(v.col(j)).cast<std::complex<double>>();
  }
  SpectralResult r = finish(std::move(values), std::move(vectors), k, g.entries, tolerance, std::move(method));
  if (left) {
    Eigen::MatrixXcd phi = s.weights().cast<std::complex<double>>().asDiagonal() * r.right_vectors;
    for (Eigen::Index j = 0; j < phi.cols(); ++j) {
      const std::complex<double> c = (phi.col(j).transpose() * r.right_vectors.col(j))(0, 0);
      phi.col(j) /= c;
    }
    r.left_vectors = std::move(phi);
  }
  return r;
}

SpectralResult dense_symmetric(const SymmetrizedGenerator& s, std::size_t k, double tolerance, bool left) {
  const Eigen::MatrixXd dense = Eigen::MatrixXd(s.matrix());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
  if (es.info() != Eigen::Success) fail(ErrorKind::solver_failure, kModule, "dense eigensolver did not converge");
  return from_symmetric(s, es.eigenvalues(), es.eigenvectors(), k, tolerance, left, "dense-symmetrized");
}

}  // namespace

bool SpectralResult::near_real(std::size_t n) const {
  const auto j = static_cast<Eigen::Index>(n);
  const std::complex<double> l = eigenvalues[j];
  if (std::abs(l.imag()) > 1e-6 * std::max(1.0, std::abs(l.real()))) return false;
  const auto col = right_vectors.col(j);
  return col.imag().norm() <= 1e-6 * col.norm();
}

Eigen::VectorXd eigen_residuals(const SparseRowMatrix& l, const Eigen::VectorXcd& values,
                                const Eigen::MatrixXcd& vectors) {
  Eigen::VectorXd out(values.size());
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    const Eigen::VectorXd re = vectors.col(j).real();
    const Eigen::VectorXd im = vectors.col(j).imag();
    const Eigen::VectorXd lre = l * re;
    const Eigen::VectorXd lim = l * im;
    const double a = values[j].real(), b = values[j].imag();
    // (L - lambda)(re + i im) with lambda = a + i b
    const double r1 = (lre - a * re + b * im).squaredNorm();
    const double r2 = (lim - a * im - b * re).squaredNorm();
    const double norm = vectors.col(j).norm();
    out[j] = norm > 0.0 ? std::sqrt(r1 + r2) / norm : 0.0;
  }
  return out;
}

SpectralResult dominant_eigs(const GeneratorMatrix& generator, std::size_t k, const SpectralOptions& options) {
  check_request(generator, k);
  const bool symmetrizable =
      generator.direction == Direction::backward &&
      (generator.kind == GeneratorKind::tmdmap || generator.kind == GeneratorKind::classic_alpha) &&
      generator.aux.right_scaling.size() == static_cast<Eigen::Index>(generator.size()) &&
      generator.aux.row_sums.size() == static_cast<Eigen::Index>(generator.size());
  if (options.use_symmetric && symmetrizable) return dominant_eigs(SymmetrizedGenerator(generator), k, options);
  return nonsymmetric(generator, k, options);
}

SpectralResult dominant_eigs(const SymmetrizedGenerator& s, std::size_t k, const SpectralOptions& options) {
  const GeneratorMatrix& g = s.generator();
  check_request(g, k);
  const double tolerance = options.tol * diagonal_scale(g.entries);
  const auto m = static_cast<Eigen::Index>(g.size());
  const int nev = static_cast<int>(std::min<Eigen::Index>(static_cast<Eigen::Index>(k) + 1, m - 1));
  const bool feasible = nev >= static_cast<int>(k) && m > 2;
  if (options.solver == SolverChoice::iterative && !feasible)
    fail(ErrorKind::invalid_argument, kModule, "the iterative solver needs k <= m - 2");
  if (options.solver == SolverChoice::dense || !feasible ||
      (options.solver == SolverChoice::automatic && m <= kDenseAutomatic))
    return dense_symmetric(s, k, tolerance, options.left_vectors);

  // psi = W^{-1/2} v amplifies a residual of S by at most sqrt(max W / min W).
  const double spread = std::sqrt(s.weights().maxCoeff() / s.weights().minCoeff());
  const double tol = std::max(0.1 * tolerance * g.epsilon / spread, 1e-15);
  auto apply = [&](const double* in, double* out) { s.apply(in, out); };
  const int n = static_cast<int>(m);
  LanczosPairs p = lanczos(apply, n, nev, "LA", tol, krylov_size(nev, n, options), options.max_iterations);
  SpectralResult r;
  if (p.converged)
    r = from_symmetric(s, p.values, p.vectors, k, tolerance, options.left_vectors, "lanczos-symmetrized");
  if (!p.converged || !residuals_ok(r)) {
    if (m <= kDenseLimit && options.solver == SolverChoice::automatic) {
      spdlog::warn("spectral: Lanczos iteration did not reach tolerance {:.3g}; using the dense solver", tolerance);
      return dense_symmetric(s, k, tolerance, options.left_vectors);
    }
    throw SolverFailure(kModule,
                        fmt::format("Lanczos iteration did not reach residual tolerance {:.3g}", tolerance),
                        as_vector(r.residuals));
  }
  return r;
}

SymmetricEigenpairs symmetric_eigs_below(const SparseRowMatrix& s, std::size_t k, double sigma, double tol) {
  const Eigen::Index n = s.rows();
  if (s.cols() != n || k < 1 || static_cast<Eigen::Index>(k) > n - 2)
    fail(ErrorKind::invalid_argument, kModule, fmt::format("need a square matrix and 1 <= k <= m - 2, got k = {}", k));
  Eigen::SparseMatrix<double> shifted = -Eigen::SparseMatrix<double>(s);
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) += sigma;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(shifted);
  if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any())
    fail(ErrorKind::invalid_argument, kModule, "sigma I - S is not positive definite; raise the shift");
  auto apply = [&](const double* in, double* out) {
    Eigen::Map<const Eigen::VectorXd> x(in, n);
    Eigen::Map<Eigen::VectorXd>(out, n) = ldlt.solve(x);
  };
  const int nev = static_cast<int>(k);
  const int ncv = std::min<int>(std::max(2 * nev + 1, 30), static_cast<int>(n));
  LanczosPairs p = lanczos(apply, static_cast<int>(n), nev, "LA", tol, ncv, 5000);
  if (!p.converged) throw SolverFailure(kModule, "shift-invert Lanczos did not converge", {});

  SymmetricEigenpairs out;
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(nev));
  std::iota(idx.begin(), idx.end(), 0);
  Eigen::VectorXd lambda = (sigma - p.values.array().inverse()).matrix();
  std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return lambda[a] > lambda[b]; });
  out.values.resize(nev);
  out.vectors.resize(n, nev);
  out.residuals.resize(nev);
  for (int j = 0; j < nev; ++j) {
    out.values[j] = lambda[idx[static_cast<std::size_t>(j)]];
    Eigen::VectorXd v = p.vectors.col(idx[static_cast<std::size_t>(j)]);
    v.normalize();
    const double big = v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i)
      if (std::abs(v[i]) > 1e-12 * big) {
        if (v[i] < 0.0) v = -v;
        break;
      }
    out.residuals[j] = (s * v - out.values[j] * v).norm();
    out.vectors.col(j) = v;
  }
  return out;
}

Timescales implied_timescales(const SpectralResult& spectrum) {
  Timescales t;
  for (std::size_t n = 1; n < spectrum.count(); ++n) {
    const double re = spectrum.eigenvalues[static_cast<Eigen::Index>(n)].real();
    if (!(re < 0.0)) {
      spdlog::warn("spectral: degenerate spectrum, Re lambda_{} = {:.6g} >= 0; time scale omitted", n, re);
      t.omitted.push_back(n);
      continue;
    }
    t.values.push_back(-1.0 / re);
    t.modes.push_back(n);
  }
  std::vector<std::size_t> idx(t.values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return t.values[a] > t.values[b]; });
  Timescales sorted;
  sorted.omitted = t.omitted;
  for (auto i : idx) {
    sorted.values.push_back(t.values[i]);
    sorted.modes.push_back(t.modes[i]);
  }
  return sorted;
}

Embedding diffusion_embedding(const SpectralResult& spectrum, std::size_t dims, bool allow_complex) {
  Embedding e;
  for (std::size_t n = 1; n < spectrum.count() && e.modes.size() < dims; ++n)
    if (allow_complex || spectrum.near_real(n)) e.modes.push_back(n);
  if (e.modes.size() < dims) {
    std::string mags;
    for (std::size_t n = 1; n < spectrum.count(); ++n)
      mags += fmt::format("{}{:.3g}", mags.empty() ? "" : ", ",
                          std::abs(spectrum.eigenvalues[static_cast<Eigen::Index>(n)].imag()));
    fail(ErrorKind::invalid_argument, kModule,
         fmt::format("only {} near-real modes beyond lambda_0 for {} requested dims; |Im lambda_n| = [{}]",
                     e.modes.size(), dims, mags),
         std::nullopt, "request more eigenpairs or allow complex modes");
  }
  const Eigen::Index m = spectrum.right_vectors.rows();
  e.coordinates.resize(m, static_cast<Eigen::Index>(dims));
  for (std::size_t c = 0; c < dims; ++c) {
    const auto n = static_cast<Eigen::Index>(e.modes[c]);
    const std::complex<double> scale = std::exp(spectrum.eigenvalues[n]);
    e.coordinates.col(static_cast<Eigen::Index>(c)) = (scale * spectrum.right_vectors.col(n)).real();
  }
  return e;
}

KMeansResult kmeans_cluster(const RowMatrix& coords, std::size_t k, std::uint64_t seed) {
  const Eigen::Index m = coords.rows();
  const Eigen::Index d = coords.cols();
  if (k < 1 || static_cast<Eigen::Index>(k) > m)
    fail(ErrorKind::invalid_argument, kModule, fmt::format("k must be in [1, {}], got {}", m, k));
  if (!coords.allFinite()) fail(ErrorKind::invalid_argument, kModule, "non-finite clustering coordinates");
  const auto kk = static_cast<Eigen::Index>(k);
  Philox4x32 rng(seed);

  KMeansResult r;
  r.centroids.resize(kk, d);
  std::vector<double> dist2(static_cast<std::size_t>(m), std::numeric_limits<double>::infinity());
  std::vector<bool> chosen(static_cast<std::size_t>(m), false);
  auto update_dist = [&](Eigen::Index c) {
    for (Eigen::Index i = 0; i < m; ++i)
      dist2[i] = std::min(dist2[i], (coords.row(i) - r.centroids.row(c)).squaredNorm());
  };
  Eigen::Index first = std::min<Eigen::Index>(static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(m)), m - 1);
  r.centroids.row(0) = coords.row(first);
  chosen[static_cast<std::size_t>(first)] = true;
  update_dist(0);
  for (Eigen::Index c = 1; c < kk; ++c) {
    double total = 0.0;
    for (double v : dist2) total += v;
    Eigen::Index pick = -1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        acc += dist2[i];
        if (acc > target && dist2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      if (pick < 0)
        for (Eigen::Index i = m - 1; i >= 0; --i)
          if (dist2[i] > 0.0) {
            pick = i;
            break;
          }
    }
    if (pick < 0)
      for (Eigen::Index i = 0; i < m; ++i)
        if (!chosen[static_cast<std::size_t>(i)]) {
          pick = i;
          break;
        }
    chosen[static_cast<std::size_t>(pick)] = true;
    r.centroids.row(c) = coords.row(pick);
    update_dist(c);
  }

  r.labels.assign(static_cast<std::size_t>(m), 0);
  std::vector<double> own(static_cast<std::size_t>(m));
  auto assign = [&] {
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < kk; ++c) {
        const double dd = (coords.row(i) - r.centroids.row(c)).squaredNorm();
        if (dd < bd) {
          bd = dd;
          best = static_cast<int>(c);
        }
      }
      r.labels[static_cast<std::size_t>(i)] = best;
      own[static_cast<std::size_t>(i)] = bd;
      inertia += bd;
    }
    return inertia;
  };

  double inertia = assign();
  for (r.iterations = 1; r.iterations <= 300; ++r.iterations) {
    RowMatrix sums = RowMatrix::Zero(kk, d);
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(kk), 0);
    for (Eigen::Index i = 0; i < m; ++i) {
      sums.row(r.labels[static_cast<std::size_t>(i)]) += coords.row(i);
      ++counts[static_cast<std::size_t>(r.labels[static_cast<std::size_t>(i)])];
    }
    for (Eigen::Index c = 0; c < kk; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        r.centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      Eigen::Index far = 0;
      for (Eigen::Index i = 1; i < m; ++i)
        if (own[static_cast<std::size_t>(i)] > own[static_cast<std::size_t>(far)]) far = i;
      r.centroids.row(c) = coords.row(far);
      own[static_cast<std::size_t>(far)] = 0.0;
    }
    const double next = assign();
    const bool done = inertia == 0.0 || std::abs(inertia - next) <= 1e-8 * inertia;
    inertia = next;
    if (done) break;
  }
  r.iterations = std::min(r.iterations, 300);
  r.inertia = inertia;
  return r;
}

namespace {

// Minimum-cost assignment on a square matrix (Hungarian algorithm with
// potentials); returns the column assigned to each row.
std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<bool> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

std::vector<int> dense_labels(const std::vector<int>& labels, int& count) {
  std::vector<int> sorted(labels);
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  count = static_cast<int>(sorted.size());
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    out[i] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), labels[i]) - sorted.begin());
  return out;
}

}  // namespace

double cluster_agreement(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size() || a.empty())
    fail(ErrorKind::invalid_argument, kModule, "labelings must be nonempty and of equal length");
  int ka = 0, kb = 0;
  const auto da = dense_labels(a, ka);
  const auto db = dense_labels(b, kb);
  const int n = std::max(ka, kb);
  Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < a.size(); ++i) cost(da[i], db[i]) -= 1.0;
  const auto match = hungarian(cost);
  double agree = 0.0;
  for (int r = 0; r < n; ++r) agree -= cost(r, match[static_cast<std::size_t>(r)]);
  return agree / static_cast<double>(a.size());
}

}  // namespace gdmap
