#pragma once

#include "gdmap/errors.hpp"
#include "gdmap/generator.hpp"
#include "gdmap/point_cloud.hpp"
#include "gdmap/tmdmap.hpp"

#include <Eigen/Core>

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gdmap {

enum class SolverChoice { automatic, dense, iterative };

struct SpectralOptions {
  /// Residual tolerance relative to max(1, max |L_ii|): every returned pair
  /// satisfies |L psi - lambda psi| <= tol * max(1, max |L_ii|) |psi|.
  double tol = 1e-8;
  SolverChoice solver = SolverChoice::automatic;
  /// Use the symmetrized form when the generator admits one.
  bool use_symmetric = true;
  bool left_vectors = false;
  int max_iterations = 5000;
  /// Krylov subspace size; default max(2k + 1, 30), capped at m.
  std::optional<int> ncv;
};

/// Eigenpairs of a generator ordered by descending real part.
struct SpectralResult {
  Eigen::VectorXcd eigenvalues;
  Eigen::MatrixXcd right_vectors;  // m x k, unit norm
  /// Scaled so that phi_n^T psi_n = 1.
  std::optional<Eigen::MatrixXcd> left_vectors;
  Eigen::VectorXd residuals;  // |L psi - lambda psi| / |psi|, recomputed
  double tolerance = 0.0;     // absolute bound the residuals satisfy
  std::string method;

  std::size_t count() const noexcept { return static_cast<std::size_t>(eigenvalues.size()); }
  /// |Im lambda| <= 1e-6 max(1, |Re lambda|) and |Im psi| <= 1e-6 |psi|.
  bool near_real(std::size_t n) const;
  Eigen::VectorXd real_vector(std::size_t n) const { return right_vectors.col(static_cast<Eigen::Index>(n)).real(); }
};

/// The k eigenvalues of largest real part. TMDmap and classic generators
/// go through the symmetrized form unless options.use_symmetric is false.
/// Throws SolverFailure when a residual cannot be brought below tolerance.
SpectralResult dominant_eigs(const GeneratorMatrix& generator, std::size_t k, const SpectralOptions& options = {});
SpectralResult dominant_eigs(const SymmetrizedGenerator& symmetric, std::size_t k,
                             const SpectralOptions& options = {});

/// |L v_n - lambda_n v_n| / |v_n| for each column.
Eigen::VectorXd eigen_residuals(const SparseRowMatrix& l, const Eigen::VectorXcd& values,
                                const Eigen::MatrixXcd& vectors);

/// Eigenpairs of a sparse symmetric matrix S nearest the shift sigma from
/// below, by shift-invert Lanczos; requires sigma I - S positive definite
/// (sigma above the spectrum). Values descending, vectors orthonormal.
struct SymmetricEigenpairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  Eigen::VectorXd residuals;
};
SymmetricEigenpairs symmetric_eigs_below(const SparseRowMatrix& s, std::size_t k, double sigma, double tol = 1e-10);

struct Timescales {
  std::vector<double> values;      // t_n = -1 / Re lambda_n, descending
  std::vector<std::size_t> modes;  // the n of each entry
  std::vector<std::size_t> omitted;
};

/// Time scales of the modes n >= 1; modes with Re lambda_n >= 0 are omitted
/// with a degenerate-spectrum warning.
Timescales implied_timescales(const SpectralResult& spectrum);

struct Embedding {
  RowMatrix coordinates;           // m x dims, column n-1 = e^{lambda_n} psi_n
  std::vector<std::size_t> modes;
};

/// Coordinates from the first dims near-real modes after lambda_0. With
/// allow_complex the real parts of any modes are used instead.
Embedding diffusion_embedding(const SpectralResult& spectrum, std::size_t dims, bool allow_complex = false);

struct KMeansResult {
  std::vector<int> labels;
  RowMatrix centroids;
  double inertia = 0.0;
  int iterations = 0;
};

/// k-means++ seeding, then Lloyd iterations until the relative inertia change
/// is below 1e-8 or 300 iterations. Ties go to the lowest index; an emptied
/// cluster is re-seeded at the point farthest from its centroid.
KMeansResult kmeans_cluster(const RowMatrix& coords, std::size_t k, std::uint64_t seed);

/// Fraction of points on which two labelings agree under the best matching
/// of labels (Hungarian assignment).
double cluster_agreement(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace gdmap
