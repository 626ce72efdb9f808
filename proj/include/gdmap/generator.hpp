#pragma once

#include "gdmap/kernels.hpp"

#include <Eigen/Core>

namespace gdmap {

enum class Direction { backward, forward };
enum class GeneratorKind { classic_alpha, tmdmap, berry_sauer, lkdmap };

const char* to_string(Direction d) noexcept;
const char* to_string(GeneratorKind k) noexcept;

/// Diagonal normalizers used while building a generator.
///
/// right_scaling is the diagonal applied on the right of the kernel matrix
/// (D_{eps,pi} for TMDmap, q^{-alpha} for the classic map, 1/q for LKDmap,
/// empty for Berry-Sauer). row_sums is the diagonal of row sums of the
/// right-normalized kernel, used for the left normalization.
struct GeneratorAux {
  Eigen::VectorXd right_scaling;
  Eigen::VectorXd row_sums;
  /// Quadrature weights under which the columns of a forward generator sum
  /// to zero (1/q for LKDmap); empty means uniform.
  Eigen::VectorXd measure;
};

/// m x m approximation of a backward (rows sum to zero) or forward (columns
/// sum to zero) generator, eps^{-1} (P - I) for a Markov-type matrix P.
struct GeneratorMatrix {
  SparseRowMatrix entries;
  double epsilon = 0.0;
  Direction direction = Direction::backward;
  GeneratorKind kind = GeneratorKind::tmdmap;
  GeneratorAux aux;

  std::size_t size() const noexcept { return static_cast<std::size_t>(entries.rows()); }

  /// Largest |row sum| (backward) or |column sum| (forward, weighted by
  /// aux.measure when set) divided by the largest |diagonal entry| (weighted
  /// the same way).
  double conservation_defect() const;
};

/// Entrywise max |a_ij|.
double max_abs(const SparseRowMatrix& a);

}  // namespace gdmap
