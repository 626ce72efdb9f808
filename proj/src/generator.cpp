#include "gdmap/generator.hpp"

#include <algorithm>
#include <cmath>

namespace gdmap {

const char* to_string(Direction d) noexcept { return d == Direction::backward ? "backward" : "forward"; }

const char* to_string(GeneratorKind k) noexcept {
  switch (k) {
    case GeneratorKind::classic_alpha: return "classic-alpha";
    case GeneratorKind::tmdmap: return "tmdmap";
    case GeneratorKind::berry_sauer: return "berry-sauer";
    case GeneratorKind::lkdmap: return "lkdmap";
  }
  return "unknown";
}

double max_abs(const SparseRowMatrix& a) {
  double out = 0.0;
  for (Eigen::Index i = 0; i < a.nonZeros(); ++i) out = std::max(out, std::abs(a.valuePtr()[i]));
  return out;
}

double GeneratorMatrix::conservation_defect() const {
  const Eigen::Index m = entries.rows();
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(m);
  const bool weighted = direction == Direction::forward && aux.measure.size() == m;
  double diag = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double w = weighted ? aux.measure[i] : 1.0;
    for (SparseRowMatrix::InnerIterator it(entries, i); it; ++it) {
      if (direction == Direction::backward)
        sums[i] += it.value();
      else
        sums[it.col()] += w * it.value();
      if (it.col() == i) diag = std::max(diag, std::abs(w * it.value()));
    }
  }
  const double worst = m > 0 ? sums.cwiseAbs().maxCoeff() : 0.0;
  return diag > 0.0 ? worst / diag : worst;
}

}  // namespace gdmap
