#include "gdmap/field.hpp"

#include "gdmap/errors.hpp"

#include <fmt/format.h>

namespace gdmap {

void DriftDiffusionField::validate(const PointCloud& cloud) const {
  const auto m = cloud.size();
  const auto n = cloud.dim();
  if (size() != m || dim() != n || diffusion.size() != m)
    fail(ErrorKind::invalid_argument, "lkdmap",
         fmt::format("field shape ({} drift rows x {}, {} diffusion matrices) does not match cloud ({} x {})",
                     size(), dim(), diffusion.size(), m, n));
  if (!(eta >= 0.0)) fail(ErrorKind::invalid_argument, "lkdmap", "eta must be nonnegative");
  if (!drift.allFinite()) fail(ErrorKind::invalid_argument, "lkdmap", "non-finite drift");
  for (std::size_t i = 0; i < m; ++i) {
    const auto& a = diffusion[i];
    if (static_cast<std::size_t>(a.rows()) != n || static_cast<std::size_t>(a.cols()) != n)
      fail(ErrorKind::invalid_argument, "lkdmap", "diffusion matrix has the wrong shape", i);
    if (!a.allFinite()) fail(ErrorKind::invalid_argument, "lkdmap", "non-finite diffusion matrix", i);
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      fail(ErrorKind::invalid_argument, "lkdmap", "diffusion matrix is not symmetric", i);
  }
}

DriftDiffusionField DriftDiffusionField::constant_diffusion(RowMatrix drift, const Eigen::MatrixXd& diffusion,
                                                            double eta, Provenance provenance) {
  DriftDiffusionField field;
  const auto m = static_cast<std::size_t>(drift.rows());
  field.drift = std::move(drift);
  field.diffusion.assign(m, diffusion);
  field.eta = eta;
  field.provenance = provenance;
  return field;
}

}  // namespace gdmap
