#include "gdmap/kernels.hpp"

#include "gdmap/detail/parallel.hpp"
#include "gdmap/errors.hpp"

#include <Eigen/Cholesky>
#include <fmt/format.h>

#include <cmath>
#include <vector>

namespace gdmap {

const char* to_string(KernelKind kind) noexcept {
  switch (kind) {
    case KernelKind::isotropic: return "isotropic";
    case KernelKind::local: return "local";
    case KernelKind::regularized_local: return "regularized-local";
  }
  return "unknown";
}

void KernelSpec::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    fail(ErrorKind::invalid_argument, "kernels", fmt::format("epsilon must be positive, got {}", epsilon));
  if (!(eta >= 0.0) || !std::isfinite(eta))
    fail(ErrorKind::invalid_argument, "kernels", fmt::format("eta must be nonnegative, got {}", eta));
  if (cutoff && (!(*cutoff > 0.0) || std::isnan(*cutoff)))
    fail(ErrorKind::invalid_argument, "kernels", fmt::format("cutoff must be positive, got {}", *cutoff));
}

double default_cutoff(std::size_t m) {
  return 12.0 * std::log(10.0) + std::log(static_cast<double>(std::max<std::size_t>(m, 2)));
}

namespace {

void check_scale(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    fail(ErrorKind::invalid_argument, "kernels", fmt::format("epsilon must be positive, got {}", epsilon));
}

void check_pair(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size() || x.size() == 0)
    fail(ErrorKind::invalid_argument, "kernels", "kernel arguments must have the same nonzero dimension");
  if (!x.allFinite() || !y.allFinite())
    fail(ErrorKind::invalid_argument, "kernels", "non-finite kernel argument");
}

// Quadratic form (x - y + eps b)^T M^{-1} (x - y + eps b) / (4 eps) for a fixed
// row point x, evaluated by forward substitution with the Cholesky factor of M.
class RowExponent {
 public:
  RowExponent(std::size_t dim, double epsilon) : dim_(dim), scale_(1.0 / (4.0 * epsilon)),
                                                 center_(dim), factor_(dim * dim, 0.0), work_(dim) {}

  void set_isotropic(const double* x) {
    isotropic_ = true;
    std::copy(x, x + dim_, center_.begin());
  }

  // Returns false when M is not positive definite.
  bool set_local(const double* x, const double* drift, const Eigen::MatrixXd& metric, double epsilon) {
    isotropic_ = false;
    for (std::size_t k = 0; k < dim_; ++k) center_[k] = x[k] + epsilon * drift[k];
    Eigen::LLT<Eigen::MatrixXd> llt(metric);
    if (llt.info() != Eigen::Success) return false;
    const Eigen::MatrixXd lower = llt.matrixL();
    for (std::size_t r = 0; r < dim_; ++r) {
      if (!(lower(r, r) > 0.0) || !std::isfinite(lower(r, r))) return false;
      for (std::size_t c = 0; c <= r; ++c) factor_[r * dim_ + c] = lower(r, c);
    }
    return true;
  }

  double operator()(const double* y) {
    double q = 0.0;
    if (isotropic_) {
      for (std::size_t k = 0; k < dim_; ++k) {
        const double d = center_[k] - y[k];
        q += d * d;
      }
      return q * scale_;
    }
    for (std::size_t r = 0; r < dim_; ++r) {
      double v = center_[r] - y[r];
      for (std::size_t c = 0; c < r; ++c) v -= factor_[r * dim_ + c] * work_[c];
      v /= factor_[r * dim_ + r];
      work_[r] = v;
      q += v * v;
    }
    return q * scale_;
  }

 private:
  std::size_t dim_;
  double scale_;
  bool isotropic_ = true;
  std::vector<double> center_;
  std::vector<double> factor_;
  std::vector<double> work_;
};

double local_exponent(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                      double epsilon, const Eigen::MatrixXd& metric,
                      const Eigen::Ref<const Eigen::VectorXd>& drift, const char* hint) {
  check_scale(epsilon);
  check_pair(x, y);
  const auto n = x.size();
  if (metric.rows() != n || metric.cols() != n || drift.size() != n)
    fail(ErrorKind::invalid_argument, "kernels", "diffusion/drift dimension does not match the points");
  if (!metric.allFinite() || !drift.allFinite())
    fail(ErrorKind::invalid_argument, "kernels", "non-finite diffusion or drift");
  if ((metric - metric.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, metric.cwiseAbs().maxCoeff()))
    fail(ErrorKind::invalid_argument, "kernels", "diffusion matrix is not symmetric");
  RowExponent row(static_cast<std::size_t>(n), epsilon);
  const Eigen::VectorXd xc = x;
  const Eigen::VectorXd bc = drift;
  if (!row.set_local(xc.data(), bc.data(), metric, epsilon))
    fail(ErrorKind::singular_diffusion, "kernels", "diffusion matrix is not positive definite", std::nullopt, hint);
  const Eigen::VectorXd yc = y;
  return row(yc.data());
}

}  // namespace

double isotropic_kernel(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                        double epsilon) {
  check_scale(epsilon);
  check_pair(x, y);
  return std::exp(-(x - y).squaredNorm() / (4.0 * epsilon));
}

double local_kernel(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                    double epsilon, const Eigen::Ref<const Eigen::MatrixXd>& diffusion,
                    const Eigen::Ref<const Eigen::VectorXd>& drift) {
  return std::exp(-local_exponent(x, y, epsilon, diffusion, drift, "the diffusion matrix must be SPD"));
}

double regularized_local_kernel(const Eigen::Ref<const Eigen::VectorXd>& x,
                                const Eigen::Ref<const Eigen::VectorXd>& y, double epsilon,
                                const Eigen::Ref<const Eigen::MatrixXd>& diffusion_hat,
                                const Eigen::Ref<const Eigen::VectorXd>& drift_hat, double eta) {
  if (!(eta >= 0.0)) fail(ErrorKind::invalid_argument, "kernels", "eta must be nonnegative");
  Eigen::MatrixXd metric = diffusion_hat;
  metric.diagonal().array() += eta;
  return std::exp(-local_exponent(x, y, epsilon, metric, drift_hat, "increase eta"));
}

KernelMatrix build_kernel_matrix(const PointCloud& cloud, const KernelSpec& spec,
                                 const DriftDiffusionField* field) {
  spec.validate();
  const bool isotropic = spec.kind == KernelKind::isotropic;
  if (isotropic && field)
    fail(ErrorKind::invalid_argument, "kernels", "the isotropic kernel takes no drift/diffusion field");
  if (!isotropic && !field)
    fail(ErrorKind::invalid_argument, "kernels", "local kernels need a drift/diffusion field");
  if (field) field->validate(cloud);

  const std::size_t m = cloud.size();
  const std::size_t n = cloud.dim();
  const double eta = spec.kind == KernelKind::regularized_local ? spec.eta : 0.0;
  const char* hint = spec.kind == KernelKind::regularized_local ? "increase eta" : "the diffusion matrix must be SPD";
  const double* base = cloud.matrix().data();

  auto prepare_row = [&](RowExponent& row, std::size_t i) {
    if (isotropic) {
      row.set_isotropic(base + i * n);
      return;
    }
    Eigen::MatrixXd metric = field->diffusion[i];
    if (eta > 0.0) metric.diagonal().array() += eta;
    if (!row.set_local(base + i * n, field->drift.data() + i * n, metric, spec.epsilon))
      fail(ErrorKind::singular_diffusion, "kernels", "diffusion matrix is not positive definite at point", i, hint);
  };

  // Pass 1 counts the kept entries of each row; pass 2 writes them straight
  // into the compressed row storage.
  std::vector<Eigen::Index> row_counts(m, static_cast<Eigen::Index>(m));
  if (spec.cutoff) {
    const double cutoff = *spec.cutoff;
    detail::parallel_for(m, [&](std::size_t begin, std::size_t end) {
      RowExponent row(n, spec.epsilon);
      for (std::size_t i = begin; i < end; ++i) {
        prepare_row(row, i);
        Eigen::Index count = 0;
        for (std::size_t j = 0; j < m; ++j)
          if (j == i || row(base + j * n) <= cutoff) ++count;
        row_counts[i] = count;
      }
    });
  }

  KernelMatrix out;
  out.spec = spec;
  out.symmetric = isotropic;
  SparseRowMatrix& k = out.entries;
  k.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  Eigen::Index total = 0;
  for (auto c : row_counts) total += c;
  k.resizeNonZeros(total);
  auto* outer = k.outerIndexPtr();
  outer[0] = 0;
  for (std::size_t i = 0; i < m; ++i) outer[i + 1] = outer[i] + static_cast<int>(row_counts[i]);
  auto* inner = k.innerIndexPtr();
  auto* values = k.valuePtr();

  detail::parallel_for(m, [&](std::size_t begin, std::size_t end) {
    RowExponent row(n, spec.epsilon);
    for (std::size_t i = begin; i < end; ++i) {
      prepare_row(row, i);
      auto pos = outer[i];
      for (std::size_t j = 0; j < m; ++j) {
        const double e = row(base + j * n);
        if (spec.cutoff && j != i && e > *spec.cutoff) continue;
        inner[pos] = static_cast<int>(j);
        values[pos] = std::exp(-e);
        ++pos;
      }
    }
  });
  return out;
}

DensityEstimate kernel_density_estimate(const KernelMatrix& kernel) {
  if (!kernel.symmetric || kernel.spec.kind != KernelKind::isotropic)
    fail(ErrorKind::invalid_argument, "kernels",
         "density estimates must come from the isotropic kernel, not a drifted one");
  DensityEstimate q;
  q.epsilon = kernel.spec.epsilon;
  q.values = Eigen::VectorXd::Zero(kernel.entries.rows());
  for (Eigen::Index i = 0; i < kernel.entries.outerSize(); ++i) {
    double s = 0.0;
    for (SparseRowMatrix::InnerIterator it(kernel.entries, i); it; ++it) s += it.value();
    q.values[i] = s;
  }
  return q;
}

DensityEstimate isotropic_density(const PointCloud& cloud, double epsilon, std::optional<double> cutoff) {
  KernelSpec{KernelKind::isotropic, epsilon, 0.0, cutoff}.validate();
  const std::size_t m = cloud.size();
  const std::size_t n = cloud.dim();
  const double* base = cloud.matrix().data();
  DensityEstimate q;
  q.epsilon = epsilon;
  q.values.resize(static_cast<Eigen::Index>(m));
  detail::parallel_for(m, [&](std::size_t begin, std::size_t end) {
    RowExponent row(n, epsilon);
    for (std::size_t i = begin; i < end; ++i) {
      row.set_isotropic(base + i * n);
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double e = row(base + j * n);
        if (cutoff && j != i && e > *cutoff) continue;
        s += std::exp(-e);
      }
      q.values[static_cast<Eigen::Index>(i)] = s;
    }
  });
  return q;
}

double isotropic_kernel_sum(const PointCloud& cloud, double epsilon) {
  check_scale(epsilon);
  const std::size_t m = cloud.size();
  const std::size_t n = cloud.dim();
  const double* base = cloud.matrix().data();
  std::vector<double> partial(m, 0.0);
  detail::parallel_for(m, [&](std::size_t begin, std::size_t end) {
    RowExponent row(n, epsilon);
    for (std::size_t i = begin; i < end; ++i) {
      row.set_isotropic(base + i * n);
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += std::exp(-row(base + j * n));
      partial[i] = s;
    }
  });
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

}  // namespace gdmap
