#include "gdmap/estimators.hpp"

#include "gdmap/detail/parallel.hpp"
#include "gdmap/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <vector>

namespace gdmap {

namespace {

constexpr const char* kModule = "estimators";

// Moments of a set of displacement vectors, accumulated in one pass each.
KramersMoyalEstimate from_displacements(const RowMatrix& d, double tau) {
  const Eigen::Index n = d.rows();
  const Eigen::Index dim = d.cols();
  KramersMoyalEstimate out;
  out.samples = static_cast<std::size_t>(n);
  const Eigen::RowVectorXd mean = d.colwise().mean();
  const RowMatrix c = d.rowwise() - mean;
  Eigen::MatrixXd cov = (c.transpose() * c) / static_cast<double>(n - 1);
  cov = 0.5 * (cov + cov.transpose());
  out.drift = mean.transpose() / tau;
  out.diffusion = cov / (2.0 * tau);
  // Standard error of a covariance entry: sqrt((E[c_a^2 c_b^2] - s_ab^2) / n).
  double worst = 0.0;
  for (Eigen::Index a = 0; a < dim; ++a)
    for (Eigen::Index b = a; b < dim; ++b) {
      const double m4 = (c.col(a).array().square() * c.col(b).array().square()).mean();
      const double s = (c.col(a).array() * c.col(b).array()).mean();
      const double var = std::max(m4 - s * s, 0.0) / static_cast<double>(n);
      worst = std::max(worst, std::sqrt(var) / (2.0 * tau));
    }
  out.standard_error = worst;
  return out;
}

struct CellHash {
  std::size_t operator()(const std::vector<long>& key) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (long k : key) h = (h ^ static_cast<std::size_t>(k)) * 1099511628211ull;
    return h;
  }
};

}  // namespace

KramersMoyalEstimate km_from_bursts(const BurstEnsemble& ensemble) {
  const Eigen::Index n = ensemble.endpoints.rows();
  if (n < 2)
    fail(ErrorKind::insufficient_samples, kModule, fmt::format("a burst ensemble needs >= 2 endpoints, got {}", n));
  if (!(ensemble.tau > 0.0) || !std::isfinite(ensemble.tau))
    fail(ErrorKind::invalid_argument, kModule, fmt::format("tau must be positive, got {}", ensemble.tau));
  if (ensemble.start.size() != ensemble.endpoints.cols() || ensemble.start.size() == 0)
    fail(ErrorKind::invalid_argument, kModule, "start and endpoints must share the dimension");
  if (!ensemble.start.allFinite() || !ensemble.endpoints.allFinite())
    fail(ErrorKind::invalid_argument, kModule, "non-finite burst data");
  const RowMatrix d = ensemble.endpoints.rowwise() - ensemble.start.transpose();
  return from_displacements(d, ensemble.tau);
}

DriftDiffusionField km_from_trajectory(const TrajectoryData& trajectory, const PointCloud& queries, double radius,
                                       double tau, std::optional<double> eta) {
  trajectory.validate();
  if (!(radius > 0.0) || !std::isfinite(radius))
    fail(ErrorKind::invalid_argument, kModule, fmt::format("radius must be positive, got {}", radius));
  if (!(tau > 0.0) || !std::isfinite(tau))
    fail(ErrorKind::invalid_argument, kModule, fmt::format("tau must be positive, got {}", tau));
  const double ratio = tau / trajectory.dt;
  const auto lag = static_cast<Eigen::Index>(std::llround(ratio));
  if (lag < 1 || std::abs(static_cast<double>(lag) * trajectory.dt - tau) > 1e-9 * tau)
    fail(ErrorKind::invalid_argument, kModule,
         fmt::format("tau = {} is not a multiple of the frame spacing dt = {}", tau, trajectory.dt));
  if (queries.dim() != trajectory.dim())
    fail(ErrorKind::invalid_argument, kModule, "queries and trajectory differ in dimension");
  if (eta && (!(*eta >= 0.0) || !std::isfinite(*eta)))
    fail(ErrorKind::invalid_argument, kModule, "eta must be nonnegative");

  const Eigen::Index n = static_cast<Eigen::Index>(trajectory.dim());
  const Eigen::Index usable = static_cast<Eigen::Index>(trajectory.size()) - lag;
  if (usable < 1) fail(ErrorKind::insufficient_samples, kModule, "trajectory is shorter than the lag");
  const RowMatrix& z = trajectory.frames;
  const double r2 = radius * radius;

  // Bucket frames into cells of side radius; a query only scans the 3^N
  // surrounding cells. Beyond a few dimensions a plain scan is cheaper.
  const bool bucketed = n <= 4;
  std::unordered_map<std::vector<long>, std::vector<Eigen::Index>, CellHash> cells;
  auto cell_of = [&](const auto& row) {
    std::vector<long> key(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) key[static_cast<std::size_t>(k)] = static_cast<long>(std::floor(row[k] / radius));
    return key;
  };
  if (bucketed)
    for (Eigen::Index t = 0; t < usable; ++t) cells[cell_of(z.row(t))].push_back(t);

  const std::size_t m = queries.size();
  DriftDiffusionField field;
  field.drift.resize(static_cast<Eigen::Index>(m), n);
  field.diffusion.assign(m, Eigen::MatrixXd::Zero(n, n));
  Eigen::VectorXd stderr_values(static_cast<Eigen::Index>(m));

  detail::parallel_for(m, [&](std::size_t begin, std::size_t end) {
    std::vector<Eigen::Index> hits;
    for (std::size_t i = begin; i < end; ++i) {
      const auto q = queries.point(i);
      hits.clear();
      auto consider = [&](Eigen::Index t) {
        if ((z.row(t).transpose() - q).squaredNorm() <= r2) hits.push_back(t);
      };
      if (bucketed) {
        const auto base = cell_of(q);
        std::vector<long> key(base);
        const long total = static_cast<long>(std::pow(3.0, static_cast<double>(n)));
        for (long code = 0; code < total; ++code) {
          long c = code;
          for (Eigen::Index k = 0; k < n; ++k) {
            key[static_cast<std::size_t>(k)] = base[static_cast<std::size_t>(k)] + (c % 3) - 1;
            c /= 3;
          }
          const auto it = cells.find(key);
          if (it == cells.end()) continue;
          for (Eigen::Index t : it->second) consider(t);
        }
        std::sort(hits.begin(), hits.end());
      } else {
        for (Eigen::Index t = 0; t < usable; ++t) consider(t);
      }
      if (static_cast<Eigen::Index>(hits.size()) < n + 1)
        fail(ErrorKind::insufficient_samples, kModule,
             fmt::format("query has {} trajectory neighbors within radius {}; need >= {}", hits.size(), radius, n + 1),
             i, "increase the radius or the trajectory length");
      RowMatrix d(static_cast<Eigen::Index>(hits.size()), n);
      for (std::size_t h = 0; h < hits.size(); ++h)
        d.row(static_cast<Eigen::Index>(h)) = z.row(hits[h] + lag) - z.row(hits[h]);
      const KramersMoyalEstimate e = from_displacements(d, tau);
      field.drift.row(static_cast<Eigen::Index>(i)) = e.drift.transpose();
      field.diffusion[i] = e.diffusion;
      stderr_values[static_cast<Eigen::Index>(i)] = e.standard_error;
    }
  });

  field.provenance = Provenance::estimated;
  field.tau = tau;
  if (eta) {
    field.eta = *eta;
  } else {
    std::vector<double> s(stderr_values.data(), stderr_values.data() + stderr_values.size());
    const auto mid = s.begin() + static_cast<std::ptrdiff_t>(s.size() / 2);
    std::nth_element(s.begin(), mid, s.end());
    double med = *mid;
    if (s.size() % 2 == 0) med = 0.5 * (med + *std::max_element(s.begin(), mid));
    field.eta = med;
  }
  field.diffusion_stderr = std::move(stderr_values);
  return field;
}

}  // namespace gdmap
