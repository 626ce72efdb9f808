#include "gdmap/pipeline.hpp"

#include "gdmap/errors.hpp"
#include "gdmap/estimators.hpp"
#include "gdmap/io.hpp"
#include "gdmap/kernels.hpp"
#include "gdmap/lkdmap.hpp"
#include "gdmap/reference.hpp"
#include "gdmap/spectral.hpp"
#include "gdmap/tmdmap.hpp"

#include <Eigen/Core>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#ifndef GDMAP_VERSION
#define GDMAP_VERSION "0.0.0"
#endif

namespace gdmap {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr const char* kModule = "cli";

template <class T>
T need(const std::optional<T>& v, const char* flag, const char* what) {
  if (!v) fail(ErrorKind::invalid_argument, kModule, fmt::format("{} requires {}", what, flag), std::nullopt,
               fmt::format("pass {} explicitly; scale parameters have no defaults", flag));
  return *v;
}

Potential make_potential(const std::string& name) {
  if (name == "double-well-2d") return Potential::double_well_2d();
  if (name == "temperature-switch") return Potential::temperature_switch();
  if (name == "ou-1d") return Potential::ou_1d();
  fail(ErrorKind::invalid_argument, kModule, fmt::format("unknown potential '{}'", name), std::nullopt,
       "use double-well-2d, temperature-switch or ou-1d");
}

Box make_box(const std::vector<double>& flat, std::size_t dim) {
  if (flat.size() != 2 * dim)
    fail(ErrorKind::invalid_argument, kModule,
         fmt::format("--box needs {} numbers (lo,hi per axis), got {}", 2 * dim, flat.size()), std::nullopt,
         "pass --box lo0 hi0 lo1 hi1 ...");
  Box box;
  for (std::size_t a = 0; a < dim; ++a) box.bounds.emplace_back(flat[2 * a], flat[2 * a + 1]);
  return box;
}

std::vector<std::string> numbered(const char* prefix, std::size_t n) {
  std::vector<std::string> h;
  for (std::size_t i = 0; i < n; ++i) h.push_back(fmt::format("{}{}", prefix, i));
  return h;
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

struct Run {
  const RunConfig& cfg;
  RunReport report;
  json inputs = json::array();
  json effective = json::object();
  json units = json::object();

  void time(const std::string& name, double s) {
    report.timings[name] = s;
    spdlog::info("{}: {:.2f} s", name, s);
  }
  void wrote(const fs::path& p) { report.outputs.push_back(p); }
  void record_input(const CsvTable& t, const char* role) {
    json in;
    in["role"] = role;
    in["path"] = t.source.string();
    in["rows"] = t.values.rows();
    in["columns"] = t.values.cols();
    in["header_detected"] = t.has_header;
    if (t.has_header) in["header"] = t.header;
    inputs.push_back(in);
  }
  void csv(const fs::path& p, const RowMatrix& v, const std::vector<std::string>& header) {
    write_csv(p, v, header);
    wrote(p);
  }
};

double effective_cutoff(Run& run, std::size_t m) {
  const double c = run.cfg.cutoff.value_or(default_cutoff(m));
  run.effective["cutoff"] = c;
  return c;
}

double timescale(double re) { return re < 0.0 ? -1.0 / re : std::numeric_limits<double>::infinity(); }

void write_spectrum(Run& run, const fs::path& dir, const SpectralResult& s) {
  const auto k = static_cast<Eigen::Index>(s.count());
  RowMatrix vals(k, 5);
  bool complex_modes = false;
  for (Eigen::Index n = 0; n < k; ++n) {
    vals(n, 0) = static_cast<double>(n);
    vals(n, 1) = s.eigenvalues[n].real();
    vals(n, 2) = s.eigenvalues[n].imag();
    vals(n, 3) = s.residuals[n];
    // lambda_0 is the stationary mode; its time scale is infinite by definition.
    vals(n, 4) = n == 0 ? std::numeric_limits<double>::infinity() : timescale(s.eigenvalues[n].real());
    complex_modes = complex_modes || !s.near_real(static_cast<std::size_t>(n));
  }
  run.csv(dir / "eigenvalues.csv", vals, {"index", "re", "im", "residual", "timescale"});
  run.csv(dir / "eigenvectors.csv", s.right_vectors.real(), numbered("psi_", s.count()));
  if (complex_modes) run.csv(dir / "eigenvectors_imag.csv", s.right_vectors.imag(), numbered("psi_", s.count()));
}

void cluster(Run& run, const fs::path& dir, const SpectralResult& s, bool allow_complex) {
  if (!run.cfg.clusters) return;
  const auto c = *run.cfg.clusters;
  const auto seed = need(run.cfg.seed, "--seed", "clustering");
  Stopwatch sw;
  const auto emb = diffusion_embedding(s, s.count() - 1, allow_complex);
  const auto km = kmeans_cluster(emb.coordinates, c, seed);
  RowMatrix labels(static_cast<Eigen::Index>(km.labels.size()), 1);
  for (std::size_t i = 0; i < km.labels.size(); ++i) labels(static_cast<Eigen::Index>(i), 0) = km.labels[i];
  run.csv(dir / "labels.csv", labels, {"label"});
  run.report.values["kmeans.inertia"] = km.inertia;
  run.time("kmeans", sw.seconds());
}

void report_timescales(Run& run, const std::string& prefix, const SpectralResult& s) {
  for (std::size_t n = 1; n < s.count(); ++n)
    run.report.values[fmt::format("{}.t{}", prefix, n)] = timescale(s.eigenvalues[static_cast<Eigen::Index>(n)].real());
  run.report.values[prefix + ".max_residual"] = s.residuals.maxCoeff();
}

PointCloud load_points(Run& run) {
  CsvTable info;
  auto cloud = ingest_points(need(run.cfg.input, "--input", to_string(run.cfg.command)), &info);
  run.record_input(info, "points");
  return cloud;
}

// --- commands -------------------------------------------------------------

struct Sampled {
  TrajectoryData trajectory;
  std::optional<PointCloud> cloud;
};

Sampled do_sample(Run& run, const fs::path& dir, bool write_trajectory) {
  const auto& c = run.cfg;
  const auto U = make_potential(need(c.potential, "--potential", "sample"));
  const double beta = need(c.beta, "--beta", "sample");
  const double dt = need(c.dt, "--dt", "sample");
  const auto steps = need(c.steps, "--steps", "sample");
  const auto seed = need(c.seed, "--seed", "sample");
  if (c.x0.size() != U.dim())
    fail(ErrorKind::invalid_argument, kModule, fmt::format("--x0 needs {} coordinates", U.dim()), std::nullopt,
         "pass --x0 with one value per axis");
  Stopwatch sw;
  Eigen::VectorXd x0 = Eigen::Map<const Eigen::VectorXd>(c.x0.data(), static_cast<Eigen::Index>(c.x0.size()));
  Sampled out{euler_maruyama(Sde::overdamped_langevin(U, beta), x0, dt, steps, seed), std::nullopt};
  run.time("sample", sw.seconds());
  if (write_trajectory) run.csv(dir / "trajectory.csv", out.trajectory.frames, numbered("x_", U.dim()));
  if (c.samples) {
    out.cloud = thin(out.trajectory, *c.samples);
    run.effective["stride"] = out.trajectory.size() / *c.samples;
    run.csv(dir / "points.csv", out.cloud->matrix(), numbered("x_", U.dim()));
  }
  return out;
}

struct TmdmapOutput {
  SpectralResult spectrum;
  StationaryWeights weights;
  Eigen::VectorXd target;
  Eigen::VectorXd density;
};

TargetDensity target_for(const Run& run, const PointCloud& cloud, std::optional<double> beta) {
  const auto& c = run.cfg;
  if (c.potential) {
    const auto U = make_potential(*c.potential);
    return TargetDensity::from_energy(need(beta, "--beta", "tmdmap target"), U.values(cloud));
  }
  if (c.field) {
    const auto values = ingest_field(*c.field);
    if (static_cast<std::size_t>(values.rows()) != cloud.size() || values.cols() != 1)
      fail(ErrorKind::invalid_argument, kModule,
           fmt::format("--field must have {} rows and 1 column, has {} x {}", cloud.size(), values.rows(),
                       values.cols()));
    const auto kind = c.field_kind.value_or("pi");
    if (kind == "pi") return TargetDensity::from_values(values.col(0));
    if (kind == "energy") return TargetDensity::from_energy(need(beta, "--beta", "energy target"), values.col(0));
    fail(ErrorKind::invalid_argument, kModule, fmt::format("--field-kind '{}' is not a target", kind),
         std::nullopt, "use pi or energy");
  }
  fail(ErrorKind::invalid_target, kModule, "tmdmap needs a target density", std::nullopt,
       "pass --potential with --beta, or --field with --field-kind pi|energy");
}

TmdmapOutput do_tmdmap(Run& run, const PointCloud& cloud, const fs::path& dir, std::optional<double> beta,
                       const std::string& prefix) {
  const auto& c = run.cfg;
  const double eps = need(c.epsilon, "--epsilon", "tmdmap");
  const auto k = need(c.k, "--k", "tmdmap");
  const auto target = target_for(run, cloud, beta);
  Stopwatch sw;
  auto gen = build_tmdmap(cloud, target, eps, IsotropicOptions{effective_cutoff(run, cloud.size())});
  run.time(prefix + ".build", sw.seconds());
  sw = Stopwatch();
  auto spectrum = dominant_eigs(gen, k);
  run.time(prefix + ".eigs", sw.seconds());

  // q_eps is recovered from D = pi^{1/2} / q_eps exactly as it entered D.
  DensityEstimate density{target.values.cwiseSqrt().cwiseQuotient(gen.aux.right_scaling), eps};
  auto w = stationary_weights(gen, density);
  RowMatrix wt(static_cast<Eigen::Index>(cloud.size()), 4);
  wt.col(0) = w.phi0;
  wt.col(1) = w.pi_estimate;
  wt.col(2) = density.values / density.values.sum();
  wt.col(3) = target.values / target.values.sum();
  run.csv(dir / "weights.csv", wt, {"phi0", "pi_estimate", "q_eps", "pi_target"});
  write_spectrum(run, dir, spectrum);
  cluster(run, dir, spectrum, false);
  report_timescales(run, prefix, spectrum);
  run.report.values[prefix + ".pi_l1"] = (wt.col(1) - wt.col(3)).cwiseAbs().sum();
  run.report.values[prefix + ".q_l1"] = (wt.col(2) - wt.col(3)).cwiseAbs().sum();
  return {std::move(spectrum), std::move(w), target.values, density.values};
}

SpectralResult do_classic(Run& run, const PointCloud& cloud, const fs::path& dir) {
  const auto& c = run.cfg;
  const double alpha = need(c.alpha, "--alpha", "classic");
  const double eps = need(c.epsilon, "--epsilon", "classic");
  const auto k = need(c.k, "--k", "classic");
  Stopwatch sw;
  auto gen = build_classic_dmap(cloud, alpha, eps, IsotropicOptions{effective_cutoff(run, cloud.size())});
  run.time("classic.build", sw.seconds());
  sw = Stopwatch();
  auto spectrum = dominant_eigs(gen, k);
  run.time("classic.eigs", sw.seconds());
  write_spectrum(run, dir, spectrum);
  cluster(run, dir, spectrum, false);
  report_timescales(run, "classic", spectrum);
  return spectrum;
}

DriftDiffusionField lkdmap_field(Run& run, const PointCloud& cloud) {
  const auto& c = run.cfg;
  DriftDiffusionField field;
  if (c.potential) {
    const auto U = make_potential(*c.potential);
    const double beta = need(c.beta, "--beta", "lkdmap with --potential");
    field = DriftDiffusionField::constant_diffusion(
        -U.gradients(cloud), Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(cloud.dim()),
                                                       static_cast<Eigen::Index>(cloud.dim())) / beta);
    run.effective["field"] = "analytic: b = -grad U, A = I / beta";
  } else if (c.field && c.field_kind.value_or("") == "velocity") {
    CsvTable info;
    const auto v = ingest_field(*c.field, &info);
    run.record_input(info, "velocity");
    field = apply_velocity_field(cloud, v, 1.0 / need(c.beta, "--beta", "lkdmap with a velocity field"));
    run.effective["field"] = "velocity: b = v, A = I / beta";
  } else if (c.trajectory) {
    CsvTable info;
    const auto traj = ingest_trajectory(*c.trajectory, need(c.dt, "--dt", "lkdmap from a trajectory"), &info);
    run.record_input(info, "trajectory");
    Stopwatch sw;
    field = km_from_trajectory(traj, cloud, need(c.radius, "--radius", "lkdmap from a trajectory"),
                               need(c.tau, "--tau", "lkdmap from a trajectory"), c.eta);
    run.time("estimate", sw.seconds());
    run.effective["field"] = "Kramers-Moyal estimate";
  } else {
    fail(ErrorKind::invalid_argument, kModule, "lkdmap needs drift and diffusion", std::nullopt,
         "pass --potential with --beta, --field with --field-kind velocity, or --trajectory with --dt --tau --radius");
  }
  if (c.eta) field.eta = *c.eta;
  run.effective["eta"] = field.eta;
  return field;
}

SpectralResult do_lkdmap(Run& run, const PointCloud& cloud, const fs::path& dir) {
  const auto& c = run.cfg;
  const double eps = need(c.epsilon, "--epsilon", "lkdmap");
  const double eps_t = need(c.epsilon_tilde, "--epsilon-tilde", "lkdmap");
  const auto k = need(c.k, "--k", "lkdmap");
  const auto field = lkdmap_field(run, cloud);
  Stopwatch sw;
  SpectralResult spectrum;
  {
    auto pair = build_lkdmap(cloud, field, eps, eps_t, LocalOptions{effective_cutoff(run, cloud.size())});
    pair.forward = GeneratorMatrix{};  // only the backward spectrum is needed here
    run.time("lkdmap.build", sw.seconds());
    sw = Stopwatch();
    spectrum = dominant_eigs(pair.backward, k);
    run.time("lkdmap.eigs", sw.seconds());
  }
  write_spectrum(run, dir, spectrum);
  cluster(run, dir, spectrum, true);
  report_timescales(run, "lkdmap", spectrum);
  return spectrum;
}

void do_estimate(Run& run, const fs::path& dir) {
  const auto& c = run.cfg;
  CsvTable info;
  const auto traj = ingest_trajectory(need(c.trajectory, "--trajectory", "estimate"),
                                      need(c.dt, "--dt", "estimate"), &info);
  run.record_input(info, "trajectory");
  const PointCloud queries = c.input ? load_points(run) : thin(traj, need(c.samples, "--input or --samples", "estimate"));
  Stopwatch sw;
  const auto f = km_from_trajectory(traj, queries, need(c.radius, "--radius", "estimate"), need(c.tau, "--tau", "estimate"),
                                    c.eta);
  run.time("estimate", sw.seconds());
  const auto n = static_cast<Eigen::Index>(queries.dim());
  RowMatrix out(static_cast<Eigen::Index>(queries.size()), 2 * n + n * n + 1);
  std::vector<std::string> header = numbered("x_", queries.dim());
  for (auto& h : numbered("b_", queries.dim())) header.push_back(h);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) header.push_back(fmt::format("a_{}{}", a, b));
  header.push_back("stderr");
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    out.row(i).head(n) = queries.point(static_cast<std::size_t>(i));
    out.row(i).segment(n, n) = f.drift.row(i);
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b) out(i, 2 * n + a * n + b) = f.diffusion[static_cast<std::size_t>(i)](a, b);
    out(i, 2 * n + n * n) = (*f.diffusion_stderr)[i];
  }
  run.csv(dir / "field.csv", out, header);
  run.effective["eta"] = f.eta;
}

FDSpectrum do_oracle(Run& run, const fs::path& dir, std::optional<double> beta_override, const std::string& prefix) {
  const auto& c = run.cfg;
  const auto U = make_potential(need(c.potential, "--potential", "oracle"));
  const double beta = beta_override ? *beta_override : need(c.beta, "--beta", "oracle");
  const auto box = make_box(c.box, U.dim());
  const auto n = need(c.grid, "--grid", "oracle");
  const auto k = need(c.k, "--k", "oracle");
  Stopwatch sw;
  const auto op = fd_generator(U, beta, box, n);
  const auto s = fd_spectrum(op, k);
  run.time(prefix + ".fd", sw.seconds());
  const auto kk = s.eigenvalues.size();
  RowMatrix vals(kk, 5);
  for (Eigen::Index i = 0; i < kk; ++i) {
    vals(i, 0) = static_cast<double>(i);
    vals(i, 1) = s.eigenvalues[i];
    vals(i, 2) = 0.0;
    vals(i, 3) = s.residuals[i];
    vals(i, 4) = timescale(i == 0 ? 0.0 : s.eigenvalues[i]);
  }
  run.csv(dir / "eigenvalues.csv", vals, {"index", "re", "im", "residual", "timescale"});
  run.csv(dir / "nodes.csv", op.nodes(), numbered("x_", U.dim()));
  run.csv(dir / "eigenvectors.csv", s.eigenvectors, numbered("psi_", static_cast<std::size_t>(kk)));
  for (Eigen::Index i = 1; i < kk; ++i) run.report.values[fmt::format("{}.t{}", prefix, i)] = timescale(s.eigenvalues[i]);
  run.report.values[prefix + ".boundary_mass"] = s.boundary_mass;
  return s;
}

void do_sweep(Run& run, const fs::path& dir) {
  const auto& c = run.cfg;
  const double lo = need(c.sweep_min, "--sweep-min", "sweep");
  const double hi = need(c.sweep_max, "--sweep-max", "sweep");
  const auto count = need(c.sweep_count, "--sweep-count", "sweep");
  if (!(lo > 0.0) || !(hi > lo) || count < 2)
    fail(ErrorKind::invalid_argument, kModule, "sweep needs 0 < --sweep-min < --sweep-max and --sweep-count >= 2");
  const auto cloud = load_points(run);
  Stopwatch sw;
  RowMatrix out(static_cast<Eigen::Index>(count), 5);
  for (std::size_t i = 0; i < count; ++i) {
    const double eps = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(count - 1));
    const double s = isotropic_kernel_sum(cloud, eps);
    out.row(static_cast<Eigen::Index>(i)) << eps, s, std::log(eps), std::log(s), 0.0;
  }
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const Eigen::Index a = i == 0 ? 0 : i - 1;
    const Eigen::Index b = i + 1 == out.rows() ? i : i + 1;
    out(i, 4) = (out(b, 3) - out(a, 3)) / (out(b, 2) - out(a, 2));
  }
  run.time("sweep", sw.seconds());
  run.csv(dir / "sweep.csv", out, {"epsilon", "kernel_sum", "log_epsilon", "log_kernel_sum", "slope"});
}

// --- presets ----------------------------------------------------------------

void run_paper_61(Run& run, const fs::path& dir) {
  const auto sampled = do_sample(run, dir, false);
  const auto& cloud = *sampled.cloud;
  const double beta = *run.cfg.beta;
  const auto tmd = do_tmdmap(run, cloud, dir / "tmdmap", beta, "tmdmap");
  const auto classic = do_classic(run, cloud, dir / "classic");
  const auto lk = do_lkdmap(run, cloud, dir / "lkdmap");
  const auto fd = do_oracle(run, dir / "oracle", std::nullopt, "oracle");

  const Eigen::Index k = static_cast<Eigen::Index>(*run.cfg.k);
  RowMatrix table(k - 1, 6);
  for (Eigen::Index n = 1; n < k; ++n) {
    auto t = [&](const Eigen::VectorXcd& ev) { return n < ev.size() ? timescale(ev[n].real()) : NAN; };
    const double t_lk = t(lk.eigenvalues);
    table.row(n - 1) << static_cast<double>(n), n < fd.eigenvalues.size() ? timescale(fd.eigenvalues[n]) : NAN,
        t(tmd.spectrum.eigenvalues), t(classic.eigenvalues), t_lk, t_lk / beta;
    run.report.values[fmt::format("lkdmap.t{}_rescaled", n)] = t_lk / beta;
  }
  run.csv(dir / "timescales.csv", table, {"mode", "oracle", "tmdmap", "classic", "lkdmap", "lkdmap_rescaled"});
  run.units["tmdmap"] = "time of Delta - beta grad U . grad (beta-scaled)";
  run.units["classic"] = "time of Delta - beta grad U . grad (beta-scaled)";
  run.units["oracle"] = "time of Delta - beta grad U . grad (beta-scaled)";
  run.units["lkdmap"] = "physical time of the SDE; lkdmap_rescaled = lkdmap / beta";
}

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd x = a.array() - a.mean();
  const Eigen::VectorXd y = b.array() - b.mean();
  return x.dot(y) / std::sqrt(x.squaredNorm() * y.squaredNorm());
}

void run_paper_62(Run& run, const fs::path& dir) {
  const auto sampled = do_sample(run, dir, false);
  const auto& cloud = *sampled.cloud;
  const auto m = static_cast<Eigen::Index>(cloud.size());
  RowMatrix psi(m, 2 + static_cast<Eigen::Index>(run.cfg.target_betas.size()));
  psi.leftCols(2) = cloud.matrix();
  std::vector<std::string> header{"x_0", "x_1"};
  for (std::size_t b = 0; b < run.cfg.target_betas.size(); ++b) {
    const double beta = run.cfg.target_betas[b];
    const auto tag = fmt::format("beta{}", format_double(beta));
    const auto tmd = do_tmdmap(run, cloud, dir / tag, beta, tag);
    const Eigen::VectorXd psi1 = tmd.spectrum.real_vector(1);
    psi.col(2 + static_cast<Eigen::Index>(b)) = psi1;
    header.push_back("psi1_" + tag);
    const auto emb = diffusion_embedding(tmd.spectrum, std::min<std::size_t>(2, tmd.spectrum.count() - 1));
    run.csv(dir / tag / "embedding.csv", emb.coordinates, numbered("coord_", emb.modes.size()));
    run.report.values[tag + ".corr_x"] = pearson(psi1, cloud.matrix().col(0));
    run.report.values[tag + ".corr_y"] = pearson(psi1, cloud.matrix().col(1));
    if (run.cfg.grid) do_oracle(run, dir / tag / "oracle", beta, tag + ".oracle");
  }
  run.csv(dir / "psi1.csv", psi, header);
}

// --- manifest ---------------------------------------------------------------

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json config_json(const RunConfig& c) {
  json j;
  j["command"] = to_string(c.command);
  j["preset"] = opt(c.preset);
  j["out_dir"] = c.out_dir.string();
  auto path = [](const std::optional<fs::path>& p) { return p ? json(p->string()) : json(nullptr); };
  j["input"] = path(c.input);
  j["trajectory"] = path(c.trajectory);
  j["field"] = path(c.field);
  j["field_kind"] = opt(c.field_kind);
  j["potential"] = opt(c.potential);
  j["epsilon"] = opt(c.epsilon);
  j["epsilon_tilde"] = opt(c.epsilon_tilde);
  j["alpha"] = opt(c.alpha);
  j["beta"] = opt(c.beta);
  j["eta"] = opt(c.eta);
  j["tau"] = opt(c.tau);
  j["radius"] = opt(c.radius);
  j["dt"] = opt(c.dt);
  j["cutoff"] = opt(c.cutoff);
  j["k"] = opt(c.k);
  j["steps"] = opt(c.steps);
  j["samples"] = opt(c.samples);
  j["clusters"] = opt(c.clusters);
  j["grid"] = opt(c.grid);
  j["seed"] = opt(c.seed);
  j["x0"] = c.x0;
  j["box"] = c.box;
  j["target_betas"] = c.target_betas;
  j["sweep_min"] = opt(c.sweep_min);
  j["sweep_max"] = opt(c.sweep_max);
  j["sweep_count"] = opt(c.sweep_count);
  return j;
}

template <class T>
void read_opt(const json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key) && !j[key].is_null()) out = j[key].get<T>();
}

void read_path(const json& j, const char* key, std::optional<fs::path>& out) {
  if (j.contains(key) && !j[key].is_null()) out = fs::path(j[key].get<std::string>());
}

json versions() {
  json v;
  v["gdmap"] = GDMAP_VERSION;
  v["eigen"] = fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION);
  v["fmt"] = FMT_VERSION;
  v["spdlog"] = fmt::format("{}.{}.{}", SPDLOG_VER_MAJOR, SPDLOG_VER_MINOR, SPDLOG_VER_PATCH);
  v["nlohmann_json"] = fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR, NLOHMANN_JSON_VERSION_MINOR,
                                   NLOHMANN_JSON_VERSION_PATCH);
  v["compiler"] = __VERSION__;
  v["prng"] = "Philox4x32-10, key = seed, counter = (block, stream 0)";
  return v;
}

}  // namespace

const char* to_string(Command c) noexcept {
  switch (c) {
    case Command::sample: return "sample";
    case Command::tmdmap: return "tmdmap";
    case Command::lkdmap: return "lkdmap";
    case Command::classic: return "classic";
    case Command::estimate: return "estimate";
    case Command::oracle: return "oracle";
    case Command::sweep: return "sweep";
    case Command::preset: return "preset";
  }
  return "?";
}

Command command_from_string(const std::string& name) {
  for (auto c : {Command::sample, Command::tmdmap, Command::lkdmap, Command::classic, Command::estimate,
                 Command::oracle, Command::sweep, Command::preset})
    if (name == to_string(c)) return c;
  fail(ErrorKind::invalid_argument, kModule, fmt::format("unknown command '{}'", name));
}

void apply_preset(RunConfig& c) {
  if (!c.preset) return;
  auto set = [](auto& field, auto value) {
    if (!field) field = value;
  };
  if (*c.preset == "paper-6.1") {
    set(c.potential, std::string("double-well-2d"));
    set(c.beta, 6.0);
    set(c.dt, 0.03);
    set(c.steps, std::size_t{1000000});
    set(c.samples, std::size_t{10000});
    set(c.seed, std::uint64_t{1});
    set(c.epsilon, 0.05);
    set(c.epsilon_tilde, 0.05);
    set(c.alpha, 0.5);
    set(c.k, std::size_t{6});
    set(c.grid, kDoubleWellOracleGrid);
    if (c.x0.empty()) c.x0 = {-1.0, 0.0};
    if (c.box.empty())
      for (const auto& [lo, hi] : kDoubleWellOracleBox.bounds) c.box.insert(c.box.end(), {lo, hi});
  } else if (*c.preset == "paper-6.2") {
    set(c.potential, std::string("temperature-switch"));
    set(c.beta, 1.0);
    set(c.dt, 0.02);
    set(c.steps, std::size_t{50000});
    set(c.samples, std::size_t{5000});
    set(c.seed, std::uint64_t{1});
    set(c.epsilon, 0.2);
    set(c.k, std::size_t{4});
    set(c.grid, std::size_t{200});
    if (c.x0.empty()) c.x0 = {-1.0, -1.0};
    if (c.box.empty()) c.box = {-2.0, 2.0, -2.0, 2.0};
    if (c.target_betas.empty()) c.target_betas = {1.0, 2.0};
  } else {
    fail(ErrorKind::invalid_argument, kModule, fmt::format("unknown preset '{}'", *c.preset), std::nullopt,
         "use paper-6.1 or paper-6.2");
  }
  c.command = Command::preset;
}

RunConfig load_manifest(const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in) fail(ErrorKind::parse_error, kModule, fmt::format("cannot open {}", manifest.string()));
  json m;
  try {
    m = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::parse_error, kModule, fmt::format("{}: {}", manifest.string(), e.what()));
  }
  if (!m.contains("config")) fail(ErrorKind::parse_error, kModule, "manifest has no config object");
  const auto& j = m["config"];
  RunConfig c;
  c.command = command_from_string(j.at("command").get<std::string>());
  read_opt(j, "preset", c.preset);
  c.out_dir = j.at("out_dir").get<std::string>();
  read_path(j, "input", c.input);
  read_path(j, "trajectory", c.trajectory);
  read_path(j, "field", c.field);
  read_opt(j, "field_kind", c.field_kind);
  read_opt(j, "potential", c.potential);
  read_opt(j, "epsilon", c.epsilon);
  read_opt(j, "epsilon_tilde", c.epsilon_tilde);
  read_opt(j, "alpha", c.alpha);
  read_opt(j, "beta", c.beta);
  read_opt(j, "eta", c.eta);
  read_opt(j, "tau", c.tau);
  read_opt(j, "radius", c.radius);
  read_opt(j, "dt", c.dt);
  read_opt(j, "cutoff", c.cutoff);
  read_opt(j, "k", c.k);
  read_opt(j, "steps", c.steps);
  read_opt(j, "samples", c.samples);
  read_opt(j, "clusters", c.clusters);
  read_opt(j, "grid", c.grid);
  read_opt(j, "seed", c.seed);
  c.x0 = j.value("x0", std::vector<double>{});
  c.box = j.value("box", std::vector<double>{});
  c.target_betas = j.value("target_betas", std::vector<double>{});
  read_opt(j, "sweep_min", c.sweep_min);
  read_opt(j, "sweep_max", c.sweep_max);
  read_opt(j, "sweep_count", c.sweep_count);
  return c;
}

RunReport run_pipeline(const RunConfig& input_config) {
  RunConfig cfg = input_config;
  apply_preset(cfg);
  Run run{cfg, {}, {}, {}, {}};
  const fs::path dir = cfg.out_dir;
  fs::create_directories(dir);
  Stopwatch total;

  switch (cfg.command) {
    case Command::sample:
      do_sample(run, dir, true);
      break;
    case Command::tmdmap: {
      const auto cloud = load_points(run);
      do_tmdmap(run, cloud, dir, cfg.beta, "tmdmap");
      break;
    }
    case Command::classic: {
      const auto cloud = load_points(run);
      do_classic(run, cloud, dir);
      break;
    }
    case Command::lkdmap: {
      const auto cloud = load_points(run);
      do_lkdmap(run, cloud, dir);
      break;
    }
    case Command::estimate:
      do_estimate(run, dir);
      break;
    case Command::oracle:
      do_oracle(run, dir, std::nullopt, "oracle");
      break;
    case Command::sweep:
      do_sweep(run, dir);
      break;
    case Command::preset:
      if (!cfg.preset)
        fail(ErrorKind::invalid_argument, kModule, "preset command without a preset name", std::nullopt,
             "pass --preset paper-6.1 or paper-6.2");
      if (*cfg.preset == "paper-6.1") run_paper_61(run, dir);
      else run_paper_62(run, dir);
      break;
  }
  run.time("total", total.seconds());

  json m;
  m["versions"] = versions();
  m["config"] = config_json(cfg);
  m["effective"] = run.effective;
  m["inputs"] = run.inputs;
  if (!run.units.empty()) m["units"] = run.units;
  json results = json::object();
  for (const auto& [k, v] : run.report.values) results[k] = std::isfinite(v) ? json(v) : json(format_double(v));
  m["results"] = results;
  m["timings_seconds"] = run.report.timings;
  json outs = json::array();
  for (const auto& p : run.report.outputs) outs.push_back(fs::relative(p, dir).string());
  m["outputs"] = outs;
  const auto path = dir / "manifest.json";
  std::ofstream(path, std::ios::trunc) << m.dump(2) << '\n';
  run.report.outputs.push_back(path);
  return run.report;
}

}  // namespace gdmap
