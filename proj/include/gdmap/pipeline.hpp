#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gdmap {

enum class Command { sample, tmdmap, lkdmap, classic, estimate, oracle, sweep, preset };

const char* to_string(Command c) noexcept;
/// Throws invalid-argument on an unknown name.
Command command_from_string(const std::string& name);

/// Everything a run depends on. Scale parameters have no defaults: a
/// command that needs one and does not get it fails with a hint naming the
/// flag. Presets fill unset fields before the run and the expanded config is
/// what the manifest records.
struct RunConfig {
  Command command = Command::tmdmap;
  std::optional<std::string> preset;
  std::filesystem::path out_dir = ".";

  std::optional<std::filesystem::path> input;       // points CSV
  std::optional<std::filesystem::path> trajectory;  // trajectory CSV, dt from --dt
  std::optional<std::filesystem::path> field;       // per-point values CSV
  /// How to read --field: "pi", "energy" (needs beta) or "velocity".
  std::optional<std::string> field_kind;
  /// Built-in potential: double-well-2d, temperature-switch, ou-1d.
  std::optional<std::string> potential;

  std::optional<double> epsilon;
  std::optional<double> epsilon_tilde;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> eta;
  std::optional<double> tau;
  std::optional<double> radius;
  std::optional<double> dt;
  std::optional<double> cutoff;  // default_cutoff(m) when unset
  std::optional<std::size_t> k;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> samples;   // thinning target m
  std::optional<std::size_t> clusters;  // k-means on the embedding
  std::optional<std::size_t> grid;      // FD nodes per axis
  std::optional<std::uint64_t> seed;
  std::vector<double> x0;
  std::vector<double> box;  // lo_0, hi_0, lo_1, hi_1, ...
  /// TMDmap target inverse temperatures of the paper-6.2 preset; beta is
  /// then the sampling inverse temperature.
  std::vector<double> target_betas;

  std::optional<double> sweep_min;
  std::optional<double> sweep_max;
  std::optional<std::size_t> sweep_count;
};

/// Fills the fields a preset fixes ("paper-6.1", "paper-6.2") where unset.
void apply_preset(RunConfig& config);

/// The "config" object of a manifest.json written by run_pipeline.
RunConfig load_manifest(const std::filesystem::path& manifest);

/// Named scalar results of a run ("tmdmap.t1", "oracle.t1", ...) and wall
/// clock timings in seconds.
struct RunReport {
  std::map<std::string, double> values;
  std::map<std::string, double> timings;
  std::vector<std::filesystem::path> outputs;
};

/// Runs one command (or preset) and writes its CSV artifacts and
/// manifest.json into config.out_dir.
RunReport run_pipeline(const RunConfig& config);

}  // namespace gdmap
