#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "steinflow/dynamics.hpp"

namespace steinflow {

/// Raw `key = value` pairs from a config file (flat text, `#` comment lines).
struct ConfigMap {
  std::map<std::string, std::string> values;
};

ConfigMap parse_config_text(const std::string& text);
ConfigMap load_config_file(const std::string& path);

enum class PresetKind { Mixture1d, GaussDiag, OdeInverse, GpInfer };

struct PresetRef {
  PresetKind kind = PresetKind::Mixture1d;
  int d = 0;      // gauss-diag dimension
  int nx = 0, ny = 0;  // gp sizes
  std::string normalized;
};

enum class InitBandwidthKind { Median, Scalar, PerDimension };

/// Command-line adjustments applied before validation.
struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool desk = false;
  int jobs = 1;
};

/// A fully resolved experiment description: preset defaults filled, all
/// values validated, ready to execute.
struct RunSetup {
  PresetRef preset;
  int dim = 0;
  int m = 0;
  long nsteps = 0;
  std::uint64_t seed = 1;
  std::uint64_t data_seed = 0;  // fixes reference data independently of seed
  long log_every = 1;
  bool deterministic = true;
  std::vector<std::string> metrics;

  KernelFamily family = KernelFamily::Isotropic;
  int p = 2;
  InitBandwidthKind init_kind = InitBandwidthKind::Median;
  double init_h = 1.0;
  Eigen::VectorXd init_h_vec;

  MethodConfig method;
  ScheduleKind schedule = ScheduleKind::Fixed;
  double gamma = 0.1;
  double adagrad_alpha = 0.9;
  double adagrad_fudge = 1e-6;

  std::string out_dir = "out";

  bool is_sweep = false;
  std::string sweep_axis;  // bandwidth | m | dimension | seed
  std::vector<double> sweep_bandwidths;
  std::vector<long> sweep_counts;       // m axis
  std::vector<long> sweep_dims;         // dimension axis
  std::vector<std::uint64_t> sweep_seeds;  // seed axis
  std::vector<std::uint64_t> seeds;     // aggregation seeds for non-seed axes
};

/// Parses preset names: mixture1d, gauss-diag(d), ode-inverse, gp-infer(Nx,Ny).
PresetRef parse_preset(const std::string& name);

/// Validates and resolves a raw config. Reports every violation at once in a
/// single parameter_error.
RunSetup validate_config(const ConfigMap& raw, const CliOverrides& cli);

/// Normalized key/value echo in canonical order; feeding it back through
/// validate_config reproduces the same setup (the output directory is
/// deliberately not part of the echo).
std::vector<std::pair<std::string, std::string>> echo_config(const RunSetup& setup);

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

/// Human-readable list of built-in presets and their defaults.
std::string preset_listing();

}  // namespace steinflow
