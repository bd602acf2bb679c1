#include "steinflow/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "steinflow/common.hpp"

namespace steinflow {

namespace {

const std::vector<std::string> kAllMetrics = {
    "ksd2", "w1_1d", "bures_w2", "chi2", "marginal_var", "cov_trace", "bandwidths"};

const std::vector<std::string> kKnownKeys = {
    "preset", "m", "nsteps", "seed", "data_seed", "log_every", "deterministic",
    "metrics", "kernel_family", "p", "init_bandwidth", "method", "s", "nstepstheta",
    "paramupdate_every", "median_refresh_every", "median_norm", "variant",
    "param_space", "ksd_subsample", "schedule", "gamma", "adagrad_alpha",
    "adagrad_fudge", "out", "sweep_axis", "sweep_values", "seeds"};

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) out.push_back(trim(cur));
  if (!s.empty() && s.back() == ',') out.push_back("");
  return out;
}

class ErrorList {
 public:
  void add(const std::string& msg) { errors_.push_back(msg); }
  bool empty() const { return errors_.empty(); }
  [[noreturn]] void raise() const {
    std::string msg = "config validation failed:";
    for (const std::string& e : errors_) msg += "\n  - " + e;
    throw parameter_error(msg);
  }

 private:
  std::vector<std::string> errors_;
};

bool parse_double_token(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const char* b = t.data();
  const char* e = b + t.size();
  auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e && std::isfinite(out);
}

bool parse_long_token(const std::string& s, long& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const char* b = t.data();
  const char* e = b + t.size();
  auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e;
}

bool parse_u64_token(const std::string& s, std::uint64_t& out) {
  const std::string t = trim(s);
  if (t.empty() || t[0] == '-') return false;
  const char* b = t.data();
  const char* e = b + t.size();
  auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e;
}

// Typed getters over the merged key/value map; every failure lands in errs.
struct Fields {
  const std::map<std::string, std::string>& kv;
  ErrorList& errs;

  bool has(const std::string& key) const { return kv.count(key) > 0; }

  std::string str(const std::string& key, const std::string& fallback) const {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
  }

  double num(const std::string& key, double fallback) const {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    double v;
    if (!parse_double_token(it->second, v)) {
      errs.add(key + ": not a finite number: '" + it->second + "'");
      return fallback;
    }
    return v;
  }

  long integer(const std::string& key, long fallback) const {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    long v;
    if (!parse_long_token(it->second, v)) {
      errs.add(key + ": not an integer: '" + it->second + "'");
      return fallback;
    }
    return v;
  }

  std::uint64_t u64(const std::string& key, std::uint64_t fallback) const {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    std::uint64_t v;
    if (!parse_u64_token(it->second, v)) {
      errs.add(key + ": not an unsigned integer: '" + it->second + "'");
      return fallback;
    }
    return v;
  }

  bool onoff(const std::string& key, bool fallback) const {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    if (it->second == "on") return true;
    if (it->second == "off") return false;
    errs.add(key + ": expected on or off, got '" + it->second + "'");
    return fallback;
  }
};

std::vector<std::pair<std::string, std::string>> preset_defaults(const PresetRef& ref) {
  switch (ref.kind) {
    case PresetKind::Mixture1d:
      return {{"m", "500"},           {"nsteps", "10000"},
              {"p", "1"},             {"kernel_family", "isotropic"},
              {"init_bandwidth", "median"}, {"method", "adaptive"},
              {"s", "0.1"},           {"schedule", "fixed"},
              {"gamma", "1"},         {"metrics", "ksd2,w1_1d,bandwidths"}};
    case PresetKind::GaussDiag:
      return {{"m", "200"},           {"nsteps", "10000"},
              {"p", "1"},             {"kernel_family", "product"},
              {"init_bandwidth", "1"}, {"method", "adaptive"},
              {"s", "0.01"},          {"schedule", "adagrad"},
              {"gamma", "0.1"},       {"median_norm", "p"},
              {"metrics", "ksd2,chi2,marginal_var,cov_trace,bandwidths"}};
    case PresetKind::OdeInverse:
      return {{"m", "100"},           {"nsteps", "400000"},
              {"p", "1"},             {"kernel_family", "product"},
              {"init_bandwidth", "median"}, {"method", "adaptive"},
              {"s", "1e-5"},          {"paramupdate_every", "100"},
              {"schedule", "adagrad"}, {"gamma", "0.001"},
              {"median_norm", "p"},   {"param_space", "linear"},
              {"metrics", "ksd2,bures_w2,cov_trace,marginal_var,bandwidths"}};
    case PresetKind::GpInfer:
      return {{"m", "100"},           {"nsteps", "20000"},
              {"p", "1"},             {"kernel_family", "product"},
              {"init_bandwidth", "median"}, {"method", "adaptive"},
              {"s", "0.001"},         {"paramupdate_every", "10"},
              {"schedule", "adagrad"}, {"gamma", "0.03"},
              {"median_norm", "p"},
              {"metrics", "ksd2,bures_w2,cov_trace,bandwidths"}};
  }
  return {};
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap cfg;
  ErrorList errs;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos) {
      errs.add("line " + std::to_string(lineno) + ": expected 'key = value', got '" + t + "'");
      continue;
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      errs.add("line " + std::to_string(lineno) + ": empty key");
      continue;
    }
    if (cfg.values.count(key)) {
      errs.add("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
      continue;
    }
    cfg.values[key] = value;
  }
  if (!errs.empty()) errs.raise();
  return cfg;
}

ConfigMap load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parameter_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

PresetRef parse_preset(const std::string& name) {
  const std::string t = trim(name);
  PresetRef ref;
  auto parse_args = [&](const std::string& s, size_t open,
                        std::vector<int>& out) -> bool {
    if (s.back() != ')') return false;
    const std::string inner = s.substr(open + 1, s.size() - open - 2);
    for (const std::string& tok : split_list(inner)) {
      long v;
      if (!parse_long_token(tok, v) || v < 1 || v > 1000000) return false;
      out.push_back(static_cast<int>(v));
    }
    return !out.empty();
  };
  if (t == "mixture1d") {
    ref.kind = PresetKind::Mixture1d;
    ref.normalized = "mixture1d";
    return ref;
  }
  if (t == "ode-inverse") {
    ref.kind = PresetKind::OdeInverse;
    ref.normalized = "ode-inverse";
    return ref;
  }
  if (t.rfind("gauss-diag(", 0) == 0) {
    std::vector<int> args;
    if (parse_args(t, 10, args) && args.size() == 1 && args[0] <= 4096) {
      ref.kind = PresetKind::GaussDiag;
      ref.d = args[0];
      ref.normalized = "gauss-diag(" + std::to_string(args[0]) + ")";
      return ref;
    }
  }
  if (t.rfind("gp-infer(", 0) == 0) {
    std::vector<int> args;
    if (parse_args(t, 8, args) && args.size() == 2 && args[0] <= 4096 && args[1] <= 65536) {
      ref.kind = PresetKind::GpInfer;
      ref.nx = args[0];
      ref.ny = args[1];
      ref.normalized =
          "gp-infer(" + std::to_string(args[0]) + "," + std::to_string(args[1]) + ")";
      return ref;
    }
  }
  throw parameter_error(
      "unknown preset '" + t +
      "' (available: mixture1d, gauss-diag(d), ode-inverse, gp-infer(Nx,Ny))");
}

RunSetup validate_config(const ConfigMap& raw, const CliOverrides& cli) {
  ErrorList errs;

  for (const auto& [key, value] : raw.values) {
    (void)value;
    if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end())
      errs.add("unknown key '" + key + "'");
  }

  auto preset_it = raw.values.find("preset");
  if (preset_it == raw.values.end()) {
    errs.add("missing required key 'preset'");
    errs.raise();
  }
  PresetRef preset;
  try {
    preset = parse_preset(preset_it->second);
  } catch (const parameter_error& e) {
    errs.add(e.what());
    errs.raise();
  }

  // Merge: preset defaults under explicit user values.
  std::map<std::string, std::string> merged;
  for (const auto& [k, v] : preset_defaults(preset)) merged[k] = v;
  for (const auto& [k, v] : raw.values) merged[k] = v;
  if (cli.seed) merged["seed"] = std::to_string(*cli.seed);
  if (cli.out) merged["out"] = *cli.out;

  Fields f{merged, errs};
  RunSetup setup;
  setup.preset = preset;
  switch (preset.kind) {
    case PresetKind::Mixture1d: setup.dim = 1; break;
    case PresetKind::GaussDiag: setup.dim = preset.d; break;
    case PresetKind::OdeInverse: setup.dim = 16; break;
    case PresetKind::GpInfer: setup.dim = preset.nx; break;
  }

  setup.m = static_cast<int>(f.integer("m", 100));
  setup.nsteps = f.integer("nsteps", 1000);
  setup.seed = f.u64("seed", 1);
  setup.data_seed = f.u64("data_seed", 8675309);
  setup.deterministic = f.onoff("deterministic", true);
  setup.out_dir = f.str("out", "out");

  if (cli.desk) {
    setup.nsteps = std::max<long>(1, (setup.nsteps + 19) / 20);
    if (preset.kind == PresetKind::OdeInverse) setup.m = 50;
  }
  if (setup.m < 2) errs.add("m: need at least 2 particles");
  if (setup.nsteps < 0) errs.add("nsteps: must be non-negative");
  if (setup.out_dir.empty()) errs.add("out: must not be empty");

  setup.log_every = f.integer("log_every", std::max<long>(1, (setup.nsteps + 999) / 1000));
  if (setup.log_every < 1) errs.add("log_every: must be at least 1");

  // Metrics.
  const std::string metric_str = f.str("metrics", "ksd2,bandwidths");
  std::vector<std::string> requested;
  for (const std::string& tok : split_list(metric_str)) {
    if (tok.empty()) {
      errs.add("metrics: empty entry in list");
      continue;
    }
    if (std::find(kAllMetrics.begin(), kAllMetrics.end(), tok) == kAllMetrics.end()) {
      errs.add("metrics: unknown metric '" + tok + "'");
      continue;
    }
    if (std::find(requested.begin(), requested.end(), tok) != requested.end()) {
      errs.add("metrics: duplicate metric '" + tok + "'");
      continue;
    }
    requested.push_back(tok);
  }
  // Canonical order.
  for (const std::string& name : kAllMetrics)
    if (std::find(requested.begin(), requested.end(), name) != requested.end())
      setup.metrics.push_back(name);
  const bool is_gaussian_target = preset.kind != PresetKind::Mixture1d;
  for (const std::string& name : setup.metrics) {
    if (name == "w1_1d" && preset.kind != PresetKind::Mixture1d)
      errs.add("metrics: w1_1d needs a 1d target with an exact sampler (preset mixture1d)");
    if (name == "bures_w2" && !is_gaussian_target)
      errs.add("metrics: bures_w2 needs a Gaussian target with known moments");
    if (name == "chi2" && preset.kind != PresetKind::GaussDiag)
      errs.add("metrics: chi2 needs a centered diagonal Gaussian target (preset gauss-diag)");
  }

  // Kernel.
  const std::string family = f.str("kernel_family", "isotropic");
  if (family == "isotropic") {
    setup.family = KernelFamily::Isotropic;
  } else if (family == "product") {
    setup.family = KernelFamily::Product;
  } else {
    errs.add("kernel_family: expected isotropic or product, got '" + family + "'");
  }
  setup.p = static_cast<int>(f.integer("p", 2));
  if (setup.p != 1 && setup.p != 2) errs.add("p: kernel exponent must be 1 or 2");

  const std::string init_bw = f.str("init_bandwidth", "median");
  if (init_bw == "median") {
    setup.init_kind = InitBandwidthKind::Median;
    if (setup.m < 3) errs.add("init_bandwidth: the median rule needs m >= 3");
  } else {
    const std::vector<std::string> parts = split_list(init_bw);
    std::vector<double> vals;
    bool ok = !parts.empty();
    for (const std::string& tok : parts) {
      double v;
      if (!parse_double_token(tok, v) || v <= 0.0) {
        ok = false;
        break;
      }
      vals.push_back(v);
    }
    if (!ok) {
      errs.add("init_bandwidth: expected 'median', a positive number, or a "
               "comma-separated positive vector, got '" + init_bw + "'");
    } else if (vals.size() == 1) {
      setup.init_kind = InitBandwidthKind::Scalar;
      setup.init_h = vals[0];
    } else {
      setup.init_kind = InitBandwidthKind::PerDimension;
      if (setup.family != KernelFamily::Product)
        errs.add("init_bandwidth: a per-dimension vector needs kernel_family = product");
      else if (static_cast<int>(vals.size()) != setup.dim)
        errs.add("init_bandwidth: vector length " + std::to_string(vals.size()) +
                 " does not match the problem dimension " + std::to_string(setup.dim));
      setup.init_h_vec = Eigen::Map<const Eigen::VectorXd>(vals.data(),
                                                           static_cast<Eigen::Index>(vals.size()));
    }
  }

  // Method.
  const std::string method = f.str("method", "adaptive");
  if (method == "fixed") {
    setup.method.method = MethodKind::FixedBandwidth;
  } else if (method == "median") {
    setup.method.method = MethodKind::MedianHeuristic;
  } else if (method == "adaptive") {
    setup.method.method = MethodKind::Adaptive;
  } else {
    errs.add("method: expected fixed, median, or adaptive, got '" + method + "'");
  }
  if (setup.method.method == MethodKind::MedianHeuristic) {
    if (setup.family != KernelFamily::Isotropic)
      errs.add("method: the median heuristic drives one shared bandwidth "
               "(kernel_family = isotropic)");
    if (setup.m < 3) errs.add("method: the median heuristic needs m >= 3");
  }

  setup.method.s = f.num("s", 0.0);
  if (!(setup.method.s >= 0.0)) errs.add("s: ascent step size must be non-negative");
  setup.method.nstepstheta = static_cast<int>(f.integer("nstepstheta", 1));
  if (setup.method.nstepstheta < 1) errs.add("nstepstheta: must be at least 1");
  setup.method.paramupdate_every = f.integer("paramupdate_every", 1);
  if (setup.method.paramupdate_every < 1) errs.add("paramupdate_every: must be at least 1");
  setup.method.median_refresh_every = f.integer("median_refresh_every", 1);
  if (setup.method.median_refresh_every < 1)
    errs.add("median_refresh_every: must be at least 1");

  const std::string norm = f.str("median_norm", "euclidean");
  if (norm == "euclidean") {
    setup.method.median_norm = MedianNorm::Euclidean;
  } else if (norm == "p") {
    setup.method.median_norm = MedianNorm::PNorm;
  } else {
    errs.add("median_norm: expected euclidean or p, got '" + norm + "'");
  }

  const std::string variant = f.str("variant", "U");
  if (variant == "U" || variant == "u") {
    setup.method.variant = KsdVariant::U;
  } else if (variant == "V" || variant == "v") {
    setup.method.variant = KsdVariant::V;
    if (setup.p != 1 && setup.p != 2) {
      // p already reported
    } else if (setup.p != 2) {
      errs.add("variant: the V-statistic requires p = 2");
    }
  } else {
    errs.add("variant: expected U or V, got '" + variant + "'");
  }

  const std::string space = f.str("param_space", "log");
  if (space == "log") {
    setup.method.param_space = ParamSpace::Log;
  } else if (space == "linear") {
    setup.method.param_space = ParamSpace::Linear;
  } else {
    errs.add("param_space: expected log or linear, got '" + space + "'");
  }

  setup.method.ksd_subsample = static_cast<int>(f.integer("ksd_subsample", 0));
  if (setup.method.ksd_subsample < 0) {
    errs.add("ksd_subsample: must be non-negative (0 disables subsampling)");
  } else if (setup.method.ksd_subsample == 1) {
    errs.add("ksd_subsample: need at least 2 particles in the subsample");
  } else if (setup.method.ksd_subsample > setup.m) {
    errs.add("ksd_subsample: exceeds the particle count m");
  }

  // Schedule.
  const std::string schedule = f.str("schedule", "fixed");
  if (schedule == "fixed") {
    setup.schedule = ScheduleKind::Fixed;
  } else if (schedule == "adagrad") {
    setup.schedule = ScheduleKind::AdaGrad;
  } else {
    errs.add("schedule: expected fixed or adagrad, got '" + schedule + "'");
  }
  setup.gamma = f.num("gamma", 0.1);
  if (!(setup.gamma >= 0.0)) errs.add("gamma: step size must be non-negative");
  setup.adagrad_alpha = f.num("adagrad_alpha", 0.9);
  if (!(setup.adagrad_alpha >= 0.0 && setup.adagrad_alpha <= 1.0))
    errs.add("adagrad_alpha: must lie in [0, 1]");
  setup.adagrad_fudge = f.num("adagrad_fudge", 1e-6);
  if (!(setup.adagrad_fudge > 0.0)) errs.add("adagrad_fudge: must be positive");

  // Sweep keys.
  const bool has_axis = f.has("sweep_axis");
  const bool has_values = f.has("sweep_values");
  const bool has_seeds = f.has("seeds");
  setup.is_sweep = has_axis || has_values;
  if (has_values && !has_axis) errs.add("sweep_values: requires sweep_axis");
  if (has_seeds && !has_axis) errs.add("seeds: only meaningful for sweeps");
  if (has_axis) {
    setup.sweep_axis = f.str("sweep_axis", "");
    const std::string values = f.str("sweep_values", "");
    if (!has_values || values.empty()) {
      errs.add("sweep_values: a sweep needs a non-empty value list");
    } else {
      const std::vector<std::string> toks = split_list(values);
      if (setup.sweep_axis == "bandwidth") {
        for (const std::string& tok : toks) {
          double v;
          if (!parse_double_token(tok, v) || v <= 0.0)
            errs.add("sweep_values: bandwidths must be positive numbers ('" + tok + "')");
          else
            setup.sweep_bandwidths.push_back(v);
        }
      } else if (setup.sweep_axis == "m") {
        for (const std::string& tok : toks) {
          long v;
          if (!parse_long_token(tok, v) || v < 2)
            errs.add("sweep_values: particle counts must be integers >= 2 ('" + tok + "')");
          else
            setup.sweep_counts.push_back(v);
        }
        const bool needs3 = setup.method.method == MethodKind::MedianHeuristic ||
                            setup.init_kind == InitBandwidthKind::Median;
        for (long v : setup.sweep_counts)
          if (needs3 && v < 3)
            errs.add("sweep_values: m = " + std::to_string(v) +
                     " is too small for the median rule (needs 3)");
      } else if (setup.sweep_axis == "dimension") {
        if (preset.kind != PresetKind::GaussDiag)
          errs.add("sweep_axis: the dimension axis needs the gauss-diag preset");
        if (setup.init_kind == InitBandwidthKind::PerDimension)
          errs.add("sweep_axis: per-dimension init_bandwidth cannot vary with dimension");
        for (const std::string& tok : toks) {
          long v;
          if (!parse_long_token(tok, v) || v < 1 || v > 4096)
            errs.add("sweep_values: dimensions must be integers in [1, 4096] ('" + tok + "')");
          else
            setup.sweep_dims.push_back(v);
        }
      } else if (setup.sweep_axis == "seed") {
        for (const std::string& tok : toks) {
          std::uint64_t v;
          if (!parse_u64_token(tok, v))
            errs.add("sweep_values: seeds must be unsigned integers ('" + tok + "')");
          else
            setup.sweep_seeds.push_back(v);
        }
        if (has_seeds)
          errs.add("seeds: not allowed when the sweep axis is already seed");
      } else {
        errs.add("sweep_axis: expected bandwidth, m, dimension, or seed, got '" +
                 setup.sweep_axis + "'");
      }
    }
    if (has_seeds && setup.sweep_axis != "seed") {
      for (const std::string& tok : split_list(f.str("seeds", ""))) {
        std::uint64_t v;
        if (!parse_u64_token(tok, v))
          errs.add("seeds: must be unsigned integers ('" + tok + "')");
        else
          setup.seeds.push_back(v);
      }
      if (setup.seeds.empty()) errs.add("seeds: empty list");
    }
    if (setup.seeds.empty()) setup.seeds = {setup.seed};
  }

  if (!errs.empty()) errs.raise();
  return setup;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::pair<std::string, std::string>> echo_config(const RunSetup& setup) {
  std::vector<std::pair<std::string, std::string>> out;
  auto add = [&](const std::string& k, const std::string& v) { out.emplace_back(k, v); };

  add("preset", setup.preset.normalized);
  add("m", std::to_string(setup.m));
  add("nsteps", std::to_string(setup.nsteps));
  add("seed", std::to_string(setup.seed));
  add("data_seed", std::to_string(setup.data_seed));
  add("log_every", std::to_string(setup.log_every));
  add("deterministic", setup.deterministic ? "on" : "off");
  std::string metric_str;
  for (const std::string& name : setup.metrics) {
    if (!metric_str.empty()) metric_str += ",";
    metric_str += name;
  }
  add("metrics", metric_str);
  add("kernel_family", setup.family == KernelFamily::Isotropic ? "isotropic" : "product");
  add("p", std::to_string(setup.p));
  if (setup.init_kind == InitBandwidthKind::Median) {
    add("init_bandwidth", "median");
  } else if (setup.init_kind == InitBandwidthKind::Scalar) {
    add("init_bandwidth", format_double(setup.init_h));
  } else {
    std::string v;
    for (Eigen::Index i = 0; i < setup.init_h_vec.size(); ++i) {
      if (i) v += ",";
      v += format_double(setup.init_h_vec[i]);
    }
    add("init_bandwidth", v);
  }
  switch (setup.method.method) {
    case MethodKind::FixedBandwidth: add("method", "fixed"); break;
    case MethodKind::MedianHeuristic: add("method", "median"); break;
    case MethodKind::Adaptive: add("method", "adaptive"); break;
  }
  add("s", format_double(setup.method.s));
  add("nstepstheta", std::to_string(setup.method.nstepstheta));
  add("paramupdate_every", std::to_string(setup.method.paramupdate_every));
  add("median_refresh_every", std::to_string(setup.method.median_refresh_every));
  add("median_norm",
      setup.method.median_norm == MedianNorm::Euclidean ? "euclidean" : "p");
  add("variant", setup.method.variant == KsdVariant::U ? "U" : "V");
  add("param_space", setup.method.param_space == ParamSpace::Log ? "log" : "linear");
  add("ksd_subsample", std::to_string(setup.method.ksd_subsample));
  add("schedule", setup.schedule == ScheduleKind::Fixed ? "fixed" : "adagrad");
  add("gamma", format_double(setup.gamma));
  add("adagrad_alpha", format_double(setup.adagrad_alpha));
  add("adagrad_fudge", format_double(setup.adagrad_fudge));
  if (setup.is_sweep) {
    add("sweep_axis", setup.sweep_axis);
    std::string values;
    auto join_num = [&](const auto& vec, auto fmt) {
      std::string s;
      for (size_t i = 0; i < vec.size(); ++i) {
        if (i) s += ",";
        s += fmt(vec[i]);
      }
      return s;
    };
    if (setup.sweep_axis == "bandwidth")
      values = join_num(setup.sweep_bandwidths, [](double v) { return format_double(v); });
    else if (setup.sweep_axis == "m")
      values = join_num(setup.sweep_counts, [](long v) { return std::to_string(v); });
    else if (setup.sweep_axis == "dimension")
      values = join_num(setup.sweep_dims, [](long v) { return std::to_string(v); });
    else
      values = join_num(setup.sweep_seeds,
                        [](std::uint64_t v) { return std::to_string(v); });
    add("sweep_values", values);
    if (setup.sweep_axis != "seed") {
      std::string s;
      for (size_t i = 0; i < setup.seeds.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(setup.seeds[i]);
      }
      add("seeds", s);
    }
  }
  return out;
}

std::string preset_listing() {
  std::ostringstream out;
  const std::vector<std::string> names = {"mixture1d", "gauss-diag(d)", "ode-inverse",
                                          "gp-infer(Nx,Ny)"};
  const std::vector<std::string> blurbs = {
      "two-mode 1d Gaussian mixture (1/3) N(-2,1) + (2/3) N(2,1)",
      "centered Gaussian with marginal variances 1, 1/4, ..., 1/d^2",
      "source recovery for -f'' + f = u with a sine-basis prior (16 modes)",
      "sine-basis regression with Nx coefficients and Ny observations"};
  const std::vector<PresetRef> refs = {
      parse_preset("mixture1d"), parse_preset("gauss-diag(8)"),
      parse_preset("ode-inverse"), parse_preset("gp-infer(16,64)")};
  for (size_t i = 0; i < names.size(); ++i) {
    out << names[i] << "\n    " << blurbs[i] << "\n    defaults:";
    for (const auto& [k, v] : preset_defaults(refs[i])) out << " " << k << "=" << v;
    out << "\n";
  }
  return out.str();
}

}  // namespace steinflow
