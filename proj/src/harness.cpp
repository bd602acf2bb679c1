#include "steinflow/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "steinflow/common.hpp"
#include "steinflow/kernels.hpp"
#include "steinflow/metrics.hpp"

namespace steinflow {

namespace {

constexpr std::uint64_t kW1RefSalt = 0x57315245ULL;  // decorrelates the W1 reference stream
constexpr int kW1RefSize = 100000;

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += "\"";
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw parameter_error("cannot write file: " + path.string());
  out << content;
  if (!out) throw parameter_error("failed writing file: " + path.string());
}

std::string trace_csv_text(const RunRecord& rec) {
  std::string text = "iteration";
  for (const std::string& col : rec.columns) text += "," + col;
  text += "\n";
  for (size_t i = 0; i < rec.rows.size(); ++i) {
    text += std::to_string(rec.logged_iterations[i]);
    for (double v : rec.rows[i]) text += "," + format_double(v);
    text += "\n";
  }
  return text;
}

std::string particles_csv_text(const Ensemble& ens) {
  std::string text;
  for (int c = 0; c < ens.dim(); ++c) {
    if (c) text += ",";
    text += "x_" + std::to_string(c + 1);
  }
  text += "\n";
  for (int i = 0; i < ens.count(); ++i) {
    for (int c = 0; c < ens.dim(); ++c) {
      if (c) text += ",";
      text += format_double(ens.particles(i, c));
    }
    text += "\n";
  }
  return text;
}

double final_column(const RunRecord& rec, const std::string& name) {
  const auto it = std::find(rec.columns.begin(), rec.columns.end(), name);
  if (it == rec.columns.end() || rec.rows.empty())
    throw parameter_error("metric column missing from the trace: " + name);
  return rec.rows.back()[static_cast<size_t>(it - rec.columns.begin())];
}

nlohmann::ordered_json summary_json(const RunSetup& setup, const RunOutcome& outcome) {
  nlohmann::ordered_json j;
  j["preset"] = setup.preset.normalized;
  j["seed"] = setup.seed;
  j["status"] = outcome.ok ? "ok" : "error";
  if (!outcome.ok) {
    j["error"] = outcome.error;
    if (outcome.error_iteration >= 0) j["error_iteration"] = outcome.error_iteration;
  } else {
    const RunRecord& rec = outcome.record;
    j["iterations"] = rec.iterations;
    j["wall_ms"] = rec.wall_seconds * 1000.0;
    j["score_evaluations"] = rec.score_evaluations;
    std::vector<double> hs;
    for (int t = 0; t < rec.final_kernel.param_count(); ++t)
      hs.push_back(std::exp(rec.final_kernel.log_bandwidths[t]));
    j["final_bandwidths"] = hs;
    nlohmann::ordered_json fin;
    for (const std::string& name : setup.metrics) {
      if (name == "bandwidths") {
        fin[name] = hs;
      } else if (name == "marginal_var") {
        std::vector<double> vals;
        for (int c = 1;; ++c) {
          const std::string col = "marginal_var_" + std::to_string(c);
          if (std::find(rec.columns.begin(), rec.columns.end(), col) == rec.columns.end())
            break;
          vals.push_back(final_column(rec, col));
        }
        fin[name] = vals;
      } else {
        fin[name] = final_column(rec, name);
      }
    }
    j["final"] = fin;
    std::vector<std::string> trace_cols = {"iteration"};
    trace_cols.insert(trace_cols.end(), rec.columns.begin(), rec.columns.end());
    std::vector<std::string> particle_cols;
    for (int c = 0; c < rec.final_ensemble.dim(); ++c)
      particle_cols.push_back("x_" + std::to_string(c + 1));
    j["columns"]["trace"] = trace_cols;
    j["columns"]["final_particles"] = particle_cols;
  }
  nlohmann::ordered_json cfg;
  for (const auto& [k, v] : echo_config(setup)) cfg[k] = v;
  j["config"] = cfg;
  return j;
}

// One sweep row: the derived setup plus its result cells.
struct SweepRow {
  RunSetup setup;
  std::string axis_label;  // printed axis value
  bool ok = false;
  std::string status;
  std::map<std::string, double> scalars;
  Eigen::VectorXd marginals;
};

RunSetup derive_row(const RunSetup& base, const std::string& axis_label,
                    const std::string& axis, double bw, long count, long dim,
                    std::uint64_t seed) {
  (void)axis_label;
  RunSetup row = base;
  row.is_sweep = false;
  row.sweep_axis.clear();
  row.sweep_bandwidths.clear();
  row.sweep_counts.clear();
  row.sweep_dims.clear();
  row.sweep_seeds.clear();
  row.seeds.clear();
  row.seed = seed;
  if (axis == "bandwidth") {
    row.init_kind = InitBandwidthKind::Scalar;
    row.init_h = bw;
  } else if (axis == "m") {
    row.m = static_cast<int>(count);
  } else if (axis == "dimension") {
    row.preset.d = static_cast<int>(dim);
    row.preset.normalized = "gauss-diag(" + std::to_string(dim) + ")";
    row.dim = static_cast<int>(dim);
  }
  return row;
}

const std::vector<std::string> kScalarSweepMetrics = {"ksd2", "w1_1d", "bures_w2",
                                                      "chi2", "cov_trace"};

}  // namespace

TargetBundle build_target(const RunSetup& setup, Rng& run_rng) {
  TargetBundle bundle;
  switch (setup.preset.kind) {
    case PresetKind::Mixture1d: {
      const GaussianMixture gm = mixture1d();
      bundle.model = mixture_target(gm);
      bundle.init = sample_gaussian(run_rng, setup.m, Eigen::VectorXd::Zero(1),
                                    Eigen::VectorXd::Ones(1));
      const bool wants_w1 = std::find(setup.metrics.begin(), setup.metrics.end(),
                                      "w1_1d") != setup.metrics.end();
      if (wants_w1) {
        Rng ref_rng(setup.data_seed ^ kW1RefSalt);
        const Ensemble ref = sample_mixture(gm, ref_rng, kW1RefSize);
        auto sorted = std::make_shared<Eigen::VectorXd>(ref.particles.col(0));
        std::sort(sorted->data(), sorted->data() + sorted->size());
        bundle.w1_reference = std::move(sorted);
      }
      break;
    }
    case PresetKind::GaussDiag: {
      bundle.model = diag_gaussian_target(setup.preset.d);
      const double sd = 1.0 / std::sqrt(static_cast<double>(setup.preset.d));
      bundle.init = sample_gaussian(run_rng, setup.m,
                                    Eigen::VectorXd::Zero(setup.preset.d),
                                    Eigen::VectorXd::Constant(setup.preset.d, sd));
      bundle.target_moments = bundle.model.gaussian_info;
      break;
    }
    case PresetKind::OdeInverse: {
      Rng data_rng(setup.data_seed);
      const InverseProblem prob = build_ode_problem(OdeProblemSpec{}, data_rng);
      bundle.model = linear_gaussian_target(prob.inverse);
      // unit-normal start: the prior's leading modes (sd ~ 7) would leave all
      // methods with the same huge transit leftover at short step counts
      bundle.init = sample_gaussian(run_rng, setup.m, Eigen::VectorXd::Zero(16),
                                    Eigen::VectorXd::Ones(16));
      bundle.target_moments = bundle.model.gaussian_info;
      break;
    }
    case PresetKind::GpInfer: {
      Rng data_rng(setup.data_seed);
      GpProblemSpec spec;
      spec.n_x = setup.preset.nx;
      spec.n_y = setup.preset.ny;
      const InverseProblem prob = build_gp_problem(spec, data_rng);
      bundle.model = linear_gaussian_target(prob.inverse);
      bundle.init = sample_prior(prob.inverse, run_rng, setup.m);
      bundle.target_moments = bundle.model.gaussian_info;
      break;
    }
  }
  return bundle;
}

KernelSpec initial_kernel(const RunSetup& setup, const Ensemble& init) {
  double h0 = setup.init_h;
  if (setup.init_kind == InitBandwidthKind::Median)
    h0 = median_heuristic(init, setup.p, setup.method.median_norm);
  if (setup.family == KernelFamily::Isotropic) return KernelSpec::isotropic(setup.p, h0);
  if (setup.init_kind == InitBandwidthKind::PerDimension)
    return KernelSpec::product(setup.p, setup.init_h_vec);
  return KernelSpec::product(setup.p, Eigen::VectorXd::Constant(init.dim(), h0));
}

std::vector<NamedMetric> build_metrics(const RunSetup& setup, const TargetBundle& bundle) {
  std::vector<NamedMetric> out;
  for (const std::string& name : setup.metrics) {
    if (name == "ksd2" || name == "bandwidths") continue;  // always logged
    if (name == "w1_1d") {
      auto ref = bundle.w1_reference;
      if (!ref) throw parameter_error("w1_1d needs a reference sample");
      out.push_back(NamedMetric::scalar("w1_1d", [ref](const Ensemble& ens) {
        Eigen::VectorXd sorted = ens.particles.col(0);
        std::sort(sorted.data(), sorted.data() + sorted.size());
        return wasserstein1_1d(sorted, *ref);
      }));
    } else if (name == "bures_w2") {
      if (!bundle.target_moments)
        throw parameter_error("bures_w2 needs target moments");
      const GaussianInfo target = *bundle.target_moments;
      out.push_back(NamedMetric::scalar("bures_w2", [target](const Ensemble& ens) {
        const MomentSummary mom = moment_summary(ens);
        return bures_w2(mom.mean, mom.cov, target.mean, target.cov);
      }));
    } else if (name == "chi2") {
      if (!bundle.target_moments) throw parameter_error("chi2 needs target moments");
      const Eigen::VectorXd inv_diag =
          bundle.target_moments->cov.diagonal().cwiseInverse();
      out.push_back(NamedMetric::scalar("chi2", [inv_diag](const Ensemble& ens) {
        return chi2_statistic(ens, inv_diag);
      }));
    } else if (name == "marginal_var") {
      NamedMetric metric;
      for (int c = 1; c <= setup.dim; ++c)
        metric.columns.push_back("marginal_var_" + std::to_string(c));
      metric.fn = [](const Ensemble& ens) { return moment_summary(ens).marginal_var; };
      out.push_back(std::move(metric));
    } else if (name == "cov_trace") {
      out.push_back(NamedMetric::scalar(
          "cov_trace", [](const Ensemble& ens) { return moment_summary(ens).trace; }));
    } else {
      throw parameter_error("unknown metric: " + name);
    }
  }
  return out;
}

RunOutcome execute_run(const RunSetup& setup) {
  RunOutcome outcome;
  set_deterministic_mode(setup.deterministic);
  try {
    Rng rng(setup.seed);
    TargetBundle bundle = build_target(setup, rng);
    const KernelSpec spec = initial_kernel(setup, bundle.init);
    StepSchedule schedule = setup.schedule == ScheduleKind::Fixed
                                ? StepSchedule::fixed(setup.gamma)
                                : StepSchedule::adagrad(setup.gamma, setup.adagrad_alpha,
                                                        setup.adagrad_fudge);
    const std::vector<NamedMetric> metrics = build_metrics(setup, bundle);
    RunOptions opts;
    opts.nsteps = setup.nsteps;
    opts.log_every = setup.log_every;
    outcome.record = run_svgd(std::move(bundle.init), spec, bundle.model, setup.method,
                              std::move(schedule), opts, rng, metrics);
    outcome.ok = true;
  } catch (const run_error& e) {
    outcome.error = e.what();
    outcome.error_iteration = e.iteration();
  } catch (const std::exception& e) {
    outcome.error = e.what();
  }
  return outcome;
}

int cmd_run(const std::string& config_path, const CliOverrides& cli) {
  RunSetup setup;
  try {
    setup = validate_config(load_config_file(config_path), cli);
  } catch (const parameter_error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  if (setup.is_sweep) {
    std::cerr << "config declares a sweep; use: steinflow sweep " << config_path << "\n";
    return 2;
  }

  const RunOutcome outcome = execute_run(setup);
  try {
    const std::filesystem::path dir(setup.out_dir);
    std::filesystem::create_directories(dir);
    if (outcome.ok) {
      write_text_file(dir / "trace.csv", trace_csv_text(outcome.record));
      write_text_file(dir / "final_particles.csv",
                      particles_csv_text(outcome.record.final_ensemble));
    }
    write_text_file(dir / "summary.json", summary_json(setup, outcome).dump(2) + "\n");
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return 1;
  }
  if (!outcome.ok) {
    std::cerr << "run failed: " << outcome.error << "\n";
    return 1;
  }
  std::cout << "run complete: " << (std::filesystem::path(setup.out_dir) / "summary.json").string()
            << "\n";
  for (const std::string& name : setup.metrics) {
    if (name == "bandwidths" || name == "marginal_var") continue;
    std::cout << "  " << name << " = " << format_double(final_column(outcome.record, name))
              << "\n";
  }
  return 0;
}

int cmd_sweep(const std::string& config_path, const CliOverrides& cli) {
  RunSetup base;
  try {
    base = validate_config(load_config_file(config_path), cli);
  } catch (const parameter_error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  if (!base.is_sweep) {
    std::cerr << "config declares a single run; use: steinflow run " << config_path << "\n";
    return 2;
  }

  // Expand (axis value, seed) rows.
  std::vector<SweepRow> rows;
  size_t n_axis = 0;
  auto add_rows = [&](const std::string& label, double bw, long count, long dim) {
    for (std::uint64_t s : base.seeds) {
      SweepRow row;
      row.setup = derive_row(base, label, base.sweep_axis, bw, count, dim, s);
      row.axis_label = label;
      rows.push_back(std::move(row));
    }
    ++n_axis;
  };
  if (base.sweep_axis == "bandwidth") {
    for (double v : base.sweep_bandwidths) add_rows(format_double(v), v, 0, 0);
  } else if (base.sweep_axis == "m") {
    for (long v : base.sweep_counts) add_rows(std::to_string(v), 0, v, 0);
  } else if (base.sweep_axis == "dimension") {
    for (long v : base.sweep_dims) add_rows(std::to_string(v), 0, 0, v);
  } else {
    for (std::uint64_t v : base.sweep_seeds) {
      SweepRow row;
      row.setup = derive_row(base, std::to_string(v), "seed", 0, 0, 0, v);
      row.axis_label = std::to_string(v);
      rows.push_back(std::move(row));
      ++n_axis;
    }
  }

  const std::vector<std::string> scalar_cols = [&] {
    std::vector<std::string> cols;
    for (const std::string& name : kScalarSweepMetrics)
      if (std::find(base.metrics.begin(), base.metrics.end(), name) != base.metrics.end())
        cols.push_back(name);
    return cols;
  }();
  const bool want_marginals =
      std::find(base.metrics.begin(), base.metrics.end(), "marginal_var") !=
      base.metrics.end();
  int max_dim = base.dim;
  for (const SweepRow& row : rows) max_dim = std::max(max_dim, row.setup.dim);

  // Execute rows, optionally across threads (rows are independent).
  set_deterministic_mode(base.deterministic);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= rows.size()) return;
      SweepRow& row = rows[i];
      const RunOutcome outcome = execute_run(row.setup);
      if (!outcome.ok) {
        row.status = "error: " + outcome.error;
        continue;
      }
      row.ok = true;
      row.status = "ok";
      try {
        for (const std::string& name : scalar_cols)
          row.scalars[name] = final_column(outcome.record, name);
        if (want_marginals) {
          row.marginals.resize(row.setup.dim);
          for (int c = 1; c <= row.setup.dim; ++c)
            row.marginals[c - 1] =
                final_column(outcome.record, "marginal_var_" + std::to_string(c));
        }
      } catch (const std::exception& e) {
        row.ok = false;
        row.status = std::string("error: ") + e.what();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(cli.jobs, static_cast<int>(rows.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  // Aggregate over seeds per axis value.
  const bool aggregate = base.sweep_axis != "seed" && base.seeds.size() > 1;
  std::map<std::string, std::map<std::string, std::pair<std::string, std::string>>> agg;
  if (aggregate) {
    for (size_t start = 0; start < rows.size(); start += base.seeds.size()) {
      const std::string& label = rows[start].axis_label;
      for (const std::string& name : scalar_cols) {
        std::vector<double> vals;
        for (size_t k = start; k < start + base.seeds.size(); ++k)
          if (rows[k].ok) vals.push_back(rows[k].scalars.at(name));
        std::string mean_s, ci_s;
        if (!vals.empty()) {
          double mean = 0.0;
          for (double v : vals) mean += v;
          mean /= static_cast<double>(vals.size());
          mean_s = format_double(mean);
          if (vals.size() > 1) {
            double ss = 0.0;
            for (double v : vals) ss += (v - mean) * (v - mean);
            const double sd = std::sqrt(ss / static_cast<double>(vals.size() - 1));
            ci_s = format_double(1.96 * sd / std::sqrt(static_cast<double>(vals.size())));
          }
        }
        agg[label][name] = {mean_s, ci_s};
      }
    }
  }

  // Emit sweep.csv.
  std::string text;
  if (base.sweep_axis != "seed") text += base.sweep_axis + ",";
  text += "seed,status";
  for (const std::string& name : scalar_cols) text += "," + name;
  if (want_marginals)
    for (int c = 1; c <= max_dim; ++c) text += ",marginal_var_" + std::to_string(c);
  if (aggregate)
    for (const std::string& name : scalar_cols)
      text += "," + name + "_mean," + name + "_ci95";
  text += "\n";
  bool all_ok = true;
  for (const SweepRow& row : rows) {
    if (base.sweep_axis != "seed") text += csv_cell(row.axis_label) + ",";
    text += std::to_string(row.setup.seed) + "," + csv_cell(row.status);
    for (const std::string& name : scalar_cols)
      text += "," + (row.ok ? format_double(row.scalars.at(name)) : std::string());
    if (want_marginals) {
      for (int c = 0; c < max_dim; ++c) {
        text += ",";
        if (row.ok && c < static_cast<int>(row.marginals.size()))
          text += format_double(row.marginals[c]);
      }
    }
    if (aggregate) {
      const auto& a = agg.at(row.axis_label);
      for (const std::string& name : scalar_cols) {
        const auto& [mean_s, ci_s] = a.at(name);
        text += "," + mean_s + "," + ci_s;
      }
    }
    text += "\n";
    if (!row.ok) all_ok = false;
  }

  try {
    const std::filesystem::path dir(base.out_dir);
    std::filesystem::create_directories(dir);
    write_text_file(dir / "sweep.csv", text);
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return 1;
  }
  std::cout << "sweep complete: " << rows.size() << " runs ("
            << (std::filesystem::path(base.out_dir) / "sweep.csv").string() << ")\n";
  if (!all_ok) {
    std::cerr << "some sweep rows failed; see the status column\n";
    return 1;
  }
  return 0;
}

int cmd_validate(const std::string& config_path) {
  try {
    const RunSetup setup = validate_config(load_config_file(config_path), CliOverrides{});
    for (const auto& [k, v] : echo_config(setup)) std::cout << k << " = " << v << "\n";
    return 0;
  } catch (const parameter_error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}

int cmd_presets() {
  std::cout << preset_listing();
  return 0;
}

}  // namespace steinflow
