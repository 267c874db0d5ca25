#include "gdmc/experiments.hpp"

#include "gdmc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace gdmc {

namespace fs = std::filesystem;

Seed trial_seed(Seed base, Index cell, Index trial) {
  return derive_seed(base, {static_cast<std::uint64_t>(cell),
                            static_cast<std::uint64_t>(trial)});
}

Trial make_trial(Index n, const std::vector<double> &eigenvalues, double p,
                 double sigma, Seed seed) {
  Trial trial;
  auto ground = std::make_shared<const GroundTruth>(generate_ground_truth(
      n, eigenvalues, derive_seed(seed, {stream::kGroundTruth})));
  trial.obs = std::make_shared<const Observation>(Observation::sample(
      ground, p, sigma, derive_seed(seed, {stream::kMask}),
      derive_seed(seed, {stream::kNoise})));
  trial.ground = std::move(ground);
  trial.init_seed = derive_seed(seed, {stream::kInit});
  return trial;
}

std::vector<std::string> regime_warnings(const ExperimentConfig &cfg,
                                         const GroundTruth &ground,
                                         double beta0) {
  std::vector<std::string> out;
  const double n = static_cast<double>(ground.n);
  const double noise_limit =
      10.0 * ground.lambda_max() * ground.mu * std::sqrt(std::log(n)) / n;
  if (cfg.sigma > noise_limit) {
    std::ostringstream os;
    os << "sigma = " << cfg.sigma << " exceeds " << noise_limit
       << " (10 lambda mu sqrt(log n) / n); outside the small-noise regime";
    out.push_back(os.str());
  }
  const double step = cfg.eta * ground.lambda_max();
  if (step > 0.1) {
    std::ostringstream os;
    os << "eta * lambda_1 = " << step << " exceeds 0.1";
    out.push_back(os.str());
  }
  if (beta0 > std::sqrt(ground.lambda_max())) {
    std::ostringstream os;
    os << "beta0 = " << beta0 << " is not small relative to sqrt(lambda_1)";
    out.push_back(os.str());
  }
  return out;
}

std::vector<Index> resolve_loo(const std::string &policy,
                               const GroundTruth &ground) {
  if (policy == "none")
    return {};
  if (policy == "default")
    return default_loo_indices(ground);
  if (policy == "all") {
    std::vector<Index> all(static_cast<std::size_t>(ground.n));
    std::iota(all.begin(), all.end(), Index{0});
    return all;
  }
  std::vector<Index> out;
  std::stringstream ss(policy);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const long long l = std::stoll(item);
    require(l >= 0 && l < ground.n, "leave-one-out index out of range");
    out.push_back(static_cast<Index>(l));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Index resolve_horizon(const ExperimentConfig &cfg, const GroundTruth &ground,
                      double beta0) {
  if (cfg.T)
    return *cfg.T;
  require(ground.rank() == 1, "automatic horizon requires a rank-1 model");
  return default_horizon(ground, cfg.eta, beta0);
}

SolverConfig make_solver_config(const ExperimentConfig &cfg,
                                const GroundTruth &ground, double beta0) {
  SolverConfig sc;
  sc.eta = cfg.eta;
  sc.beta0 = beta0;
  sc.T = resolve_horizon(cfg, ground, beta0);
  sc.record_every = cfg.record_every;
  sc.loo_indices = resolve_loo(cfg.loo, ground);
  sc.track_loo_signal = ground.rank() == 1;
  return sc;
}

std::string csv_comment(const ExperimentConfig &cfg) {
  std::string flat = cfg.canonical;
  while (!flat.empty() && flat.back() == '\n')
    flat.pop_back();
  std::replace(flat.begin(), flat.end(), '\n', ';');
  return "gdmc " + cfg.command + " config_hash=" + cfg.hash + " " + flat;
}

// --- fig1 -----------------------------------------------------------------

Fig1Data fig1_data(const ExperimentConfig &cfg) {
  require(cfg.rank() == 1, "fig1 requires a rank-1 model");
  const Seed seed = trial_seed(cfg.seed, 0, 0);
  Fig1Data data;
  data.ground = std::make_shared<const GroundTruth>(generate_ground_truth(
      cfg.n, cfg.eigenvalues, derive_seed(seed, {stream::kGroundTruth})));
  const GroundTruth &gt = *data.ground;
  const Vector u = gt.u_star();
  const double beta0 = cfg.beta0.front();
  const Seed init = derive_seed(seed, {stream::kInit});

  if (cfg.init == "random") {
    data.x0 = init_point(cfg.n, 1, beta0, init).col(0);
  } else if (cfg.init == "aligned") {
    data.x0 = beta0 * u;
  } else {
    // Signal component exactly beta0 / sqrt(n), remainder orthogonal.
    Vector g = gaussian_factor(cfg.n, 1, 1.0, init).col(0);
    g -= u.dot(g) * u;
    g /= g.norm();
    const double alpha0 = beta0 / std::sqrt(static_cast<double>(cfg.n));
    data.x0 = alpha0 * u + std::sqrt(beta0 * beta0 - alpha0 * alpha0) * g;
  }
  const Vector perp = data.x0 - u.dot(data.x0) * u;
  const double perp_norm = perp.norm();
  data.orth_direction =
      perp_norm > 0.0 ? Vector(perp / perp_norm) : Vector::Zero(cfg.n);
  const Index T = cfg.T ? *cfg.T : default_horizon(gt, cfg.eta, beta0);
  data.run = full_obs_run(gt, data.x0, cfg.eta, T);
  return data;
}

io::CsvTable fig1_table(const ExperimentConfig &cfg, const Fig1Data &data) {
  io::CsvTable table(csv_comment(cfg),
                     {"t", "alpha_rec", "beta_rec", "gamma_rec", "alpha_vec",
                      "beta_vec", "gamma_vec", "proj_signal", "proj_orth"});
  const Vector u = data.ground->u_star();
  const auto &sc = data.run.scalars;
  for (Index t = 0; t < data.run.trajectory.cols(); ++t) {
    const Vector x = data.run.trajectory.col(t);
    const SignalParts parts = signal_decomposition(x, u);
    const auto k = static_cast<std::size_t>(t);
    table.add_row({static_cast<double>(t), sc.alpha[k], sc.beta[k], sc.gamma[k],
                   parts.alpha, parts.beta, parts.gamma, u.dot(x),
                   data.orth_direction.dot(x)});
  }
  return table;
}

// --- single runs -----------------------------------------------------------

SingleRun single_run(const ExperimentConfig &cfg, Index trial_index) {
  SingleRun out;
  const double p = cfg.p.front();
  const double beta0 = cfg.beta0.front();
  out.trial = make_trial(cfg.n, cfg.eigenvalues, p, cfg.sigma,
                         trial_seed(cfg.seed, 0, trial_index));
  const GroundTruth &gt = *out.trial.ground;
  out.warnings = regime_warnings(cfg, gt, beta0);
  const SolverConfig sc = make_solver_config(cfg, gt, beta0);
  for (auto &w : validate_config(sc, gt))
    out.warnings.push_back(w);
  out.record = gd_run_rank_r(*out.trial.obs, sc, out.trial.init_seed);
  if (gt.rank() == 1) {
    out.phase = phase_boundaries(out.record.series, gt, cfg.eta, beta0, p);
    if (cfg.spectral)
      out.spectral = spectral_report(*out.trial.obs, sc.loo_indices);
  }
  return out;
}

io::CsvTable rank_r_table(const ExperimentConfig &cfg,
                          const DiagnosticsSeries &series) {
  const std::size_t r =
      series.singular_values.empty() ? 0 : series.singular_values[0].size();
  std::vector<std::string> header{"t"};
  for (std::size_t k = 0; k < r; ++k)
    header.push_back("sigma_" + std::to_string(k + 1));
  for (const char *name : {"procrustes", "dev_ref_l2", "beta", "loss"})
    header.emplace_back(name);
  io::CsvTable table(csv_comment(cfg), header);
  for (Index t = 0; t < series.size(); ++t) {
    const auto k = static_cast<std::size_t>(t);
    std::vector<double> row{static_cast<double>(t)};
    for (std::size_t c = 0; c < r; ++c)
      row.push_back(series.singular_values[k][c]);
    row.push_back(series.aligned_l2[k]);
    row.push_back(series.dev_ref_l2[k]);
    row.push_back(series.beta[k]);
    row.push_back(series.loss[k]);
    table.add_row(row);
  }
  return table;
}

// --- fig3 ------------------------------------------------------------------

const SweepCell &SweepResult::at(double p, double beta0) const {
  for (const auto &cell : cells)
    if (cell.p == p && cell.beta0 == beta0)
      return cell;
  throw std::out_of_range("sweep cell not found");
}

Index sweep_measure_t(const GroundTruth &ground, double eta, double beta0,
                      Index offset) {
  return static_cast<Index>(std::ceil(
             predicted_t_star(ground.lambda_max(), eta, ground.n, beta0))) +
         offset;
}

namespace {

void summarize(SweepCell &cell) {
  cell.completed = static_cast<Index>(cell.finals.size());
  cell.failures = cell.trials - cell.completed;
  if (cell.finals.empty()) {
    cell.mean = cell.median = cell.stddev = std::nan("");
    return;
  }
  const double count = static_cast<double>(cell.finals.size());
  double sum = 0.0;
  for (double v : cell.finals)
    sum += v;
  cell.mean = sum / count;
  double var = 0.0;
  for (double v : cell.finals)
    var += (v - cell.mean) * (v - cell.mean);
  cell.stddev = cell.finals.size() > 1 ? std::sqrt(var / (count - 1.0)) : 0.0;
  std::vector<double> sorted = cell.finals;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  cell.median = sorted.size() % 2 ? sorted[mid]
                                  : 0.5 * (sorted[mid - 1] + sorted[mid]);
}

} // namespace

SweepResult run_sweep(const ExperimentConfig &cfg) {
  require(cfg.rank() == 1, "fig3 requires a rank-1 model");
  require(!cfg.p.empty() && !cfg.beta0.empty(), "fig3 requires a non-empty sweep");
  const Index np = static_cast<Index>(cfg.p.size());
  const Index nb = static_cast<Index>(cfg.beta0.size());
  const Index trials = cfg.trials;

  // finals[(cell * trials + k) * nb + b]; NaN marks a diverged trial.
  std::vector<double> finals(static_cast<std::size_t>(np * trials * nb),
                             std::nan(""));
  std::vector<Index> measure(static_cast<std::size_t>(nb), 0);

  parallel_for(np * trials, cfg.jobs, [&](Index job) {
    const Index c = job / trials;
    const Index k = job % trials;
    const Trial trial =
        make_trial(cfg.n, cfg.eigenvalues, cfg.p[static_cast<std::size_t>(c)],
                   cfg.sigma, trial_seed(cfg.seed, c, k));
    for (Index b = 0; b < nb; ++b) {
      const double beta0 = cfg.beta0[static_cast<std::size_t>(b)];
      SolverConfig sc;
      sc.eta = cfg.eta;
      sc.beta0 = beta0;
      sc.T = sweep_measure_t(*trial.ground, cfg.eta, beta0, cfg.measure_offset);
      sc.record_every = sc.T;
      sc.track_loo_signal = false;
      measure[static_cast<std::size_t>(b)] = sc.T;
      try {
        const TrajectoryRecord rec = gd_run(*trial.obs, sc, trial.init_seed);
        finals[static_cast<std::size_t>((job)*nb + b)] =
            rec.series.aligned_l2.back();
      } catch (const DivergenceError &) {
      }
    }
  });

  SweepResult result;
  for (Index c = 0; c < np; ++c)
    for (Index b = 0; b < nb; ++b) {
      SweepCell cell;
      cell.p = cfg.p[static_cast<std::size_t>(c)];
      cell.beta0 = cfg.beta0[static_cast<std::size_t>(b)];
      cell.trials = trials;
      cell.measure_t = measure[static_cast<std::size_t>(b)];
      for (Index k = 0; k < trials; ++k) {
        const double v = finals[static_cast<std::size_t>((c * trials + k) * nb + b)];
        if (!std::isnan(v))
          cell.finals.push_back(v);
      }
      summarize(cell);
      result.cells.push_back(std::move(cell));
    }
  return result;
}

io::CsvTable sweep_table(const ExperimentConfig &cfg, const SweepResult &result) {
  io::CsvTable table(csv_comment(cfg),
                     {"beta0", "p", "trials", "completed", "failures",
                      "measure_t", "mean", "median", "stddev"});
  for (const auto &cell : result.cells)
    table.add_row({cell.beta0, cell.p, static_cast<double>(cell.trials),
                   static_cast<double>(cell.completed),
                   static_cast<double>(cell.failures),
                   static_cast<double>(cell.measure_t), cell.mean, cell.median,
                   cell.stddev});
  return table;
}

// --- commands -------------------------------------------------------------

namespace {

io::Json manifest(const ExperimentConfig &cfg,
                  const std::vector<fs::path> &files) {
  io::Json doc;
  doc["command"] = cfg.command;
  doc["config_hash"] = cfg.hash;
  doc["config"] = cfg.canonical;
  std::vector<std::string> names;
  for (const auto &f : files)
    names.push_back(f.filename().string());
  doc["files"] = names;
  return doc;
}

void finish(const ExperimentConfig &cfg, CommandOutput &out) {
  const fs::path path = fs::path(cfg.out) / (cfg.command + "_manifest.json");
  io::write_json(path, manifest(cfg, out.files));
  out.files.push_back(path);
}

CommandOutput write_single_run(const ExperimentConfig &cfg,
                               const SingleRun &run, bool rank_table) {
  CommandOutput out;
  out.warnings = run.warnings;
  const fs::path dir(cfg.out);
  const std::string prefix = cfg.command;
  const std::string comment = csv_comment(cfg);

  auto emit_csv = [&](const std::string &name, const io::CsvTable &table) {
    const fs::path path = dir / name;
    table.write(path);
    out.files.push_back(path);
  };
  auto emit_json = [&](const std::string &name, const io::Json &doc) {
    const fs::path path = dir / name;
    io::write_json(path, doc);
    out.files.push_back(path);
  };

  emit_csv(prefix + "_series.csv", io::series_table(run.record.series, comment));
  if (rank_table)
    emit_csv(prefix + "_rank.csv", rank_r_table(cfg, run.record.series));
  emit_csv(prefix + "_snapshots.csv", io::snapshot_table(run.record, comment));
  emit_json(prefix + "_trajectory.json", io::trajectory_manifest(run.record));
  emit_json(prefix + "_ground_truth.json", io::to_json(*run.trial.ground));
  if (run.phase)
    emit_json(prefix + "_phase.json", io::to_json(*run.phase));
  if (run.spectral)
    emit_json(prefix + "_spectral.json", io::to_json(*run.spectral));
  {
    const fs::path path = dir / (prefix + "_mask.txt");
    io::write_mask(path, run.trial.obs->mask());
    out.files.push_back(path);
  }
  finish(cfg, out);
  return out;
}

} // namespace

CommandOutput cmd_fig1(const ExperimentConfig &cfg) {
  const Fig1Data data = fig1_data(cfg);
  CommandOutput out;
  const fs::path path = fs::path(cfg.out) / "fig1.csv";
  fig1_table(cfg, data).write(path);
  out.files.push_back(path);
  finish(cfg, out);
  return out;
}

CommandOutput cmd_fig2(const ExperimentConfig &cfg) {
  require(cfg.rank() == 1, "fig2 requires a rank-1 model");
  return write_single_run(cfg, single_run(cfg), false);
}

CommandOutput cmd_fig3(const ExperimentConfig &cfg) {
  const SweepResult result = run_sweep(cfg);
  CommandOutput out;
  const fs::path path = fs::path(cfg.out) / "fig3.csv";
  sweep_table(cfg, result).write(path);
  out.files.push_back(path);
  finish(cfg, out);
  return out;
}

CommandOutput cmd_fig4(const ExperimentConfig &cfg) {
  return write_single_run(cfg, single_run(cfg), true);
}

CommandOutput cmd_run(const ExperimentConfig &cfg) {
  return write_single_run(cfg, single_run(cfg), cfg.rank() > 1);
}

} // namespace gdmc
