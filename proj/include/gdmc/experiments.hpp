#ifndef GDMC_EXPERIMENTS_HPP
#define GDMC_EXPERIMENTS_HPP

#include "gdmc/config.hpp"
#include "gdmc/io.hpp"

#include <atomic>
#include <filesystem>
#include <memory>
#include <optional>
#include <thread>

namespace gdmc {

/// Seed of trial `trial` in sweep cell `cell`.
Seed trial_seed(Seed base, Index cell, Index trial);

/// One random instance: ground truth, observation and initialization seed,
/// each drawn from its own stream of the trial seed.
struct Trial {
  std::shared_ptr<const GroundTruth> ground;
  std::shared_ptr<const Observation> obs;
  Seed init_seed = 0;
};

Trial make_trial(Index n, const std::vector<double> &eigenvalues, double p,
                 double sigma, Seed seed);

/// Warnings for parameter regimes outside the convergence guarantees.
std::vector<std::string> regime_warnings(const ExperimentConfig &cfg,
                                         const GroundTruth &ground,
                                         double beta0);

/// none | default | all | comma-separated 0-based indices.
std::vector<Index> resolve_loo(const std::string &policy,
                               const GroundTruth &ground);

/// Horizon of a config: explicit T, or ceil(predicted T*) + 200.
Index resolve_horizon(const ExperimentConfig &cfg, const GroundTruth &ground,
                      double beta0);

SolverConfig make_solver_config(const ExperimentConfig &cfg,
                                const GroundTruth &ground, double beta0);

/// Leading CSV comment for a config.
std::string csv_comment(const ExperimentConfig &cfg);

// --- fig1 -----------------------------------------------------------------

struct Fig1Data {
  std::shared_ptr<const GroundTruth> ground;
  Vector x0;
  Vector orth_direction; ///< x0_perp / ||x0_perp|| (zero if x0 is parallel)
  FullObsResult run;
};

Fig1Data fig1_data(const ExperimentConfig &cfg);
io::CsvTable fig1_table(const ExperimentConfig &cfg, const Fig1Data &data);

// --- single runs (fig2, fig4, run) ---------------------------------------

struct SingleRun {
  Trial trial;
  TrajectoryRecord record;
  std::optional<PhaseReport> phase;
  std::optional<SpectralReport> spectral;
  std::vector<std::string> warnings;
};

/// Trial `trial_index` of cell 0 with p = cfg.p[0], beta0 = cfg.beta0[0].
SingleRun single_run(const ExperimentConfig &cfg, Index trial_index = 0);

/// t, sigma_1..sigma_r, procrustes, dev_ref_l2, beta, loss.
io::CsvTable rank_r_table(const ExperimentConfig &cfg,
                          const DiagnosticsSeries &series);

// --- fig3 ------------------------------------------------------------------

struct SweepCell {
  double beta0 = 0.0;
  double p = 0.0;
  Index trials = 0;
  Index completed = 0;
  Index failures = 0;
  Index measure_t = 0;
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;
  std::vector<double> finals; ///< completed trials, in trial order
};

struct SweepResult {
  std::vector<SweepCell> cells; ///< p-major, then beta0
  const SweepCell &at(double p, double beta0) const;
};

/// ceil(predicted T*) + offset.
Index sweep_measure_t(const GroundTruth &ground, double eta, double beta0,
                      Index offset);

/// Every (p, beta0) cell; trial k of p-cell c uses trial_seed(seed, c, k)
/// for all beta0, so instances are paired across initialization sizes.
SweepResult run_sweep(const ExperimentConfig &cfg);
io::CsvTable sweep_table(const ExperimentConfig &cfg, const SweepResult &result);

// --- commands -------------------------------------------------------------

struct CommandOutput {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> warnings;
};

CommandOutput cmd_fig1(const ExperimentConfig &cfg);
CommandOutput cmd_fig2(const ExperimentConfig &cfg);
CommandOutput cmd_fig3(const ExperimentConfig &cfg);
CommandOutput cmd_fig4(const ExperimentConfig &cfg);
CommandOutput cmd_run(const ExperimentConfig &cfg);

/// Runs f(0..count-1) on up to `jobs` threads.
template <class F> void parallel_for(Index count, Index jobs, F &&f) {
  if (jobs <= 1 || count <= 1) {
    for (Index k = 0; k < count; ++k)
      f(k);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> workers;
  const Index threads = std::min(jobs, count);
  for (Index w = 0; w < threads; ++w)
    workers.emplace_back([&] {
      for (Index k = next++; k < count && !failed; k = next++) {
        try {
          f(k);
        } catch (...) {
          if (!failed.exchange(true))
            error = std::current_exception();
        }
      }
    });
  for (auto &w : workers)
    w.join();
  if (error)
    std::rethrow_exception(error);
}

} // namespace gdmc

#endif // GDMC_EXPERIMENTS_HPP
