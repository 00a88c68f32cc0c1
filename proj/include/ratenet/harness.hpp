// Convergence experiments: simulate ensembles of rings at increasing sizes,
// compare the trial-averaged empirical moments against the solved limit law,
// and summarize errors, z-scores, and the empirical convergence slope.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ratenet/mean_field.hpp"
#include "ratenet/model.hpp"

namespace ratenet {

/// Full experiment description (normally parsed from JSON).
struct ExperimentConfig {
  ModelParams model;
  LambdaSpec lambda{0, Eigen::MatrixXd::Zero(1, 1)};
  std::vector<int> N_list{101, 401, 1601};  ///< odd ring sizes, ascending
  int trials = 32;
  std::uint64_t seed = 1;
  std::string out_dir = "results";
  int gh_nodes = 40;
  int omega_grid = 512;
  int threads = 0;  ///< 0 = hardware concurrency
  bool quenched = true;  ///< also run the fixed-(J, theta) variant at max N
  bool strict_innovation_cov = false;
};

/// Moment comparison at one ring size: entries flatten (c_1..c_T) followed
/// by the M^l blocks for l = -d..d in row-major order.
struct ConvergenceEntry {
  int N = 0;
  Eigen::VectorXd mean;    ///< trial average per entry
  Eigen::VectorXd se;      ///< standard error per entry
  Eigen::VectorXd target;  ///< limit-law value per entry
  double sup_error = 0.0;  ///< max |mean - target|
  double max_abs_z = 0.0;  ///< max |mean - target| / se
};

/// Report of one convergence experiment.
struct ConvergenceReport {
  std::vector<ConvergenceEntry> annealed;  ///< one per ring size
  double slope = 0.0;       ///< least-squares slope of log sup_error vs log N
  bool annealed_band = false;  ///< max |z| <= 4 at the largest size
  bool has_quenched = false;
  ConvergenceEntry quenched;   ///< fixed-(J, theta) run at the largest size
  Eigen::VectorXd quenched_band_width;  ///< one-draw dispersion per entry
  bool quenched_band = false;  ///< |mean - target| within 4x the one-draw band
  double residual = 0.0;       ///< limit-law quadrature residual
};

/// Labels for the flattened moment entries ("c[t]", "M[l](s,t)").
std::vector<std::string> moment_entry_labels(int T, int d);

/// Runs the experiment: solves the limit law once, then for each ring size
/// draws `trials` independent networks (weights, thresholds, noise, initial
/// conditions all from per-(size, trial) streams), simulates them, and
/// aggregates the empirical moments.  Trials are distributed over threads
/// statically and merged in trial order, so any thread count gives identical
/// results.  The quenched variant reuses the trial-0 weights and thresholds
/// for every trial and resamples only noise and initial conditions; its
/// acceptance band adds the annealed per-trial scatter (the dispersion of a
/// single disorder draw) to the noise standard error.
ConvergenceReport run_convergence(const ExperimentConfig& config);

}  // namespace ratenet
