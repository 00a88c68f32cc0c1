#include "ratenet/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "ratenet/rng.hpp"
#include "ratenet/sampling.hpp"
#include "ratenet/simulation.hpp"

namespace ratenet {

namespace {

// Flattens (c, M^{-d}..M^{d}) into one vector; order matches
// moment_entry_labels.
Eigen::VectorXd flatten_moments(const Eigen::VectorXd& c,
                                const std::vector<Eigen::MatrixXd>& M, int T,
                                int d) {
  Eigen::VectorXd out(T + (2 * d + 1) * T * T);
  Eigen::Index pos = 0;
  for (int t = 0; t < T; ++t) out(pos++) = c(t);
  for (int l = -d; l <= d; ++l)
    for (int s = 0; s < T; ++s)
      for (int t = 0; t < T; ++t) out(pos++) = M[l + d](s, t);
  return out;
}

// One simulated trial at ring size N; quenched trials reuse the trial-0
// weights and thresholds.
Eigen::VectorXd run_trial(const ExperimentConfig& config, int N, int trial,
                          bool quenched) {
  const int d = config.lambda.d();
  const std::uint64_t idx = stream_index(N, trial);
  const std::uint64_t disorder_idx = quenched ? stream_index(N, 0) : idx;
  const WeightMatrix w =
      sample_weights(config.lambda, config.model.j_bar, N, config.seed, disorder_idx);
  NoiseBundle bundle = sample_noise_bundle(config.model, N, config.seed, idx);
  if (quenched) {
    StreamRng rng(config.seed, "thresholds", disorder_idx);
    for (int j = 0; j < N; ++j)
      bundle.thresholds(j) =
          config.model.theta_bar + config.model.theta_std * rng.normal();
  }
  const Trajectory traj = simulate(config.model, w, bundle);
  const EmpiricalMoments emp = empirical_moments(traj, config.model, d);
  return flatten_moments(emp.c_hat, emp.M_hat, config.model.T, d);
}

struct EnsembleStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;  ///< per-trial standard deviation (unbiased)
  Eigen::VectorXd se;  ///< sd / sqrt(trials)
};

EnsembleStats run_ensemble(const ExperimentConfig& config, int N, bool quenched) {
  const int trials = config.trials;
  if (trials < 2) throw std::invalid_argument("need at least two trials");
  std::vector<Eigen::VectorXd> rows(trials);
  int threads = config.threads > 0
                    ? config.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, trials));
  // Static partition, results merged in trial order: identical output for
  // any thread count.
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (int trial = w; trial < trials; trial += threads)
          rows[trial] = run_trial(config, N, trial, quenched);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);

  const Eigen::Index dim = rows[0].size();
  EnsembleStats stats;
  stats.mean = Eigen::VectorXd::Zero(dim);
  for (const auto& r : rows) stats.mean += r;
  stats.mean /= trials;
  stats.sd = Eigen::VectorXd::Zero(dim);
  for (const auto& r : rows) stats.sd += (r - stats.mean).cwiseAbs2();
  stats.sd = (stats.sd / (trials - 1)).cwiseSqrt();
  stats.se = stats.sd / std::sqrt(static_cast<double>(trials));
  return stats;
}

}  // namespace

std::vector<std::string> moment_entry_labels(int T, int d) {
  std::vector<std::string> labels;
  for (int t = 1; t <= T; ++t) labels.push_back("c[" + std::to_string(t) + "]");
  for (int l = -d; l <= d; ++l)
    for (int s = 1; s <= T; ++s)
      for (int t = 1; t <= T; ++t) {
        std::ostringstream os;
        os << "M[" << l << "](" << s << "," << t << ")";
        labels.push_back(os.str());
      }
  return labels;
}

ConvergenceReport run_convergence(const ExperimentConfig& config) {
  config.model.validate();
  if (config.N_list.empty()) throw std::invalid_argument("N_list must not be empty");
  for (int N : config.N_list)
    if (N % 2 == 0 || N < 2 * config.lambda.d() + 1)
      throw std::invalid_argument("ring sizes must be odd and at least 2d+1");

  QuadOptions qopts;
  qopts.gh_nodes = config.gh_nodes;
  qopts.strict_innovation_cov = config.strict_innovation_cov;
  const LimitLaw law = solve_limit_law(config.model, config.lambda, qopts);
  const int T = config.model.T;
  const int d = config.lambda.d();
  const Eigen::VectorXd target =
      flatten_moments(law.moments.c,
                      std::vector<Eigen::MatrixXd>(law.moments.M.begin(),
                                                   law.moments.M.end()),
                      T, d);

  ConvergenceReport report;
  report.residual = law.residual;
  Eigen::VectorXd sd_at_max;
  for (int N : config.N_list) {
    const EnsembleStats stats = run_ensemble(config, N, false);
    ConvergenceEntry entry;
    entry.N = N;
    entry.mean = stats.mean;
    entry.se = stats.se;
    entry.target = target;
    entry.sup_error = (stats.mean - target).cwiseAbs().maxCoeff();
    entry.max_abs_z = 0.0;
    for (Eigen::Index i = 0; i < target.size(); ++i) {
      const double se = std::max(stats.se(i), 1e-300);
      entry.max_abs_z =
          std::max(entry.max_abs_z, std::abs(stats.mean(i) - target(i)) / se);
    }
    report.annealed.push_back(std::move(entry));
    if (N == config.N_list.back()) sd_at_max = stats.sd;
  }
  report.annealed_band = report.annealed.back().max_abs_z <= 4.0;

  // Least-squares slope of log sup_error against log N.
  const int P = static_cast<int>(report.annealed.size());
  if (P >= 2) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& e : report.annealed) {
      const double x = std::log(static_cast<double>(e.N));
      const double y = std::log(std::max(e.sup_error, 1e-300));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    report.slope = (P * sxy - sx * sy) / (P * sxx - sx * sx);
  }

  if (config.quenched) {
    const int N = config.N_list.back();
    const EnsembleStats stats = run_ensemble(config, N, true);
    report.has_quenched = true;
    report.quenched.N = N;
    report.quenched.mean = stats.mean;
    report.quenched.se = stats.se;
    report.quenched.target = target;
    report.quenched.sup_error = (stats.mean - target).cwiseAbs().maxCoeff();
    // A quenched run is one draw of the disorder: its dispersion around the
    // limit is the annealed per-trial scatter (which includes the disorder
    // fluctuation) plus the residual noise error of the trial average.
    report.quenched_band_width =
        (sd_at_max.cwiseAbs2() + stats.se.cwiseAbs2()).cwiseSqrt();
    report.quenched.max_abs_z = 0.0;
    bool ok = true;
    for (Eigen::Index i = 0; i < target.size(); ++i) {
      const double width = std::max(report.quenched_band_width(i), 1e-300);
      const double z = std::abs(stats.mean(i) - target(i)) / width;
      report.quenched.max_abs_z = std::max(report.quenched.max_abs_z, z);
      if (z > 4.0) ok = false;
    }
    report.quenched_band = ok;
  }
  return report;
}

}  // namespace ratenet
