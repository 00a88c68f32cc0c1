// Command-line front end: validate correlation tables, sample weights,
// simulate networks, solve the limit law, evaluate the rate function, and
// run convergence experiments.  All outputs are deterministic functions of
// (config, seed), independent of thread count.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ratenet/config_io.hpp"
#include "ratenet/harness.hpp"
#include "ratenet/mean_field.hpp"
#include "ratenet/model.hpp"
#include "ratenet/rate.hpp"
#include "ratenet/rng.hpp"
#include "ratenet/sampling.hpp"
#include "ratenet/simulation.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool out_is_dir = false) {
  cmd->add_option("--config", args.config_path, "configuration JSON file")
      ->required();
  cmd->add_option("--seed", args.seed, "override the configured seed");
  cmd->add_option("--threads", args.threads, "worker threads (0 = hardware)");
  cmd->add_option("--out", args.out,
                  out_is_dir ? "output directory" : "output file (default: stdout)");
}

ratenet::ExperimentConfig load(const CommonArgs& args) {
  ratenet::ExperimentConfig cfg = ratenet::load_config(args.config_path);
  if (args.seed) cfg.seed = *args.seed;
  if (args.threads) cfg.threads = *args.threads;
  return cfg;
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + out_path);
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rate-network analysis: correlated-weight sampling, simulation,\n"
               "limit law, and large-deviation rate function"};
  app.require_subcommand(1);

  CommonArgs validate_args;
  int grid_resolution = 201;
  std::vector<int> odd_sizes{9, 21, 41};
  CLI::App* cmd_validate =
      app.add_subcommand("validate-lambda", "check a correlation table's spectra");
  add_common(cmd_validate, validate_args);
  cmd_validate->add_option("--grid", grid_resolution, "frequency grid resolution");
  cmd_validate->add_option("--sizes", odd_sizes, "ring sizes for discrete spectra");

  CommonArgs weights_args;
  int weights_N = 0;
  int weights_trial = 0;
  CLI::App* cmd_weights =
      app.add_subcommand("sample-weights", "draw one weight matrix as CSV");
  add_common(cmd_weights, weights_args);
  cmd_weights->add_option("--N", weights_N, "ring size (odd)")->required();
  cmd_weights->add_option("--trial", weights_trial, "trial index for the stream");

  CommonArgs sim_args;
  int sim_N = 0;
  std::optional<int> sim_trials;
  std::string sim_emit = "trajectory";
  CLI::App* cmd_sim = app.add_subcommand("simulate", "simulate network trials");
  add_common(cmd_sim, sim_args);
  cmd_sim->add_option("--N", sim_N, "ring size (odd)")->required();
  cmd_sim->add_option("--trials", sim_trials, "number of trials");
  cmd_sim->add_option("--emit", sim_emit, "trajectory | moments")
      ->check(CLI::IsMember({"trajectory", "moments"}));

  CommonArgs limit_args;
  CLI::App* cmd_limit =
      app.add_subcommand("solve-limit", "solve the mean-field limit law");
  add_common(cmd_limit, limit_args);

  CommonArgs rate_args;
  std::string candidate_path;
  std::string nu_spec = "self";
  CLI::App* cmd_rate =
      app.add_subcommand("rate", "evaluate the rate function of a candidate");
  add_common(cmd_rate, rate_args);
  cmd_rate->add_option("--candidate", candidate_path,
                       "candidate JSON ({\"m\": [...], \"lags\": {...}})")
      ->required();
  cmd_rate->add_option("--nu", nu_spec,
                       "\"self\" for H, or a solve-limit JSON file for the "
                       "relative rate H^nu");

  CommonArgs conv_args;
  CLI::App* cmd_conv =
      app.add_subcommand("converge", "run the convergence experiment");
  add_common(cmd_conv, conv_args, /*out_is_dir=*/true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 64;
  }

  try {
    if (cmd_validate->parsed()) {
      const ratenet::ExperimentConfig cfg = load(validate_args);
      const ratenet::ValidationReport report =
          ratenet::validate_lambda(cfg.lambda, grid_resolution, odd_sizes);
      emit(validate_args.out, ratenet::validation_report_json(report));
      return report.valid ? 0 : 2;
    }

    if (cmd_weights->parsed()) {
      const ratenet::ExperimentConfig cfg = load(weights_args);
      const ratenet::WeightMatrix w = ratenet::sample_weights(
          cfg.lambda, cfg.model.j_bar, weights_N, cfg.seed,
          ratenet::stream_index(weights_N, weights_trial));
      emit(weights_args.out, ratenet::weights_csv(w, cfg.seed, cfg.lambda));
      return 0;
    }

    if (cmd_sim->parsed()) {
      const ratenet::ExperimentConfig cfg = load(sim_args);
      const int trials = sim_trials.value_or(cfg.trials);
      std::vector<ratenet::Trajectory> trajs;
      std::vector<ratenet::EmpiricalMoments> moments;
      for (int trial = 0; trial < trials; ++trial) {
        const std::uint64_t idx = ratenet::stream_index(sim_N, trial);
        const ratenet::WeightMatrix w =
            ratenet::sample_weights(cfg.lambda, cfg.model.j_bar, sim_N, cfg.seed, idx);
        const ratenet::NoiseBundle bundle =
            ratenet::sample_noise_bundle(cfg.model, sim_N, cfg.seed, idx);
        ratenet::Trajectory traj = ratenet::simulate(cfg.model, w, bundle);
        if (sim_emit == "moments")
          moments.push_back(
              ratenet::empirical_moments(traj, cfg.model, cfg.lambda.d()));
        else
          trajs.push_back(std::move(traj));
      }
      if (sim_emit == "moments")
        emit(sim_args.out, ratenet::moments_json(moments, cfg.model.j_bar));
      else
        emit(sim_args.out, ratenet::trajectory_csv(trajs));
      return 0;
    }

    if (cmd_limit->parsed()) {
      const ratenet::ExperimentConfig cfg = load(limit_args);
      ratenet::QuadOptions opts;
      opts.gh_nodes = cfg.gh_nodes;
      opts.strict_innovation_cov = cfg.strict_innovation_cov;
      const ratenet::LimitLaw law =
          ratenet::solve_limit_law(cfg.model, cfg.lambda, opts);
      emit(limit_args.out, ratenet::limit_law_json(law));
      return 0;
    }

    if (cmd_rate->parsed()) {
      const ratenet::ExperimentConfig cfg = load(rate_args);
      const ratenet::GaussianCandidate cand =
          ratenet::parse_candidate(read_file(candidate_path), cfg.model.mu_I);
      ratenet::RateOptions opts;
      opts.omega_grid = cfg.omega_grid;
      opts.gh_nodes = cfg.gh_nodes;
      ratenet::RateReport report;
      if (nu_spec == "self") {
        report = ratenet::rate_H(cand, cfg.model, cfg.lambda, opts);
      } else {
        const ratenet::LimitLaw nu = ratenet::parse_limit_law(read_file(nu_spec));
        report = ratenet::rate_H_relative(cand, nu, opts);
      }
      emit(rate_args.out, ratenet::rate_report_json(report));
      return 0;
    }

    if (cmd_conv->parsed()) {
      ratenet::ExperimentConfig cfg = load(conv_args);
      // Output directory: --out flag, else environment override, else config.
      std::string out_dir = conv_args.out;
      if (out_dir.empty()) {
        if (const char* env = std::getenv("RATENET_OUT_DIR")) out_dir = env;
      }
      if (out_dir.empty()) out_dir = cfg.out_dir;
      const ratenet::ConvergenceReport report = ratenet::run_convergence(cfg);
      const int T = cfg.model.T;
      const int d = cfg.lambda.d();
      const std::string report_json =
          ratenet::convergence_report_json(report, T, d);
      std::filesystem::create_directories(out_dir);
      {
        std::ofstream out(std::filesystem::path(out_dir) / "report.json",
                          std::ios::binary);
        out << report_json;
      }
      const std::vector<std::string> labels = ratenet::moment_entry_labels(T, d);
      auto write_csv = [&](const ratenet::ConvergenceEntry& e,
                           const std::string& name) {
        std::ofstream out(std::filesystem::path(out_dir) / name, std::ios::binary);
        out << "label,mean,se,target\n";
        char buf[160];
        for (Eigen::Index i = 0; i < e.mean.size(); ++i) {
          std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g\n",
                        labels[i].c_str(), e.mean(i), e.se(i), e.target(i));
          out << buf;
        }
      };
      for (const auto& e : report.annealed)
        write_csv(e, "moments_N" + std::to_string(e.N) + ".csv");
      if (report.has_quenched)
        write_csv(report.quenched,
                  "moments_N" + std::to_string(report.quenched.N) + "_quenched.csv");
      std::cout << report_json;
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ratenet::SingularDensityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
