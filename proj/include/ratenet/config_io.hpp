// JSON configuration parsing and deterministic serialization of results.
//
// A configuration file has three blocks:
//
//   {
//     "model":      {"gamma", "sigma", "theta_bar", "theta_std", "j_bar",
//                    "T", "g", "mu_I": {"type": "gaussian"|"dirac",
//                                        "mean", "std"}},
//     "lambda":     {"d", "entries": [[k, l, value], ...]},
//     "experiment": {"N_list", "trials", "seed", "out_dir",
//                    "quadrature": {"gh_nodes", "omega_grid"},
//                    "checks": {"quenched"}, "strict_innovation_cov",
//                    "threads"}   // every experiment key optional
//   }
//
// Serializers write canonical JSON (sorted keys, shortest round-trip floats)
// and CSV with %.17g floats, so repeated runs are byte-identical.
#pragma once

#include <string>

#include "ratenet/harness.hpp"
#include "ratenet/mean_field.hpp"
#include "ratenet/model.hpp"
#include "ratenet/rate.hpp"
#include "ratenet/sampling.hpp"
#include "ratenet/simulation.hpp"

namespace ratenet {

/// Parses a configuration from JSON text; throws std::invalid_argument with
/// the offending key on malformed input.
ExperimentConfig parse_config(const std::string& json_text);

/// Reads and parses a configuration file.
ExperimentConfig load_config(const std::string& path);

/// Parses a Gaussian candidate {"m": [...], "lags": {"0": [[...]], "1": ...}}
/// (negative lags optional; filled by the transpose pairing).  The time-0
/// law is taken from the model configuration.
GaussianCandidate parse_candidate(const std::string& json_text, const MuI& mu_I);

/// Serializers.
std::string validation_report_json(const ValidationReport& report);
std::string limit_law_json(const LimitLaw& law);
/// Parses limit_law_json output back (model/lambda blocks included).
LimitLaw parse_limit_law(const std::string& json_text);
std::string rate_report_json(const RateReport& report);
std::string convergence_report_json(const ConvergenceReport& report, int T, int d);
std::string moments_json(const std::vector<EmpiricalMoments>& per_trial,
                         double j_bar);

/// CSV writers.  weights_csv row i holds the weights from presynaptic
/// neuron i onto each postsynaptic neuron (the transpose of the in-memory
/// layout); the header records N, the seed, and the correlation-table hash.
std::string weights_csv(const WeightMatrix& w, std::uint64_t seed,
                        const LambdaSpec& spec);
/// trajectory_csv has columns trial,j,t,U with j the ring label in [-n, n].
std::string trajectory_csv(const std::vector<Trajectory>& trajs);

}  // namespace ratenet
