// Model parameters, the synaptic correlation table, and their validation.
//
// The network under study is a ring of N = 2n+1 rate neurons
//
//   U^j_t = gamma * U^j_{t-1} + sum_i J_{ji} f(U^i_{t-1}) + theta_j + B^j_{t-1}
//
// with firing rate f(x) = (1 + tanh(g x)) / 2, centred synaptic weights with
// mean Jbar/N and circular covariance
//
//   cov(J_ij, J_kl) = (1/N) * Lambda((k - i) mod N, (l - j) mod N),
//
// where Lambda is an even, finitely supported correlation table.  This header
// defines the parameter structs, the Lambda container with its evenness
// completion, the derived constants used by the rate-function bounds, and the
// spectral validity checks a correlation table must pass.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace ratenet {

/// Firing rate f(x) = (1 + tanh(g x)) / 2; Lipschitz constant g/2.
inline double sigmoid(double x, double g) { return 0.5 * (1.0 + std::tanh(g * x)); }

/// Law of the initial potentials (one per neuron, i.i.d.).
struct MuI {
  enum class Kind { Dirac, Gaussian };
  Kind kind = Kind::Gaussian;
  double mean = 0.0;
  double std = 1.0;  ///< ignored for Dirac

  bool operator==(const MuI&) const = default;
};

/// Static model parameters.
struct ModelParams {
  double gamma = 0.5;      ///< leak in (-1, 1)
  double sigma = 1.0;      ///< noise standard deviation, > 0
  double theta_bar = 0.0;  ///< threshold mean
  double theta_std = 0.0;  ///< threshold standard deviation, >= 0
  double j_bar = 0.0;      ///< synaptic mean scale (weight mean is j_bar / N)
  int T = 1;               ///< time horizon, >= 1 (states at t = 0..T)
  double g = 1.0;          ///< firing-rate gain, > 0
  MuI mu_I;                ///< initial-condition law

  /// Throws std::invalid_argument on an out-of-range field.
  void validate() const;
};

/// Triple (k, l, value) used to assemble a correlation table.
struct LambdaEntry {
  int k = 0;
  int l = 0;
  double value = 0.0;
};

/// Even, finitely supported synaptic correlation table Lambda(k, l) for
/// |k|, |l| <= d.  Evenness means Lambda(-k, -l) = Lambda(k, l).
class LambdaSpec {
 public:
  /// Builds from sparse entries; the even partner of each entry is filled in
  /// automatically.  Throws std::invalid_argument if d < 0, an entry lies
  /// outside the support, or two entries assign inconsistent values to the
  /// same cell (directly or through evenness).
  LambdaSpec(int d, const std::vector<LambdaEntry>& entries);

  /// Builds from a full (2d+1) x (2d+1) table, row index k + d, column l + d.
  /// Evenness is *not* enforced here; validate_lambda reports violations.
  LambdaSpec(int d, const Eigen::MatrixXd& table);

  int d() const { return d_; }

  /// Lambda(k, l); zero outside the support.
  double at(int k, int l) const {
    if (std::abs(k) > d_ || std::abs(l) > d_) return 0.0;
    return table_(k + d_, l + d_);
  }

  const Eigen::MatrixXd& table() const { return table_; }

  /// sum of |Lambda(k, l)| over the support.
  double lambda_sum() const;

  /// sum of Lambda(k, l) over the support (the zero-frequency value).
  double lambda_min() const;

  /// FNV-1a hash of (d, table bytes); stable content fingerprint.
  std::uint64_t hash() const;

  bool operator==(const LambdaSpec& o) const {
    return d_ == o.d_ && table_ == o.table_;
  }

 private:
  int d_;
  Eigen::MatrixXd table_;
};

/// One failed validity check.
struct Violation {
  std::string check;     ///< "evenness", "lambda_min", "spectrum", "dft_grid"
  std::string location;  ///< human-readable position of the worst offence
  double value = 0.0;    ///< offending value
};

/// Result of validate_lambda.
struct ValidationReport {
  bool valid = false;
  double lambda_sum = 0.0;
  double lambda_min = 0.0;
  double min_spectrum = 0.0;  ///< min of the continuous spectrum on the grid
  std::vector<Violation> violations;
};

/// Checks a correlation table for evenness, a positive zero-frequency sum,
/// a nonnegative continuous spectrum
///   Lambda~(w1, w2) = sum_{k,l} Lambda(k, l) cos(k w1 + l w2)
/// sampled on a grid_resolution^2 uniform grid over [-pi, pi)^2, and
/// nonnegative discrete spectra Lambda~^N(p, q) for every N in odd_sizes.
/// Nonnegativity is judged against tolerance -1e-10 * max(1, Lambda_sum).
ValidationReport validate_lambda(const LambdaSpec& spec, int grid_resolution,
                                 const std::vector<int>& odd_sizes);

/// Constants controlling the rate-function bounds.
struct DerivedConstants {
  double rho_K = 0.0;  ///< T * (theta_std^2 + Lambda_sum); caps every K eigenvalue
  double alpha = 0.0;  ///< rho_K / (sigma^2 + rho_K), in [0, 1)
  double beta1 = 0.0;  ///< T * (theta_std^2 + Lambda_sum) / (2 sigma^2)
  double beta2 = 0.0;  ///< T J^2 (sigma^2 + theta_std^2 + Lambda_sum) / (2 sigma^2 Lambda_min)
};

/// Computes the bound constants; throws std::invalid_argument if
/// lambda_min <= 0 (beta2 would be undefined).
DerivedConstants derived_constants(const ModelParams& params, const LambdaSpec& spec);

}  // namespace ratenet
