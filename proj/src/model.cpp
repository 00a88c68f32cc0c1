#include "ratenet/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ratenet/spectral.hpp"

namespace ratenet {

void ModelParams::validate() const {
  if (!(std::abs(gamma) < 1.0)) throw std::invalid_argument("gamma must satisfy |gamma| < 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (!(theta_std >= 0.0)) throw std::invalid_argument("theta_std must be nonnegative");
  if (T < 1) throw std::invalid_argument("T must be at least 1");
  if (!(g > 0.0)) throw std::invalid_argument("g must be positive");
  if (mu_I.kind == MuI::Kind::Gaussian && !(mu_I.std >= 0.0))
    throw std::invalid_argument("mu_I std must be nonnegative");
  for (double x : {gamma, sigma, theta_bar, theta_std, j_bar, g, mu_I.mean, mu_I.std})
    if (!std::isfinite(x)) throw std::invalid_argument("model parameter is not finite");
}

LambdaSpec::LambdaSpec(int d, const std::vector<LambdaEntry>& entries) : d_(d) {
  if (d < 0) throw std::invalid_argument("correlation support radius d must be nonnegative");
  const int m = 2 * d + 1;
  table_ = Eigen::MatrixXd::Zero(m, m);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> set =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(m, m, false);
  auto put = [&](int k, int l, double v) {
    if (std::abs(k) > d || std::abs(l) > d) {
      std::ostringstream os;
      os << "correlation entry (" << k << ", " << l << ") outside support radius " << d;
      throw std::invalid_argument(os.str());
    }
    bool& was = set(k + d, l + d);
    double& cell = table_(k + d, l + d);
    if (was && cell != v) {
      std::ostringstream os;
      os << "inconsistent values for correlation entry (" << k << ", " << l << "): "
         << cell << " vs " << v;
      throw std::invalid_argument(os.str());
    }
    cell = v;
    was = true;
  };
  for (const auto& e : entries) {
    if (!std::isfinite(e.value)) throw std::invalid_argument("correlation entry is not finite");
    put(e.k, e.l, e.value);
    put(-e.k, -e.l, e.value);  // evenness completion
  }
}

LambdaSpec::LambdaSpec(int d, const Eigen::MatrixXd& table) : d_(d), table_(table) {
  if (d < 0) throw std::invalid_argument("correlation support radius d must be nonnegative");
  const int m = 2 * d + 1;
  if (table_.rows() != m || table_.cols() != m)
    throw std::invalid_argument("correlation table must be (2d+1) x (2d+1)");
  if (!table_.allFinite()) throw std::invalid_argument("correlation table has non-finite entries");
}

double LambdaSpec::lambda_sum() const { return table_.cwiseAbs().sum(); }

double LambdaSpec::lambda_min() const { return table_.sum(); }

std::uint64_t LambdaSpec::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](const void* p, std::size_t len) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ull;
    }
  };
  mix(&d_, sizeof(d_));
  for (int i = 0; i < table_.rows(); ++i)
    for (int j = 0; j < table_.cols(); ++j) {
      double v = table_(i, j);
      mix(&v, sizeof(v));
    }
  return h;
}

ValidationReport validate_lambda(const LambdaSpec& spec, int grid_resolution,
                                 const std::vector<int>& odd_sizes) {
  if (grid_resolution < 2) throw std::invalid_argument("grid_resolution must be at least 2");
  ValidationReport report;
  report.lambda_sum = spec.lambda_sum();
  report.lambda_min = spec.lambda_min();
  const double tol = 1e-10 * std::max(1.0, report.lambda_sum);
  const int d = spec.d();

  // Evenness of the stored table.
  {
    double worst = 0.0;
    int wk = 0, wl = 0;
    for (int k = -d; k <= d; ++k)
      for (int l = -d; l <= d; ++l) {
        const double diff = std::abs(spec.at(k, l) - spec.at(-k, -l));
        if (diff > worst) {
          worst = diff;
          wk = k;
          wl = l;
        }
      }
    if (worst > 0.0) {
      std::ostringstream os;
      os << "(" << wk << ", " << wl << ")";
      report.violations.push_back({"evenness", os.str(), worst});
    }
  }

  // Positive zero-frequency sum.
  if (!(report.lambda_min > 0.0))
    report.violations.push_back({"lambda_min", "sum over support", report.lambda_min});

  // Continuous spectrum on the grid.
  {
    double min_val = std::numeric_limits<double>::infinity();
    double w1_min = 0.0, w2_min = 0.0;
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < grid_resolution; ++i) {
      const double w1 = -pi + 2.0 * pi * i / grid_resolution;
      for (int j = 0; j < grid_resolution; ++j) {
        const double w2 = -pi + 2.0 * pi * j / grid_resolution;
        double val = 0.0;
        for (int k = -d; k <= d; ++k)
          for (int l = -d; l <= d; ++l) val += spec.at(k, l) * std::cos(k * w1 + l * w2);
        if (val < min_val) {
          min_val = val;
          w1_min = w1;
          w2_min = w2;
        }
      }
    }
    report.min_spectrum = min_val;
    if (min_val < -tol) {
      std::ostringstream os;
      os << "omega = (" << w1_min << ", " << w2_min << ")";
      report.violations.push_back({"spectrum", os.str(), min_val});
    }
  }

  // Discrete spectra.
  for (int N : odd_sizes) {
    const Eigen::MatrixXd grid = dft2(spec, N);
    const int n = (N - 1) / 2;
    double min_val = std::numeric_limits<double>::infinity();
    int pm = 0, qm = 0;
    for (int p = -n; p <= n; ++p)
      for (int q = -n; q <= n; ++q)
        if (grid(p + n, q + n) < min_val) {
          min_val = grid(p + n, q + n);
          pm = p;
          qm = q;
        }
    if (min_val < -tol) {
      std::ostringstream os;
      os << "N = " << N << ", (p, q) = (" << pm << ", " << qm << ")";
      report.violations.push_back({"dft_grid", os.str(), min_val});
    }
  }

  report.valid = report.violations.empty();
  return report;
}

DerivedConstants derived_constants(const ModelParams& params, const LambdaSpec& spec) {
  params.validate();
  const double lam_sum = spec.lambda_sum();
  const double lam_min = spec.lambda_min();
  if (!(lam_min > 0.0))
    throw std::invalid_argument("derived constants need a positive correlation sum");
  const double s2 = params.sigma * params.sigma;
  DerivedConstants c;
  c.rho_K = params.T * (params.theta_std * params.theta_std + lam_sum);
  c.alpha = c.rho_K / (s2 + c.rho_K);
  c.beta1 = c.rho_K / (2.0 * s2);
  c.beta2 = params.T * params.j_bar * params.j_bar *
            (s2 + params.theta_std * params.theta_std + lam_sum) / (2.0 * s2 * lam_min);
  return c;
}

}  // namespace ratenet
