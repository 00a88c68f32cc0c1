#include "ratenet/rate.hpp"

#include <cmath>
#include <complex>
#include <sstream>

#include "ratenet/quadrature.hpp"

namespace ratenet {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr std::complex<double> kI{0.0, 1.0};

// Eigenvalues of the Hermitian part of a density evaluation, clipped at
// -psd_tol (relative to the largest magnitude) and floored at zero.
Eigen::VectorXd psd_eigs(const Eigen::MatrixXcd& raw, double psd_tol,
                         const char* what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
      Eigen::MatrixXcd(0.5 * (raw + raw.adjoint())));
  Eigen::VectorXd lam = es.eigenvalues();
  const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  for (int i = 0; i < lam.size(); ++i) {
    if (lam(i) < -psd_tol * scale) {
      std::ostringstream os;
      os << what << " has negative eigenvalue " << lam(i);
      throw std::runtime_error(os.str());
    }
    lam(i) = std::max(lam(i), 0.0);
  }
  return lam;
}

// Entrywise double contraction sum_{s,t} A(s,t) B(s,t) of two complex
// matrices; real part returned.
double contract(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
  return (A.array() * B.array()).sum().real();
}
}  // namespace

SpectralDensity GaussianCandidate::density() const {
  return ratenet::density(h_lags);
}

GaussianCandidate GaussianCandidate::from_limit_law(const LimitLaw& law) {
  GaussianCandidate cand;
  cand.T = law.params.T;
  cand.mu_I = law.params.mu_I;
  cand.m = law.moments.c;
  cand.h_lags = law.cov.to_seq();
  cand.h_lags.block(0) += law.params.sigma * law.params.sigma *
                          Eigen::MatrixXd::Identity(cand.T, cand.T);
  return cand;
}

double gamma1_finite(const CovSeq& cov, double sigma2, int N, double psd_tol) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be positive");
  const SpectralDensity Kt = density(cov.to_seq());
  const int n = (N - 1) / 2;
  if (N < 1 || N % 2 == 0) throw std::invalid_argument("ring size N must be odd");
  double acc = 0.0;
  for (int l = -n; l <= n; ++l) {
    const Eigen::VectorXd lam =
        psd_eigs(Kt.at(2.0 * kPi * l / N), psd_tol, "innovation covariance density");
    for (int i = 0; i < lam.size(); ++i) acc += std::log1p(lam(i) / sigma2);
  }
  return -acc / (2.0 * N);
}

double gamma1_limit(const SpectralDensity& Ktilde, double sigma2, int Q,
                    double psd_tol) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be positive");
  const double integral = periodic_trapezoid(Q, [&](double w) {
    const Eigen::VectorXd lam = psd_eigs(Ktilde.at(w), psd_tol,
                                         "innovation covariance density");
    double v = 0.0;
    for (int i = 0; i < lam.size(); ++i) v += std::log1p(lam(i) / sigma2);
    return v;
  });
  return -integral / (4.0 * kPi);
}

double gamma2_candidate(const GaussianCandidate& cand,
                        const SpectralDensity& Atilde,
                        const Eigen::VectorXd& c, double sigma2, int Q) {
  const SpectralDensity h = cand.density();
  const double spectral = periodic_trapezoid(Q, [&](double w) {
                            return contract(Atilde.at(-w), h.at(w));
                          }) /
                          (2.0 * kPi);
  const Eigen::MatrixXd A0 = Atilde.at(0.0).real();
  const Eigen::VectorXd& m = cand.m;
  const double atom = m.dot(A0 * m);
  const double quad = c.dot((A0 * c)) - c.squaredNorm();
  const double cross = 2.0 * m.dot(c - A0 * c);
  return (spectral + atom + quad + cross) / (2.0 * sigma2);
}

double gamma2_relative(const GaussianCandidate& cand,
                       const SpectralDensity& Atilde_nu,
                       const Eigen::VectorXd& c_nu, double sigma2, int Q) {
  const SpectralDensity h = cand.density();
  const double spectral = periodic_trapezoid(Q, [&](double w) {
                            return contract(Atilde_nu.at(-w), h.at(w));
                          }) /
                          (2.0 * kPi);
  const Eigen::MatrixXd A0 = Atilde_nu.at(0.0).real();
  const Eigen::VectorXd& m = cand.m;
  const double atom = m.dot(A0 * m);
  const double rest = -2.0 * c_nu.dot(A0 * m) + c_nu.dot(A0 * c_nu) +
                      2.0 * c_nu.dot(m) - c_nu.squaredNorm();
  return (spectral + atom + rest) / (2.0 * sigma2);
}

FiniteResolvent finite_resolvent(const CovSeq& cov, double sigma2, int N,
                                 double psd_tol) {
  if (N < 1 || N % 2 == 0) throw std::invalid_argument("ring size N must be odd");
  if (N < 2 * cov.d + 1)
    throw std::invalid_argument("ring size N must be at least 2d+1");
  const int n = (N - 1) / 2;
  const SpectralDensity Kt = density(cov.to_seq());
  const SpectralDensity At = resolvent_transform(Kt, sigma2, psd_tol);
  FiniteResolvent fr;
  fr.N = N;
  fr.T = cov.T;
  fr.Atilde.resize(N);
  for (int l = -n; l <= n; ++l) fr.Atilde[l + n] = At.at(2.0 * kPi * l / N);
  fr.A_lags.resize(N);
  for (int k = -n; k <= n; ++k) {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(cov.T, cov.T);
    for (int l = -n; l <= n; ++l)
      acc += fr.Atilde[l + n] *
             std::exp(2.0 * kPi * kI * (static_cast<double>(k) * l / N));
    fr.A_lags[k + n] = acc.real() / static_cast<double>(N);
  }
  return fr;
}

double phi_direct(const FiniteResolvent& fr, const std::vector<Eigen::VectorXd>& v,
                  const Eigen::VectorXd& c, double sigma2) {
  const int N = fr.N;
  const int n = (N - 1) / 2;
  if (static_cast<int>(v.size()) != N)
    throw std::invalid_argument("path family size must equal N");
  double quad = 0.0;
  for (int j = 0; j < N; ++j)
    for (int k = 0; k < N; ++k) {
      int lag = (k - j) % N;
      if (lag > n) lag -= N;
      if (lag < -n) lag += N;
      quad += (v[j] - c).dot(fr.A_lags[lag + n] * (v[k] - c));
    }
  double lin = 0.0;
  for (int j = 0; j < N; ++j) lin += c.dot(v[j]);
  return (quad / N + 2.0 * lin / N - c.squaredNorm()) / (2.0 * sigma2);
}

double phi_dft(const FiniteResolvent& fr, const std::vector<Eigen::VectorXd>& v,
               const Eigen::VectorXd& c, double sigma2) {
  const int N = fr.N;
  const int n = (N - 1) / 2;
  if (static_cast<int>(v.size()) != N)
    throw std::invalid_argument("path family size must equal N");
  std::vector<Eigen::VectorXcd> hat(N);
  for (int l = -n; l <= n; ++l) {
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(fr.T);
    for (int j = -n; j <= n; ++j)
      acc += std::exp(-2.0 * kPi * kI * (static_cast<double>(j) * l / N)) *
             v[j + n].cast<std::complex<double>>();
    hat[l + n] = acc;
  }
  std::complex<double> quad = 0.0;
  for (int l = -n; l <= n; ++l)
    quad += hat[l + n].dot(fr.Atilde[-l + n] * hat[l + n]);
  const Eigen::MatrixXd A0 = fr.Atilde[n].real();
  const Eigen::VectorXd v0 = hat[n].real();
  const double mid = v0.dot(c - A0 * c) / (N * sigma2);
  const double last = c.dot(c - A0 * c) / (2.0 * sigma2);
  return quad.real() / (2.0 * static_cast<double>(N) * N * sigma2) + mid - last;
}

double log_rn_density(const Eigen::MatrixXd& u, const ModelParams& params,
                      const LambdaSpec& spec) {
  params.validate();
  const int N = static_cast<int>(u.rows());
  if (u.cols() != params.T + 1)
    throw std::invalid_argument("configuration must have T+1 columns");
  if (N % 2 == 0 || N < 2 * spec.d() + 1)
    throw std::invalid_argument("configuration needs an odd ring of size >= 2d+1");
  Trajectory traj{N, params.T, u};
  const EmpiricalMoments emp = empirical_moments(traj, params, spec.d());
  MomentData m = MomentData::zero(params.T, spec.d());
  m.c = emp.c_hat;
  for (int l = -spec.d(); l <= spec.d(); ++l) m.Mblock(l) = emp.M_hat[l + spec.d()];
  const CovSeq K = cov_from_moments(m, spec, params.theta_std);
  const double s2 = params.sigma * params.sigma;
  const double g1 = gamma1_finite(K, s2, N);
  const FiniteResolvent fr = finite_resolvent(K, s2, N);
  std::vector<Eigen::VectorXd> v(N);
  for (int j = 0; j < N; ++j)
    v[j] = psi(u.row(j).transpose(), params).tail(params.T);
  return N * (g1 + phi_dft(fr, v, m.c, s2));
}

double gaussian_expectation(const Eigen::VectorXd& c, const Eigen::MatrixXd& K,
                            const Eigen::VectorXd& a, double b) {
  const Eigen::Index p = c.size();
  if (K.rows() != p || K.cols() != p || a.size() != p)
    throw std::invalid_argument("dimension mismatch in Gaussian expectation");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (K + K.transpose()));
  const Eigen::VectorXd lam = es.eigenvalues();
  const Eigen::VectorXd w = es.eigenvectors().transpose() * (a - b * c);
  double logdet = 0.0;
  double quadform = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    const double m = 1.0 + b * lam(i);
    if (m <= 0.0)
      throw std::runtime_error("Gaussian expectation undefined: 1 + b*eig(K) <= 0");
    logdet += std::log(m);
    quadform += w(i) * w(i) * lam(i) / m;
  }
  return std::exp(-0.5 * logdet + a.dot(c) - 0.5 * b * c.squaredNorm() +
                  0.5 * quadform);
}

double entropy_rate(const GaussianCandidate& cand, double sigma2, int Q) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be positive");
  const SpectralDensity h = cand.density();
  const double integral = periodic_trapezoid(Q, [&](double w) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        Eigen::MatrixXcd(0.5 * (h.at(w) + h.at(w).adjoint())));
    double val = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
      const double lam = es.eigenvalues()(i);
      if (lam <= 1e-13 * sigma2) {
        std::ostringstream os;
        os << "candidate spectral density singular at omega = " << w
           << " (eigenvalue " << lam << "): entropy rate diverges";
        throw SingularDensityError(os.str());
      }
      const double r = lam / sigma2;
      val += r - 1.0 - std::log(r);
    }
    return val;
  });
  return integral / (4.0 * kPi) + cand.m.squaredNorm() / (2.0 * sigma2);
}

namespace {

struct GammaParts {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double i3 = 0.0;
};

GammaParts evaluate_parts(const GaussianCandidate& cand, const ModelParams& params,
                          const LambdaSpec& spec, const RateOptions& opts, int Q) {
  // The candidate's own firing moments (its innovation field pushed through
  // the network map), integrated with the shared Gaussian engine.
  const GaussHermite gh(opts.gh_nodes);
  Eigen::MatrixXd cov0 = cand.h_lags.block(0);
  std::vector<Eigen::MatrixXd> cross;
  for (int l = 1; l <= spec.d(); ++l)
    cross.push_back(l <= cand.h_lags.L ? cand.h_lags.block(l)
                                       : Eigen::MatrixXd::Zero(cand.T, cand.T));
  const GaussianMomentEngine engine(params, cand.m, std::move(cov0),
                                    std::move(cross), gh);
  const MomentData moments = engine.all(spec.d());
  const CovSeq K = cov_from_moments(moments, spec, params.theta_std);
  const double s2 = params.sigma * params.sigma;
  const SpectralDensity Kt = density(K.to_seq());
  GammaParts parts;
  parts.gamma1 = gamma1_limit(Kt, s2, Q, opts.psd_tol);
  const SpectralDensity At = resolvent_transform(Kt, s2, opts.psd_tol);
  parts.gamma2 = gamma2_candidate(cand, At, moments.c, s2, Q);
  parts.i3 = entropy_rate(cand, s2, Q);
  return parts;
}

}  // namespace

RateReport rate_H(const GaussianCandidate& cand, const ModelParams& params,
                  const LambdaSpec& spec, const RateOptions& opts) {
  params.validate();
  if (!(cand.mu_I == params.mu_I))
    throw std::invalid_argument(
        "candidate time-0 law must match the model's initial law");
  if (cand.T != params.T)
    throw std::invalid_argument("candidate horizon does not match T");
  if (cand.h_lags.symmetry_defect() > 1e-9)
    throw std::invalid_argument("candidate lags violate the transpose pairing");

  const GammaParts full = evaluate_parts(cand, params, spec, opts, opts.omega_grid);
  const GammaParts half =
      evaluate_parts(cand, params, spec, opts, std::max(8, opts.omega_grid / 2));
  RateReport report;
  report.gamma1 = full.gamma1;
  report.gamma2 = full.gamma2;
  report.gamma = full.gamma1 + full.gamma2;
  report.i3 = full.i3;
  report.h = full.i3 - report.gamma;
  report.quad_shift =
      std::abs(report.h - (half.i3 - half.gamma1 - half.gamma2));
  report.bounds = derived_constants(params, spec);
  if (report.h < -opts.tol_rate) {
    std::ostringstream os;
    os << "rate evaluated below zero (" << report.h
       << "): inconsistent candidate evaluation";
    throw std::runtime_error(os.str());
  }
  return report;
}

RateReport rate_H_relative(const GaussianCandidate& cand, const LimitLaw& nu,
                           const RateOptions& opts) {
  nu.params.validate();
  if (!(cand.mu_I == nu.params.mu_I))
    throw std::invalid_argument(
        "candidate time-0 law must match the model's initial law");
  if (cand.T != nu.params.T)
    throw std::invalid_argument("candidate horizon does not match T");
  const double s2 = nu.params.sigma * nu.params.sigma;
  const int Q = opts.omega_grid;
  const SpectralDensity Kt = density(nu.cov.to_seq());
  const SpectralDensity At = resolvent_transform(Kt, s2, opts.psd_tol);
  RateReport report;
  report.gamma1 = gamma1_limit(Kt, s2, Q, opts.psd_tol);
  report.gamma2 = gamma2_relative(cand, At, nu.moments.c, s2, Q);
  report.gamma = report.gamma1 + report.gamma2;
  report.i3 = entropy_rate(cand, s2, Q);
  report.h = report.i3 - report.gamma;
  report.bounds = derived_constants(nu.params, nu.lambda);
  if (report.h < -opts.tol_rate) {
    std::ostringstream os;
    os << "relative rate evaluated below zero (" << report.h
       << "): inconsistent candidate evaluation";
    throw std::runtime_error(os.str());
  }
  return report;
}

}  // namespace ratenet
