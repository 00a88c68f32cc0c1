// The large-deviation rate function for stationary Gaussian candidate
// measures, and the finite-size Radon-Nikodym density it scales from.
//
// The rate of a candidate mu decomposes as H(mu) = I3(mu) - Gamma(mu): I3 is
// the relative-entropy rate of the candidate's innovation field against the
// reference white noise, and Gamma = Gamma1 + Gamma2 collects the spectral
// log-determinant and the quadratic interaction functional built from the
// candidate's own firing moments.  Freezing the moment side at another law
// nu gives the relative variant H^nu, whose unique zero is the Gaussian
// image measure of nu.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <vector>

#include "ratenet/mean_field.hpp"
#include "ratenet/model.hpp"
#include "ratenet/simulation.hpp"
#include "ratenet/spectral.hpp"

namespace ratenet {

/// Signals an (effectively) singular candidate spectral density: the
/// entropy rate diverges, so the rate function is +infinity.
class SingularDensityError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Stationary Gaussian candidate for the innovation field: time-0 layer
/// distributed as mu_I, and (v_1..v_T) a ring-stationary Gaussian family
/// with common mean m and centred covariance lags
///   h_lags.block(k)(s-1, t-1) = cov(v^0_s, v^k_t).
struct GaussianCandidate {
  int T = 0;
  MuI mu_I;
  Eigen::VectorXd m;
  MatrixSeq h_lags;  ///< symmetric-pair; lag 0 includes the full same-neuron
                     ///< covariance (no implicit noise term is added)

  /// Spectral density h(w) = sum_k h^k exp(-i k w) of the centred field.
  SpectralDensity density() const;

  /// The Gaussian image measure of a solved limit law: mean c_e and lags
  /// sigma^2 I delta_{k0} + K_e^k.  Its rate is zero.
  static GaussianCandidate from_limit_law(const LimitLaw& law);
};

/// Finite-ring spectral functional
///   Gamma1^N = -(1/2N) sum_{l=-n}^{n} log det(I + sigma^{-2} K~(2 pi l / N)),
/// with K~ from the lag blocks of cov.  Eigenvalues of K~ below -psd_tol
/// raise std::runtime_error; small negatives are clipped.
double gamma1_finite(const CovSeq& cov, double sigma2, int N,
                     double psd_tol = 1e-10);

/// Its large-N limit
///   Gamma1 = -(1/4 pi) integral log det(I + sigma^{-2} K~(w)) dw,
/// by the Q-point periodic trapezoid rule.  Lies in [-beta1, 0].
double gamma1_limit(const SpectralDensity& Ktilde, double sigma2, int Q,
                    double psd_tol = 1e-10);

/// Quadratic interaction functional of a candidate, with the resolvent
/// density A~ and scaled mean rates c derived from the candidate's own
/// moments:
///   Gamma2 = (1/2 sigma^2) [ (1/2 pi) integral A~(-w) : h(w) dw
///            + m' A~(0) m + c' (A~(0) - I) c + 2 m' (I - A~(0)) c ],
/// where ":" is the entrywise double contraction and the m-terms carry the
/// spectral atom of the uncentred field at w = 0.
double gamma2_candidate(const GaussianCandidate& cand,
                        const SpectralDensity& Atilde,
                        const Eigen::VectorXd& c, double sigma2, int Q);

/// Variant with the moment side frozen at another law nu (resolvent A~ and
/// rates c both taken from nu):
///   Gamma2^nu = (1/2 sigma^2) [ (1/2 pi) integral A~(-w) : h(w) dw
///              + m' A~(0) m - 2 c' A~(0) m + c' A~(0) c
///              + 2 <c, m> - |c|^2 ].
double gamma2_relative(const GaussianCandidate& cand,
                       const SpectralDensity& Atilde_nu,
                       const Eigen::VectorXd& c_nu, double sigma2, int Q);

/// Finite-ring resolvent data at size N: the resolvent evaluated at the ring
/// frequencies 2 pi l / N and its exact inverse-DFT lag blocks.
struct FiniteResolvent {
  int N = 0;
  int T = 0;
  std::vector<Eigen::MatrixXcd> Atilde;  ///< at w_l, index l + n
  std::vector<Eigen::MatrixXd> A_lags;   ///< index k + n
};
FiniteResolvent finite_resolvent(const CovSeq& cov, double sigma2, int N,
                                 double psd_tol = 1e-10);

/// Quadratic interaction term of the finite-ring density, direct form:
///   phi = (1/2 sigma^2) [ (1/N) sum_{j,k} (v^j - c)' A^{(k-j) mod N} (v^k - c)
///         + (2/N) sum_j <c, v^j> - |c|^2 ].
double phi_direct(const FiniteResolvent& fr, const std::vector<Eigen::VectorXd>& v,
                  const Eigen::VectorXd& c, double sigma2);

/// Same functional through the ring DFT vhat^l = sum_j v^j exp(-2 pi i j l/N):
///   phi = (1/2 N^2 sigma^2) sum_l vhat^{l*} A~(-w_l) vhat^l
///         + (1/N sigma^2) vhat^0' (I - A~(0)) c - (1/2 sigma^2) c' (I - A~(0)) c.
double phi_dft(const FiniteResolvent& fr, const std::vector<Eigen::VectorXd>& v,
               const Eigen::VectorXd& c, double sigma2);

/// Log density of the network law against the uncoupled reference measure,
/// evaluated at one configuration u (rows = neurons, columns = times 0..T):
///   log (dQ^N/dP) (u) = N [ Gamma1^N(K^) + phi(v) ],
/// where the moments, covariance lags, and innovations v^j = psi(u^j)_{1..T}
/// are all read off the configuration itself.
double log_rn_density(const Eigen::MatrixXd& u, const ModelParams& params,
                      const LambdaSpec& spec);

/// Closed form of E[exp(a' Z - (b/2) |Z|^2)] for Z ~ N(c, K):
///   det(I + b K)^{-1/2} exp(a' c - (b/2)|c|^2
///       + (1/2)(a - b c)' K (I + b K)^{-1} (a - b c)).
/// Throws std::runtime_error if some eigenvalue x of K has 1 + b x <= 0.
double gaussian_expectation(const Eigen::VectorXd& c, const Eigen::MatrixXd& K,
                            const Eigen::VectorXd& a, double b);

/// Relative-entropy rate of the candidate's innovation field against the
/// reference product white noise of variance sigma^2 (time-0 layers match by
/// precondition):
///   I3 = (1/4 pi) integral [tr(sigma^{-2} h(w)) - T - log det(sigma^{-2} h(w))] dw
///        + |m|^2 / (2 sigma^2).
/// Throws SingularDensityError if h(w) is singular on the grid.
double entropy_rate(const GaussianCandidate& cand, double sigma2, int Q);

/// Full evaluation report.
struct RateReport {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double gamma = 0.0;   ///< gamma1 + gamma2
  double i3 = 0.0;      ///< entropy rate of the candidate
  double h = 0.0;       ///< i3 - gamma, clamped at >= 0 within tol_rate
  double quad_shift = 0.0;  ///< |h(Q) - h(Q/2)| grid-refinement shift
  DerivedConstants bounds;  ///< rho_K, alpha, beta1, beta2 for this model
};

/// Evaluation options.
struct RateOptions {
  int omega_grid = 512;   ///< Q-point frequency rule
  int gh_nodes = 40;      ///< Gauss-Hermite order for candidate moments
  double psd_tol = 1e-10;
  double tol_rate = 1e-5;  ///< H below -tol_rate is an internal error
};

/// Rate of a Gaussian candidate: derives the candidate's firing moments with
/// the shared Gaussian engine, assembles Gamma1 + Gamma2 from them, and
/// subtracts from the entropy rate.  The candidate's time-0 law must equal
/// params.mu_I (rejected otherwise); H < -tol_rate raises a logic error.
RateReport rate_H(const GaussianCandidate& cand, const ModelParams& params,
                  const LambdaSpec& spec, const RateOptions& opts = {});

/// Relative rate H^nu with the moment side frozen at the law nu.  Zero
/// exactly at the Gaussian image measure of nu.
RateReport rate_H_relative(const GaussianCandidate& cand, const LimitLaw& nu,
                           const RateOptions& opts = {});

}  // namespace ratenet
