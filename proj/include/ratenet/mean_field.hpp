// The mean-field limit law and the moment map that characterizes it.
//
// A candidate limit is summarized by its firing moments: the scaled mean
// rates c_t and the ring-lag correlation blocks M^l.  These induce the
// innovation covariance lags K^l, which in turn define a stationary Gaussian
// field; pushing that field through the network map and integrating the
// firing rate yields new moments.  The limit law is the fixed point, and the
// triangular (causal) structure of the map lets it be solved exactly in T
// steps.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ratenet/model.hpp"
#include "ratenet/quadrature.hpp"
#include "ratenet/spectral.hpp"

namespace ratenet {

/// Firing moments of a (candidate) limit law:
///   c(t-1)            = j_bar * E[f(u^0_{t-1})],          t = 1..T,
///   M[l + d](s-1,t-1) = E[f(u^0_{s-1}) f(u^l_{t-1})],     s, t = 1..T,
/// for ring lags |l| <= d, with transpose(M^{-l}) = M^l.
struct MomentData {
  int T = 0;
  int d = 0;
  Eigen::VectorXd c;
  std::vector<Eigen::MatrixXd> M;  ///< index l + d

  static MomentData zero(int T, int d);
  const Eigen::MatrixXd& Mblock(int l) const { return M.at(l + d); }
  Eigen::MatrixXd& Mblock(int l) { return M.at(l + d); }

  /// Checks entries of M in [0, 1], |c| <= |j_bar|, the transpose pairing,
  /// and positive semidefiniteness of the symmetrized M^0.  Throws
  /// std::runtime_error with the failing condition.
  void check_valid(double j_bar, double tol = 1e-9) const;
};

/// Innovation covariance lags
///   K[k + d](s-1, t-1) = theta_std^2 delta_{k0}
///                        + sum_{|l| <= d} Lambda(k, l) M^l(s-1, t-1).
struct CovSeq {
  int T = 0;
  int d = 0;
  std::vector<Eigen::MatrixXd> K;  ///< index k + d

  static CovSeq zero(int T, int d);
  const Eigen::MatrixXd& block(int k) const { return K.at(k + d); }
  Eigen::MatrixXd& block(int k) { return K.at(k + d); }

  /// View as a generic symmetric-pair lag sequence.
  MatrixSeq to_seq() const;

  /// trace of K^0; bounded by T (theta_std^2 + Lambda_sum).
  double trace0() const;
};

/// Builds the covariance lags from moments; requires matching (T, d).
CovSeq cov_from_moments(const MomentData& m, const LambdaSpec& spec,
                        double theta_std);

/// Quadrature and variant switches for the moment map.
struct QuadOptions {
  int gh_nodes = 40;           ///< Gauss-Hermite points per dimension
  double psd_tol = 1e-10;      ///< covariance clipping tolerance
  bool strict_innovation_cov = false;  ///< drop the sigma^2 term from the
                                       ///< same-time innovation covariance
                                       ///< (literal published recursion)
  double residual_threshold = 1e-5;  ///< max admissible node-doubling shift
};

/// Gaussian integration engine for the per-neuron innovation field.  The
/// field is v_0 ~ mu_I and (v_1..v_T) Gaussian with the given mean and
/// same-neuron covariance; cross[l-1] holds cov(v^0_u, v^l_w) for ring lag
/// l = 1..d.  Potentials are the affine images u_{t-1} = Psi^{-1}(v)_{t-1},
/// so every firing expectation is a 1- or 2-D Gaussian integral.
class GaussianMomentEngine {
 public:
  GaussianMomentEngine(const ModelParams& params, Eigen::VectorXd mean,
                       Eigen::MatrixXd cov0, std::vector<Eigen::MatrixXd> cross,
                       const GaussHermite& gh);

  /// E[f(u^0_{t-1})], t = 1..T.
  double mean_entry(int t) const;

  /// E[f(u^0_{s-1}) f(u^l_{t-1})], l = 0..d (lag -l follows by transpose).
  double second_entry(int l, int s, int t) const;

  /// All moments up to ring lag d.
  MomentData all(int d) const;

 private:
  struct Affine {
    double k0 = 0.0;     ///< coefficient on v_0
    Eigen::VectorXd a;   ///< coefficients on v_1..v_{t-1}
    double b = 0.0;      ///< constant
  };
  Affine functional(int t) const;

  const ModelParams& params_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov0_;
  std::vector<Eigen::MatrixXd> cross_;
  const GaussHermite& gh_;
};

/// Applies the full moment map L to candidate moments: builds the innovation
/// field of m and integrates the firing moments of its pushforward.  Entries
/// of the output at times <= t depend only on input entries at times < t.
/// Throws std::runtime_error if the node-doubling residual of the result
/// exceeds opts.residual_threshold.
MomentData limit_map_L(const MomentData& m, const ModelParams& params,
                       const LambdaSpec& spec, const QuadOptions& opts);

/// Solved limit law.
struct LimitLaw {
  ModelParams params;
  LambdaSpec lambda;
  MomentData moments;  ///< fixed point of the moment map
  CovSeq cov;          ///< its innovation covariance lags K_e
  int gh_nodes = 0;
  double residual = 0.0;  ///< max |change| under node doubling
};

/// Solves the fixed point exactly in T triangular steps: entries at time t
/// are computed from the already-known entries at times < t.  The returned
/// residual compares the whole solution against a run with doubled
/// Gauss-Hermite order.
LimitLaw solve_limit_law(const ModelParams& params, const LambdaSpec& spec,
                         const QuadOptions& opts);

/// Spectral package of an innovation covariance: the density K~, its
/// resolvent transform A~ = K~ (sigma^2 I + K~)^{-1}, and the lag blocks of
/// A~ recovered by quadrature.  Verifies max eig K~(w) <= rho_K and
/// max eig A~(w) <= alpha = rho_K / (sigma^2 + rho_K) on the grid.
struct SpectralPack {
  SpectralDensity Ktilde;
  SpectralDensity Atilde;
  MatrixSeq A_lags;
  double A_tail = 0.0;
  double max_eig_K = 0.0;
  double max_eig_A = 0.0;
};
SpectralPack spectral_pack(const CovSeq& cov, double sigma2, double rho_K,
                           int Q, int L_out, double psd_tol = 1e-10);

}  // namespace ratenet
