// Spectral utilities shared by the sampler, the limit law, and the rate
// function: discrete Fourier transforms of the correlation table, block
// spectra of lag sequences, spectral densities and their resolvent
// transform, and the unitary real DFT ("dagger") coordinates on ring paths.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "ratenet/model.hpp"

namespace ratenet {

/// Two-sided sequence of real T x T blocks B^l, l in [-L, L], the lag
/// coefficients of a matrix-valued function on the circle.  When
/// symmetric_pair is set the sequence satisfies B^{-l} = transpose(B^l),
/// which makes its spectral density Hermitian.
struct MatrixSeq {
  int T = 0;
  int L = 0;
  bool symmetric_pair = false;
  std::vector<Eigen::MatrixXd> blocks;  ///< index l + L

  static MatrixSeq zero(int T, int L, bool symmetric_pair);

  const Eigen::MatrixXd& block(int l) const { return blocks.at(l + L); }
  Eigen::MatrixXd& block(int l) { return blocks.at(l + L); }

  /// Max |B^{-l} - transpose(B^l)| over all lags; zero for a valid pair.
  double symmetry_defect() const;
};

/// Matrix-valued spectral density w -> T x T complex Hermitian matrix.
/// Wraps an evaluator; when the density is a trigonometric polynomial its
/// lag sequence is retained for exact finite computations.
class SpectralDensity {
 public:
  using Evaluator = std::function<Eigen::MatrixXcd(double)>;

  SpectralDensity(int T, Evaluator eval, std::optional<MatrixSeq> lags = std::nullopt)
      : T_(T), eval_(std::move(eval)), lags_(std::move(lags)) {}

  int block_size() const { return T_; }
  Eigen::MatrixXcd at(double omega) const { return eval_(omega); }
  const std::optional<MatrixSeq>& lags() const { return lags_; }

 private:
  int T_;
  Evaluator eval_;
  std::optional<MatrixSeq> lags_;
};

/// Discrete spectrum of the correlation table on the N x N frequency grid:
///   grid(p + n, q + n) = sum_{k,l} Lambda(k, l) cos(2 pi (p k + q l) / N),
/// real by evenness.  Throws std::invalid_argument if N is even or
/// N < 2 d + 1.
Eigen::MatrixXd dft2(const LambdaSpec& spec, int N);

/// Inverse of dft2 (test oracle): recovers the table entries
///   Lambda(k, l) = (1/N^2) sum_{p,q} grid(p, q) cos(2 pi (p k + q l) / N).
Eigen::MatrixXd dft2_roundtrip(const Eigen::MatrixXd& grid, int d);

/// Frequency blocks of a lag sequence at ring size N = 2n+1:
///   Btilde^j = sum_l B^l exp(-2 pi i j l / N),  j in [-n, n] (index j + n).
/// Requires N odd and N >= 2L+1.
std::vector<Eigen::MatrixXcd> block_dft_blocks(const MatrixSeq& seq, int N);

/// Sorted eigenvalues (all N*T of them) of the block-circulant matrix built
/// from the sequence, computed through its frequency blocks.
std::vector<double> block_dft_eigvals(const MatrixSeq& seq, int N);

/// Dense (N T) x (N T) block-circulant matrix with T x T block (j, k) equal
/// to B^{(k - j) mod N} (mod mapped to [-n, n]).  Oracle-sized helper.
Eigen::MatrixXd block_circulant_dense(const MatrixSeq& seq, int N);

/// Spectral density of a symmetric-pair lag sequence:
///   S(w) = sum_l B^l exp(-i l w).
SpectralDensity density(const MatrixSeq& seq);

/// Resolvent transform S -> S (sigma^2 I + S)^{-1}, evaluated through the
/// eigendecomposition of S(w) so the result is exactly Hermitian, commutes
/// with S(w), and has eigenvalues x/(sigma^2+x) in [0, 1).  Eigenvalues of
/// S(w) below -psd_tol raise std::runtime_error; small negatives are clipped.
SpectralDensity resolvent_transform(const SpectralDensity& s, double sigma2,
                                    double psd_tol);

/// Lag blocks recovered from a spectral density by quadrature:
///   B^l = (1/2 pi) integral S(w) exp(i l w) dw,  |l| <= L_out,
/// using the Q-point periodic trapezoid rule (spectrally accurate).  Returns
/// the sequence and a tail estimate, the largest |B^l| entry at |l| = L_out.
struct InverseFourierResult {
  MatrixSeq seq;
  double tail = 0.0;
};
InverseFourierResult inverse_fourier_blocks(const SpectralDensity& s, int L_out,
                                            int Q);

/// Periodic trapezoid rule for integral_{-pi}^{pi} f(w) dw: the Q-point
/// uniform rule (2 pi / Q) sum_j f(-pi + 2 pi j / Q); endpoint weights
/// coalesce by periodicity, and convergence is spectral for smooth f.
double periodic_trapezoid(int Q, const std::function<double(double)>& f);

/// Real orthogonal DFT coordinates of a ring path family v^{-n..n} (each a
/// real vector of common length): with vhat^k = sum_j v^j exp(-2 pi i j k/N),
///   out^k = sqrt(2) * Im(vhat^k)   for k < 0,
///   out^0 = vhat^0,
///   out^k = sqrt(2) * Re(vhat^k)   for k > 0.
/// Satisfies sum_k |out^k|^2 = N sum_j |v^j|^2.
std::vector<Eigen::VectorXd> dag_transform(const std::vector<Eigen::VectorXd>& v);

/// Inverse of dag_transform.
std::vector<Eigen::VectorXd> dag_inverse(const std::vector<Eigen::VectorXd>& w);

}  // namespace ratenet
