// Samplers for the network's random objects: the correlated Gaussian weight
// matrix (drawn exactly in the ring's Fourier basis), and the thresholds,
// driving noise, and initial conditions.
#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "ratenet/model.hpp"

namespace ratenet {

/// Sampled weight matrix for a ring of N = 2n+1 neurons.  W(a, b) is the
/// weight J_{ab} from presynaptic neuron b onto postsynaptic neuron a, with
/// array index a = j + n for ring label j in [-n, n].
struct WeightMatrix {
  int N = 0;
  Eigen::MatrixXd W;
};

/// Draws W with entries of mean j_bar / N and covariance
///   cov(J_ij, J_kl) = (1/N) Lambda((k - i) mod N, (l - j) mod N)
/// by scaling a Hermitian-paired complex Gaussian field with
/// sqrt(Lambda~^N(p, q) / N) in frequency space and inverting the 2-D DFT.
/// The inverse transform runs through FFTW for N >= 64 and a direct O(N^4)
/// summation below that; force_naive pins the direct path for cross-checks.
/// Throws std::runtime_error if some Lambda~^N(p, q) is negative beyond
/// tolerance or the imaginary residue of the inverse transform exceeds 1e-10.
WeightMatrix sample_weights(const LambdaSpec& spec, double j_bar, int N,
                            std::uint64_t seed, std::uint64_t index = 0,
                            bool force_naive = false);

/// Thresholds, driving noise, and initial potentials for one trial.
struct NoiseBundle {
  Eigen::VectorXd thresholds;  ///< theta_j, length N
  Eigen::MatrixXd noise;       ///< B^j_t, N x T (column t-1 holds B_{t-1})
  Eigen::VectorXd initial;     ///< U^j_0, length N
};

/// Draws thresholds ~ N(theta_bar, theta_std^2), noise ~ N(0, sigma^2), and
/// initial potentials ~ mu_I, each from its own named stream.
NoiseBundle sample_noise_bundle(const ModelParams& params, int N,
                                std::uint64_t seed, std::uint64_t index = 0);

/// Inverse 2-D DFT used by the weight sampler, exposed for cross-checking
/// the FFTW path against the direct summation:
///   out(a, b) = sum_{p,q} in(p, q) exp(+2 pi i (p a + q b) / N), unnormalized.
Eigen::MatrixXcd inverse_dft2(const Eigen::MatrixXcd& in, bool force_naive);

}  // namespace ratenet
