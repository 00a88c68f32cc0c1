// Forward simulation of the network and the empirical statistics the theory
// compares against: the scaled mean firing rate and the ring-averaged firing
// correlations, plus the bijection between potentials and innovations.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ratenet/model.hpp"
#include "ratenet/sampling.hpp"

namespace ratenet {

/// One simulated network path: U(a, t) is the potential of the neuron with
/// array index a = j + n at time t = 0..T.
struct Trajectory {
  int N = 0;
  int T = 0;
  Eigen::MatrixXd U;  ///< N x (T + 1)
};

/// Runs the recursion
///   U^j_t = gamma U^j_{t-1} + sum_{i=-n}^{n} W(j,i) f(U^i_{t-1})
///           + theta_j + B^j_{t-1}
/// with the coupling sum accumulated in the fixed order i = -n..n, so the
/// result is reproducible bit-for-bit.  Throws std::runtime_error naming the
/// (neuron, time) pair if a potential becomes non-finite.
Trajectory simulate(const ModelParams& params, const WeightMatrix& weights,
                    const NoiseBundle& noise);

/// Ring-averaged empirical statistics of one trajectory.
struct EmpiricalMoments {
  int T = 0;
  int K_lag = 0;
  Eigen::VectorXd c_hat;               ///< length T; entry t-1 = c_t
  std::vector<Eigen::MatrixXd> M_hat;  ///< lag k in [-K_lag, K_lag], index k + K_lag
};

/// Computes
///   c_t    = (j_bar / N) sum_j f(U^j_{t-1}),                 t = 1..T,
///   M^k_st = (1/N) sum_j f(U^j_{s-1}) f(U^{(j+k) mod N}_{t-1}),
/// for |k| <= K_lag, stored as M_hat[k + K_lag](s-1, t-1).  Each ring average
/// is accumulated in value-sorted order, so cyclically relabelling the
/// neurons cannot change the floating-point result.
EmpiricalMoments empirical_moments(const Trajectory& traj,
                                   const ModelParams& params, int K_lag);

/// Innovation coordinates of one neuron's path u_{0..T}:
///   v_0 = u_0,  v_s = u_s - gamma u_{s-1} - theta_bar  (s = 1..T).
Eigen::VectorXd psi(const Eigen::VectorXd& u, const ModelParams& params);

/// Inverse map, evaluated by the stable forward recursion
///   u_0 = v_0,  u_t = gamma u_{t-1} + theta_bar + v_t.
Eigen::VectorXd psi_inverse(const Eigen::VectorXd& v, const ModelParams& params);

}  // namespace ratenet
