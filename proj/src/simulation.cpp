#include "ratenet/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace ratenet {

namespace {
// Sums in ascending value order: the result is invariant under any
// permutation of the inputs, which makes ring relabelling exact.
double sorted_sum(std::vector<double>& vals) {
  std::sort(vals.begin(), vals.end());
  double acc = 0.0;
  for (double v : vals) acc += v;
  return acc;
}
}  // namespace

Trajectory simulate(const ModelParams& params, const WeightMatrix& weights,
                    const NoiseBundle& noise) {
  params.validate();
  const int N = weights.N;
  const int T = params.T;
  if (weights.W.rows() != N || weights.W.cols() != N)
    throw std::invalid_argument("weight matrix size mismatch");
  if (noise.thresholds.size() != N || noise.initial.size() != N ||
      noise.noise.rows() != N || noise.noise.cols() != T)
    throw std::invalid_argument("noise bundle size mismatch");
  const int n = (N - 1) / 2;

  Trajectory traj;
  traj.N = N;
  traj.T = T;
  traj.U.resize(N, T + 1);
  traj.U.col(0) = noise.initial;

  Eigen::VectorXd rates(N);
  for (int t = 1; t <= T; ++t) {
    for (int i = 0; i < N; ++i) rates(i) = sigmoid(traj.U(i, t - 1), params.g);
    for (int j = 0; j < N; ++j) {
      double coupling = 0.0;
      for (int i = 0; i < N; ++i) coupling += weights.W(j, i) * rates(i);
      const double u = params.gamma * traj.U(j, t - 1) + coupling +
                       noise.thresholds(j) + noise.noise(j, t - 1);
      if (!std::isfinite(u)) {
        std::ostringstream os;
        os << "potential diverged at neuron j = " << (j - n) << ", time t = " << t;
        throw std::runtime_error(os.str());
      }
      traj.U(j, t) = u;
    }
  }
  return traj;
}

EmpiricalMoments empirical_moments(const Trajectory& traj,
                                   const ModelParams& params, int K_lag) {
  const int N = traj.N;
  const int T = traj.T;
  if (K_lag < 0) throw std::invalid_argument("K_lag must be nonnegative");
  if (2 * K_lag + 1 > N) throw std::invalid_argument("K_lag too large for ring size");

  // Firing rates at times 0..T-1 (all the recursion ever reads).
  Eigen::MatrixXd rates(N, T);
  for (int j = 0; j < N; ++j)
    for (int t = 0; t < T; ++t) rates(j, t) = sigmoid(traj.U(j, t), params.g);

  EmpiricalMoments out;
  out.T = T;
  out.K_lag = K_lag;
  out.c_hat.resize(T);
  std::vector<double> terms(N);
  for (int t = 0; t < T; ++t) {
    for (int j = 0; j < N; ++j) terms[j] = rates(j, t);
    out.c_hat(t) = params.j_bar * sorted_sum(terms) / N;
  }

  out.M_hat.assign(2 * K_lag + 1, Eigen::MatrixXd::Zero(T, T));
  for (int k = -K_lag; k <= K_lag; ++k) {
    Eigen::MatrixXd& M = out.M_hat[k + K_lag];
    for (int s = 0; s < T; ++s)
      for (int t = 0; t < T; ++t) {
        for (int j = 0; j < N; ++j) terms[j] = rates(j, s) * rates((j + k + N) % N, t);
        M(s, t) = sorted_sum(terms) / N;
      }
  }
  return out;
}

Eigen::VectorXd psi(const Eigen::VectorXd& u, const ModelParams& params) {
  const Eigen::Index T = u.size() - 1;
  if (T < 0) throw std::invalid_argument("path must contain the time-0 state");
  Eigen::VectorXd v(T + 1);
  v(0) = u(0);
  for (Eigen::Index s = 1; s <= T; ++s)
    v(s) = u(s) - params.gamma * u(s - 1) - params.theta_bar;
  return v;
}

Eigen::VectorXd psi_inverse(const Eigen::VectorXd& v, const ModelParams& params) {
  const Eigen::Index T = v.size() - 1;
  if (T < 0) throw std::invalid_argument("path must contain the time-0 coordinate");
  Eigen::VectorXd u(T + 1);
  u(0) = v(0);
  for (Eigen::Index t = 1; t <= T; ++t)
    u(t) = params.gamma * u(t - 1) + params.theta_bar + v(t);
  return u;
}

}  // namespace ratenet
