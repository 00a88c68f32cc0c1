#include "ratenet/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace ratenet {

namespace {
constexpr double kSqrtPi = 1.7724538509055160273;
}

GaussHermite::GaussHermite(int Q) {
  if (Q < 1) throw std::invalid_argument("Gauss-Hermite order must be at least 1");
  // Jacobi matrix of the Hermite recurrence: zero diagonal, off-diagonal
  // sqrt(k/2).  Its eigenvalues are the nodes; the squared first components
  // of the normalized eigenvectors, times sqrt(pi), are the weights.
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(Q, Q);
  for (int k = 1; k < Q; ++k) {
    const double b = std::sqrt(0.5 * k);
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  nodes.resize(Q);
  weights.resize(Q);
  for (int i = 0; i < Q; ++i) {
    nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    weights[i] = kSqrtPi * v0 * v0;
  }
}

double GaussHermite::expect1(double mean, double var,
                             const std::function<double(double)>& h) const {
  if (var < 0.0) {
    if (var < -1e-14) throw std::runtime_error("negative variance in Gaussian expectation");
    var = 0.0;
  }
  if (var == 0.0) return h(mean);
  const double s = std::sqrt(2.0 * var);
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    acc += weights[i] * h(mean + s * nodes[i]);
  return acc / kSqrtPi;
}

double GaussHermite::expect2(double mx, double my, double vxx, double cxy,
                             double vyy,
                             const std::function<double(double, double)>& h,
                             double psd_tol) const {
  Eigen::Matrix2d cov;
  cov << vxx, cxy, cxy, vyy;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  Eigen::Vector2d lam = es.eigenvalues();
  const double scale = std::max(1.0, std::max(std::abs(vxx), std::abs(vyy)));
  for (int i = 0; i < 2; ++i) {
    if (lam(i) < -psd_tol * scale)
      throw std::runtime_error("pair covariance not positive semidefinite");
    lam(i) = std::max(lam(i), 0.0);
  }
  // X = mx + sqrt(2 l1) u1x z1 + sqrt(2 l2) u2x z2 with z ~ e^{-z^2}-weighted.
  const Eigen::Matrix2d U = es.eigenvectors();
  const double s1 = std::sqrt(2.0 * lam(0));
  const double s2 = std::sqrt(2.0 * lam(1));
  const bool live1 = lam(0) > 0.0;
  const bool live2 = lam(1) > 0.0;
  if (!live1 && !live2) return h(mx, my);
  if (live1 != live2) {
    const double s = live1 ? s1 : s2;
    const int col = live1 ? 0 : 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      acc += weights[i] *
             h(mx + s * U(0, col) * nodes[i], my + s * U(1, col) * nodes[i]);
    return acc / kSqrtPi;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double xi = s1 * nodes[i];
    double inner = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      const double yj = s2 * nodes[j];
      inner += weights[j] * h(mx + U(0, 0) * xi + U(0, 1) * yj,
                              my + U(1, 0) * xi + U(1, 1) * yj);
    }
    acc += weights[i] * inner;
  }
  return acc / (kSqrtPi * kSqrtPi);
}

}  // namespace ratenet
