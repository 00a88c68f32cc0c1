// Gauss-Hermite quadrature (physicists' convention) via the Golub-Welsch
// eigenvalue method: nodes are the eigenvalues of the Jacobi matrix of the
// Hermite recurrence, weights come from the first eigenvector components.
// Used for all one- and two-dimensional Gaussian expectations of the firing
// rate in the limit-law solver and the rate function.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace ratenet {

/// Nodes x_i and weights w_i with sum_i w_i h(x_i) ~ integral h(x) e^{-x^2} dx.
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;

  /// Builds the Q-point rule; throws std::invalid_argument if Q < 1.
  explicit GaussHermite(int Q);

  int size() const { return static_cast<int>(nodes.size()); }

  /// E[h(X)] for X ~ N(mean, var); var < 0 within -1e-14 is treated as 0.
  double expect1(double mean, double var,
                 const std::function<double(double)>& h) const;

  /// E[h(X, Y)] for (X, Y) jointly Gaussian with means (mx, my) and
  /// covariance [[vxx, cxy], [cxy, vyy]].  The covariance is symmetrized and
  /// eigendecomposed; eigenvalues below -psd_tol raise std::runtime_error,
  /// small negatives are clipped to zero (degenerate directions collapse to
  /// point masses, so Dirac initial conditions cost nothing extra).
  double expect2(double mx, double my, double vxx, double cxy, double vyy,
                 const std::function<double(double, double)>& h,
                 double psd_tol = 1e-10) const;
};

}  // namespace ratenet
