#include "ratenet/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ratenet {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr std::complex<double> kI{0.0, 1.0};

void require_odd_size(int N, int support) {
  if (N < 1 || N % 2 == 0) throw std::invalid_argument("ring size N must be odd and positive");
  if (N < 2 * support + 1)
    throw std::invalid_argument("ring size N must be at least 2 * support + 1");
}
}  // namespace

MatrixSeq MatrixSeq::zero(int T, int L, bool symmetric_pair) {
  MatrixSeq s;
  s.T = T;
  s.L = L;
  s.symmetric_pair = symmetric_pair;
  s.blocks.assign(2 * L + 1, Eigen::MatrixXd::Zero(T, T));
  return s;
}

double MatrixSeq::symmetry_defect() const {
  double worst = 0.0;
  for (int l = 0; l <= L; ++l)
    worst = std::max(worst,
                     (block(-l) - block(l).transpose()).cwiseAbs().maxCoeff());
  return worst;
}

Eigen::MatrixXd dft2(const LambdaSpec& spec, int N) {
  require_odd_size(N, spec.d());
  const int n = (N - 1) / 2;
  const int d = spec.d();
  Eigen::MatrixXd grid(N, N);
  for (int p = -n; p <= n; ++p)
    for (int q = -n; q <= n; ++q) {
      double val = 0.0;
      for (int k = -d; k <= d; ++k)
        for (int l = -d; l <= d; ++l)
          val += spec.at(k, l) * std::cos(2.0 * kPi * (static_cast<double>(p) * k +
                                                       static_cast<double>(q) * l) / N);
      grid(p + n, q + n) = val;
    }
  return grid;
}

Eigen::MatrixXd dft2_roundtrip(const Eigen::MatrixXd& grid, int d) {
  const int N = static_cast<int>(grid.rows());
  require_odd_size(N, d);
  const int n = (N - 1) / 2;
  const int m = 2 * d + 1;
  Eigen::MatrixXd table(m, m);
  for (int k = -d; k <= d; ++k)
    for (int l = -d; l <= d; ++l) {
      double val = 0.0;
      for (int p = -n; p <= n; ++p)
        for (int q = -n; q <= n; ++q)
          val += grid(p + n, q + n) *
                 std::cos(2.0 * kPi * (static_cast<double>(p) * k +
                                       static_cast<double>(q) * l) / N);
      table(k + d, l + d) = val / (static_cast<double>(N) * N);
    }
  return table;
}

std::vector<Eigen::MatrixXcd> block_dft_blocks(const MatrixSeq& seq, int N) {
  require_odd_size(N, seq.L);
  const int n = (N - 1) / 2;
  std::vector<Eigen::MatrixXcd> out(N);
  for (int j = -n; j <= n; ++j) {
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(seq.T, seq.T);
    for (int l = -seq.L; l <= seq.L; ++l)
      b += std::exp(-2.0 * kPi * kI * (static_cast<double>(j) * l / N)) * seq.block(l);
    out[j + n] = b;
  }
  return out;
}

std::vector<double> block_dft_eigvals(const MatrixSeq& seq, int N) {
  std::vector<double> eigs;
  eigs.reserve(static_cast<std::size_t>(N) * seq.T);
  for (const auto& b : block_dft_blocks(seq, N)) {
    const Eigen::MatrixXcd herm = 0.5 * (b + b.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
    for (int i = 0; i < seq.T; ++i) eigs.push_back(es.eigenvalues()(i));
  }
  std::sort(eigs.begin(), eigs.end());
  return eigs;
}

Eigen::MatrixXd block_circulant_dense(const MatrixSeq& seq, int N) {
  require_odd_size(N, seq.L);
  const int T = seq.T;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N) * T,
                                              static_cast<Eigen::Index>(N) * T);
  for (int j = 0; j < N; ++j)
    for (int k = 0; k < N; ++k) {
      int lag = (k - j) % N;
      if (lag > (N - 1) / 2) lag -= N;
      if (lag < -(N - 1) / 2) lag += N;
      if (std::abs(lag) <= seq.L)
        out.block(static_cast<Eigen::Index>(j) * T, static_cast<Eigen::Index>(k) * T, T, T) =
            seq.block(lag);
    }
  return out;
}

SpectralDensity density(const MatrixSeq& seq) {
  MatrixSeq copy = seq;
  auto eval = [copy](double omega) {
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(copy.T, copy.T);
    for (int l = -copy.L; l <= copy.L; ++l)
      b += std::exp(-kI * (static_cast<double>(l) * omega)) * copy.block(l);
    return b;
  };
  return SpectralDensity(seq.T, eval, seq);
}

SpectralDensity resolvent_transform(const SpectralDensity& s, double sigma2,
                                    double psd_tol) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be positive");
  const int T = s.block_size();
  auto eval = [s, sigma2, psd_tol](double omega) {
    const Eigen::MatrixXcd raw = s.at(omega);
    const Eigen::MatrixXcd herm = 0.5 * (raw + raw.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
    Eigen::VectorXd lam = es.eigenvalues();
    for (int i = 0; i < lam.size(); ++i) {
      if (lam(i) < -psd_tol) {
        std::ostringstream os;
        os << "spectral density not positive semidefinite at omega = " << omega
           << " (eigenvalue " << lam(i) << ")";
        throw std::runtime_error(os.str());
      }
      lam(i) = std::max(lam(i), 0.0);
      lam(i) = lam(i) / (sigma2 + lam(i));
    }
    return Eigen::MatrixXcd(es.eigenvectors() * lam.asDiagonal() *
                            es.eigenvectors().adjoint());
  };
  return SpectralDensity(T, eval);
}

InverseFourierResult inverse_fourier_blocks(const SpectralDensity& s, int L_out,
                                            int Q) {
  if (L_out < 0) throw std::invalid_argument("L_out must be nonnegative");
  if (Q < 2 * L_out + 2) throw std::invalid_argument("frequency grid too coarse for L_out");
  const int T = s.block_size();
  std::vector<Eigen::MatrixXcd> vals(Q);
  for (int j = 0; j < Q; ++j) vals[j] = s.at(-kPi + 2.0 * kPi * j / Q);
  InverseFourierResult res;
  res.seq = MatrixSeq::zero(T, L_out, true);
  for (int l = -L_out; l <= L_out; ++l) {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(T, T);
    for (int j = 0; j < Q; ++j) {
      const double w = -kPi + 2.0 * kPi * j / Q;
      acc += vals[j] * std::exp(kI * (static_cast<double>(l) * w));
    }
    acc /= static_cast<double>(Q);
    res.seq.block(l) = acc.real();
    if (std::abs(l) == L_out || L_out == 0)
      res.tail = std::max(res.tail, acc.cwiseAbs().maxCoeff());
  }
  return res;
}

double periodic_trapezoid(int Q, const std::function<double(double)>& f) {
  if (Q < 1) throw std::invalid_argument("quadrature grid must have at least one point");
  double acc = 0.0;
  for (int j = 0; j < Q; ++j) acc += f(-kPi + 2.0 * kPi * j / Q);
  return acc * (2.0 * kPi / Q);
}

std::vector<Eigen::VectorXd> dag_transform(const std::vector<Eigen::VectorXd>& v) {
  const int N = static_cast<int>(v.size());
  require_odd_size(N, 0);
  const int n = (N - 1) / 2;
  const Eigen::Index T = v.empty() ? 0 : v.front().size();
  for (const auto& x : v)
    if (x.size() != T) throw std::invalid_argument("ring paths must share one length");
  const double sqrt2 = std::sqrt(2.0);
  std::vector<Eigen::VectorXd> out(N);
  for (int k = -n; k <= n; ++k) {
    Eigen::VectorXcd hat = Eigen::VectorXcd::Zero(T);
    for (int j = -n; j <= n; ++j)
      hat += std::exp(-2.0 * kPi * kI * (static_cast<double>(j) * k / N)) *
             v[j + n].cast<std::complex<double>>();
    if (k < 0)
      out[k + n] = sqrt2 * hat.imag();
    else if (k == 0)
      out[k + n] = hat.real();
    else
      out[k + n] = sqrt2 * hat.real();
  }
  return out;
}

std::vector<Eigen::VectorXd> dag_inverse(const std::vector<Eigen::VectorXd>& w) {
  const int N = static_cast<int>(w.size());
  require_odd_size(N, 0);
  const int n = (N - 1) / 2;
  const Eigen::Index T = w.empty() ? 0 : w.front().size();
  for (const auto& x : w)
    if (x.size() != T) throw std::invalid_argument("ring paths must share one length");
  // Reassemble the complex DFT coefficients: w^{-k} = sqrt(2) Im(hat^{-k})
  // = -sqrt(2) Im(hat^k), so for k > 0 hat^k = (w^k - i w^{-k}) / sqrt(2),
  // and hat^{-k} = conj(hat^k).
  std::vector<Eigen::VectorXcd> hat(N);
  hat[n] = w[n].cast<std::complex<double>>();
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int k = 1; k <= n; ++k) {
    hat[k + n] = inv_sqrt2 * (w[k + n].cast<std::complex<double>>() -
                              kI * w[-k + n].cast<std::complex<double>>());
    hat[-k + n] = hat[k + n].conjugate();
  }
  std::vector<Eigen::VectorXd> out(N);
  for (int j = -n; j <= n; ++j) {
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(T);
    for (int k = -n; k <= n; ++k)
      acc += std::exp(2.0 * kPi * kI * (static_cast<double>(j) * k / N)) * hat[k + n];
    out[j + n] = acc.real() / static_cast<double>(N);
  }
  return out;
}

}  // namespace ratenet
