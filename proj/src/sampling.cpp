#include "ratenet/sampling.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "ratenet/rng.hpp"
#include "ratenet/spectral.hpp"

namespace ratenet {

namespace {

constexpr double kPi = 3.14159265358979323846;

// FFTW plan creation/destruction is not thread safe; execution of a fresh
// plan on its own buffers is.
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

Eigen::MatrixXcd inverse_dft2_naive(const Eigen::MatrixXcd& in) {
  const int N = static_cast<int>(in.rows());
  // Twiddle table e^{+2 pi i m / N}; every factor is one of these.
  std::vector<std::complex<double>> tw(N);
  for (int m = 0; m < N; ++m)
    tw[m] = std::exp(std::complex<double>(0.0, 2.0 * kPi * m / N));
  Eigen::MatrixXcd out(N, N);
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) {
      std::complex<double> acc = 0.0;
      for (int p = 0; p < N; ++p) {
        const long pa = static_cast<long>(p) * a;
        for (int q = 0; q < N; ++q)
          acc += in(p, q) * tw[(pa + static_cast<long>(q) * b) % N];
      }
      out(a, b) = acc;
    }
  return out;
}

Eigen::MatrixXcd inverse_dft2_fftw(const Eigen::MatrixXcd& in) {
  const int N = static_cast<int>(in.rows());
  std::vector<std::complex<double>> buf_in(static_cast<std::size_t>(N) * N);
  std::vector<std::complex<double>> buf_out(static_cast<std::size_t>(N) * N);
  for (int p = 0; p < N; ++p)
    for (int q = 0; q < N; ++q) buf_in[static_cast<std::size_t>(p) * N + q] = in(p, q);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    plan = fftw_plan_dft_2d(N, N, reinterpret_cast<fftw_complex*>(buf_in.data()),
                            reinterpret_cast<fftw_complex*>(buf_out.data()),
                            FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(plan);
  }
  Eigen::MatrixXcd out(N, N);
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) out(a, b) = buf_out[static_cast<std::size_t>(a) * N + b];
  return out;
}

}  // namespace

Eigen::MatrixXcd inverse_dft2(const Eigen::MatrixXcd& in, bool force_naive) {
  if (in.rows() != in.cols()) throw std::invalid_argument("frequency grid must be square");
  const int N = static_cast<int>(in.rows());
  if (!force_naive && N >= 64) return inverse_dft2_fftw(in);
  return inverse_dft2_naive(in);
}

WeightMatrix sample_weights(const LambdaSpec& spec, double j_bar, int N,
                            std::uint64_t seed, std::uint64_t index,
                            bool force_naive) {
  const Eigen::MatrixXd grid = dft2(spec, N);  // validates N odd, N >= 2d+1
  const int n = (N - 1) / 2;
  const double tol = 1e-10 * std::max(1.0, spec.lambda_sum());

  // Frequency-space standard deviations sqrt(Lambda~^N(p, q) / N).
  Eigen::MatrixXd sd(N, N);
  for (int p = -n; p <= n; ++p)
    for (int q = -n; q <= n; ++q) {
      double lam = grid(p + n, q + n);
      if (lam < -tol) {
        std::ostringstream os;
        os << "correlation spectrum negative at N = " << N << ", (p, q) = (" << p
           << ", " << q << "): " << lam;
        throw std::runtime_error(os.str());
      }
      sd(p + n, q + n) = std::sqrt(std::max(lam, 0.0) / N);
    }

  // Hermitian-paired complex Gaussian field xi with E|xi|^2 = 1 and
  // E[xi^2] = 0 off the self-paired mode: the lexicographically smaller
  // member of each pair {(p,q), (-p,-q)} draws (g1 + i g2)/sqrt(2), its
  // partner takes the conjugate, and the self-paired (0,0) mode draws a real
  // standard normal.  Scanning (p, q) row-major always visits the canonical
  // member first, so the draw order is fixed.
  StreamRng rng(seed, "weights", index);
  Eigen::MatrixXcd xi(N, N);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int p = -n; p <= n; ++p)
    for (int q = -n; q <= n; ++q) {
      if (p == 0 && q == 0)
        xi(p + n, q + n) = rng.normal();
      else if (p < 0 || (p == 0 && q < 0))  // canonical: (p,q) < (-p,-q)
        xi(p + n, q + n) =
            std::complex<double>(rng.normal(), rng.normal()) * inv_sqrt2;
      else
        xi(p + n, q + n) = std::conj(xi(-p + n, -q + n));
    }
  const Eigen::MatrixXcd field =
      sd.cast<std::complex<double>>().cwiseProduct(xi);

  // Inverse transform; map signed labels onto 0..N-1 residues (the DFT
  // exponential depends on indices only mod N).
  Eigen::MatrixXcd in = Eigen::MatrixXcd::Zero(N, N);
  for (int p = -n; p <= n; ++p)
    for (int q = -n; q <= n; ++q)
      in(((p % N) + N) % N, ((q % N) + N) % N) = field(p + n, q + n);
  const Eigen::MatrixXcd x = inverse_dft2(in, force_naive) / static_cast<double>(N);

  double max_imag = 0.0;
  WeightMatrix w;
  w.N = N;
  w.W.resize(N, N);
  const double mean = j_bar / N;
  for (int i = -n; i <= n; ++i)
    for (int j = -n; j <= n; ++j) {
      const std::complex<double> val = x(((i % N) + N) % N, ((j % N) + N) % N);
      max_imag = std::max(max_imag, std::abs(val.imag()));
      w.W(i + n, j + n) = mean + val.real();
    }
  if (max_imag > 1e-10) {
    std::ostringstream os;
    os << "weight field imaginary residue " << max_imag << " exceeds 1e-10";
    throw std::runtime_error(os.str());
  }
  return w;
}

NoiseBundle sample_noise_bundle(const ModelParams& params, int N,
                                std::uint64_t seed, std::uint64_t index) {
  if (N < 1 || N % 2 == 0) throw std::invalid_argument("ring size N must be odd and positive");
  NoiseBundle out;
  {
    StreamRng rng(seed, "thresholds", index);
    out.thresholds.resize(N);
    for (int j = 0; j < N; ++j)
      out.thresholds(j) = params.theta_bar + params.theta_std * rng.normal();
  }
  {
    StreamRng rng(seed, "noise", index);
    out.noise.resize(N, params.T);
    for (int j = 0; j < N; ++j)
      for (int t = 0; t < params.T; ++t) out.noise(j, t) = params.sigma * rng.normal();
  }
  {
    StreamRng rng(seed, "initial", index);
    out.initial.resize(N);
    for (int j = 0; j < N; ++j) {
      if (params.mu_I.kind == MuI::Kind::Dirac)
        out.initial(j) = params.mu_I.mean;
      else
        out.initial(j) = params.mu_I.mean + params.mu_I.std * rng.normal();
    }
  }
  return out;
}

}  // namespace ratenet
