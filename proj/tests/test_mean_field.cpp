#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ratenet/mean_field.hpp"
#include "ratenet/model.hpp"
#include "ratenet/quadrature.hpp"
#include "ratenet/rng.hpp"
#include "test_util.hpp"

using namespace ratenet;

TEST_CASE("quadrature nodes integrate Gaussian moments exactly") {
  const GaussHermite gh(8);
  // E[X^k] for X ~ N(0,1): 0, 1, 0, 3, 0, 15.
  const double m1 = gh.expect1(0.0, 1.0, [](double x) { return x; });
  const double m2 = gh.expect1(0.0, 1.0, [](double x) { return x * x; });
  const double m4 = gh.expect1(0.0, 1.0, [](double x) { return x * x * x * x; });
  const double m6 = gh.expect1(0.0, 1.0, [](double x) { return std::pow(x, 6); });
  CHECK(std::abs(m1) <= 1e-14);
  CHECK(m2 == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(m4 == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(m6 == doctest::Approx(15.0).epsilon(1e-12));
  // Shift and scale: E[X] and Var for N(2, 9).
  const double mean = gh.expect1(2.0, 9.0, [](double x) { return x; });
  const double second = gh.expect1(2.0, 9.0, [](double x) { return x * x; });
  CHECK(mean == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(second - mean * mean == doctest::Approx(9.0).epsilon(1e-12));
}

TEST_CASE("quadrature handles point masses") {
  const GaussHermite gh(5);
  const double v = gh.expect1(1.7, 0.0, [](double x) { return std::sin(x); });
  CHECK(v == doctest::Approx(std::sin(1.7)).epsilon(1e-15));
  // Rank-one bivariate covariance: Y = X exactly.
  const double w = gh.expect2(0.3, 0.3, 1.0, 1.0, 1.0,
                              [](double x, double y) { return (x - y) * (x - y); });
  CHECK(std::abs(w) <= 1e-13);
}

TEST_CASE("bivariate quadrature reproduces the cross moment") {
  const GaussHermite gh(12);
  const double mx = 0.4, my = -0.7, vxx = 1.3, cxy = 0.5, vyy = 0.9;
  const double exy =
      gh.expect2(mx, my, vxx, cxy, vyy, [](double x, double y) { return x * y; });
  CHECK(exy == doctest::Approx(cxy + mx * my).epsilon(1e-12));
  const double ex2 =
      gh.expect2(mx, my, vxx, cxy, vyy, [](double x, double) { return x * x; });
  CHECK(ex2 == doctest::Approx(vxx + mx * mx).epsilon(1e-12));
}

TEST_CASE("bivariate quadrature matches Monte Carlo on the firing product") {
  const GaussHermite gh(40);
  const double mx = 0.2, my = 0.5, vxx = 0.8, cxy = -0.3, vyy = 1.1;
  auto h = [](double x, double y) {
    return 0.25 * (1.0 + std::tanh(x)) * (1.0 + std::tanh(y));
  };
  const double quad = gh.expect2(mx, my, vxx, cxy, vyy, h);
  // Correlated pair via Cholesky of [[vxx, cxy], [cxy, vyy]].
  const double l11 = std::sqrt(vxx);
  const double l21 = cxy / l11;
  const double l22 = std::sqrt(vyy - l21 * l21);
  StreamRng rng(23, "gh-mc");
  const int M = 2000000;
  std::vector<double> chunk_means;
  double acc = 0.0;
  int in_chunk = 0;
  std::vector<double> all;
  all.reserve(64);
  for (int i = 0; i < M; ++i) {
    const double z1 = rng.normal(), z2 = rng.normal();
    acc += h(mx + l11 * z1, my + l21 * z1 + l22 * z2);
    if (++in_chunk == M / 64) {
      all.push_back(acc / in_chunk);
      acc = 0.0;
      in_chunk = 0;
    }
  }
  const testutil::MeanSe ms = testutil::mean_se(all);
  CHECK(std::abs(quad - ms.mean) <= 4.0 * ms.se);
}

TEST_CASE("indefinite bivariate covariance is rejected") {
  const GaussHermite gh(5);
  CHECK_THROWS_AS(
      gh.expect2(0.0, 0.0, 1.0, 2.0, 1.0, [](double, double) { return 1.0; }),
      std::runtime_error);
}

TEST_CASE("covariance lags from moments: white correlation") {
  const double lam0 = 0.8, theta = 0.3;
  const LambdaSpec spec(0, std::vector<LambdaEntry>{{0, 0, lam0}});
  StreamRng rng(29, "mf-white");
  const MomentData m = testutil::random_moments(rng, 9, 3, 0, 0.7);
  const CovSeq K = cov_from_moments(m, spec, theta);
  const Eigen::MatrixXd expected =
      (lam0 * m.Mblock(0)).array() + theta * theta;
  CHECK((K.block(0) - expected).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("covariance lags from moments: constant correlations factor out") {
  const LambdaSpec spec = testutil::reference_lambda();
  const int T = 2, d = 1;
  MomentData m = MomentData::zero(T, d);
  m.c = Eigen::VectorXd::Constant(T, 0.4);
  for (int l = -d; l <= d; ++l) m.Mblock(l) = Eigen::MatrixXd::Constant(T, T, 0.25);
  const CovSeq K = cov_from_moments(m, spec, 0.0);
  for (int k = -d; k <= d; ++k) {
    double row = 0.0;
    for (int l = -d; l <= d; ++l) row += spec.at(k, l);
    CHECK((K.block(k) - Eigen::MatrixXd::Constant(T, T, 0.25 * row)).cwiseAbs().maxCoeff() <=
          1e-15);
  }
}

TEST_CASE("trace of the same-neuron covariance respects the model bound") {
  StreamRng rng(31, "mf-trace");
  for (int rep = 0; rep < 20; ++rep) {
    const int d = 1 + static_cast<int>(rng.next_u64() % 2);
    const int T = 1 + static_cast<int>(rng.next_u64() % 3);
    const LambdaSpec spec = testutil::random_valid_lambda(rng, d);
    const double theta = rng.uniform();
    const MomentData m = testutil::random_moments(rng, 9, T, d, 1.0);
    const CovSeq K = cov_from_moments(m, spec, theta);
    CHECK(K.trace0() <= T * (theta * theta + spec.lambda_sum()) + 1e-12);
  }
}

TEST_CASE("moment validity checks reject malformed data") {
  MomentData m = MomentData::zero(2, 1);
  m.c = Eigen::VectorXd::Constant(2, 0.4);
  for (int l = -1; l <= 1; ++l) m.Mblock(l) = Eigen::MatrixXd::Constant(2, 2, 0.25);
  CHECK_NOTHROW(m.check_valid(0.8));

  MomentData bad = m;
  bad.Mblock(0)(0, 0) = 1.5;  // outside [0, 1]
  CHECK_THROWS_AS(bad.check_valid(0.8), std::runtime_error);

  bad = m;
  bad.Mblock(1)(0, 1) = 0.9;  // breaks the transpose pairing
  CHECK_THROWS_AS(bad.check_valid(0.8), std::runtime_error);

  bad = m;
  bad.c(0) = 2.0;  // exceeds |j_bar|
  CHECK_THROWS_AS(bad.check_valid(0.8), std::runtime_error);

  bad = m;
  bad.Mblock(0) << 0.1, 0.9, 0.9, 0.1;  // symmetric but indefinite
  CHECK_THROWS_AS(bad.check_valid(0.8), std::runtime_error);
}

TEST_CASE("single-step map depends only on the initial law") {
  ModelParams p = testutil::reference_params();
  p.T = 1;
  const LambdaSpec spec = testutil::reference_lambda();
  const QuadOptions opts;
  // Any input moments must give the same t=1 output.
  StreamRng rng(37, "mf-t1");
  const MomentData m1 = limit_map_L(testutil::random_moments(rng, 9, 1, 1, p.j_bar), p, spec, opts);
  const MomentData m2 = limit_map_L(MomentData::zero(1, 1), p, spec, opts);
  CHECK((m1.c - m2.c).cwiseAbs().maxCoeff() <= 1e-15);
  for (int l = -1; l <= 1; ++l)
    CHECK((m1.Mblock(l) - m2.Mblock(l)).cwiseAbs().maxCoeff() <= 1e-15);

  // Against an independent 1-D quadrature of the initial law.
  const GaussHermite gh(80);
  const double mu = p.mu_I.mean, v0 = p.mu_I.std * p.mu_I.std;
  auto f = [&](double x) { return sigmoid(x, p.g); };
  const double ef = gh.expect1(mu, v0, f);
  const double ef2 = gh.expect1(mu, v0, [&](double x) { return f(x) * f(x); });
  CHECK(m1.c(0) == doctest::Approx(p.j_bar * ef).epsilon(1e-12));
  CHECK(m1.Mblock(0)(0, 0) == doctest::Approx(ef2).epsilon(1e-12));
  // Distinct neurons are independent at time 0.
  CHECK(m1.Mblock(1)(0, 0) == doctest::Approx(ef * ef).epsilon(1e-12));
}

TEST_CASE("Dirac initial condition gives exact half rates") {
  ModelParams p = testutil::reference_params();
  p.T = 1;
  p.mu_I = {MuI::Kind::Dirac, 0.0, 0.0};
  const LambdaSpec spec = testutil::reference_lambda();
  const LimitLaw law = solve_limit_law(p, spec, {});
  CHECK(law.moments.c(0) == doctest::Approx(0.5 * p.j_bar).epsilon(1e-15));
  CHECK(law.moments.Mblock(0)(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(law.moments.Mblock(1)(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("two-step rates integrate the advertised Gaussian") {
  // gamma=0, theta_bar=0, theta_std=0, sigma=1, j_bar=1, white Lambda(0,0)=1,
  // mu_I = Dirac(0): at t=2 the potential is N(0.5, 1 + 0.25) and
  // c_2 = E[f(u)], f(x) = (1+tanh x)/2.
  ModelParams p;
  p.gamma = 0.0;
  p.sigma = 1.0;
  p.theta_bar = 0.0;
  p.theta_std = 0.0;
  p.j_bar = 1.0;
  p.T = 2;
  p.g = 1.0;
  p.mu_I = {MuI::Kind::Dirac, 0.0, 0.0};
  const LambdaSpec spec(0, std::vector<LambdaEntry>{{0, 0, 1.0}});
  QuadOptions hi;
  hi.gh_nodes = 80;  // evaluate the solver at the oracle's own resolution
  const LimitLaw law = solve_limit_law(p, spec, hi);
  CHECK(law.moments.c(0) == doctest::Approx(0.5).epsilon(1e-15));

  const GaussHermite gh(80);
  const double expected =
      gh.expect1(0.5, 1.25, [&](double x) { return sigmoid(x, 1.0); });
  CHECK(law.moments.c(1) == doctest::Approx(expected).epsilon(1e-10));

  // Monte Carlo cross-check of the same integral.
  StreamRng rng(41, "mf-x-mc");
  const int M = 1000000;
  std::vector<double> chunks;
  double acc = 0.0;
  for (int i = 0; i < M; ++i) {
    acc += sigmoid(0.5 + std::sqrt(1.25) * rng.normal(), 1.0);
    if ((i + 1) % (M / 50) == 0) {
      chunks.push_back(acc / (M / 50));
      acc = 0.0;
    }
  }
  const testutil::MeanSe ms = testutil::mean_se(chunks);
  CHECK(std::abs(law.moments.c(1) - ms.mean) <= 4.0 * ms.se);

  // The literal-recursion variant drops the sigma^2 noise term from the
  // innovation covariance, so the t=2 variance becomes 0.25.
  QuadOptions strict;
  strict.gh_nodes = 80;
  strict.strict_innovation_cov = true;
  const LimitLaw strict_law = solve_limit_law(p, spec, strict);
  const double strict_expected =
      gh.expect1(0.5, 0.25, [&](double x) { return sigmoid(x, 1.0); });
  CHECK(strict_law.moments.c(1) == doctest::Approx(strict_expected).epsilon(1e-10));
  CHECK(std::abs(strict_law.moments.c(1) - law.moments.c(1)) > 1e-3);
}

TEST_CASE("decoupled mean drive vanishes with j_bar") {
  ModelParams p = testutil::reference_params();
  p.j_bar = 0.0;
  p.T = 3;
  const LambdaSpec spec(0, std::vector<LambdaEntry>{{0, 0, 1e-4}});
  const LimitLaw law = solve_limit_law(p, spec, {});
  CHECK(law.moments.c.cwiseAbs().maxCoeff() == 0.0);
  // All entries remain genuine probabilities of products.
  for (int l = -law.moments.d; l <= law.moments.d; ++l) {
    CHECK(law.moments.Mblock(l).minCoeff() >= 0.0);
    CHECK(law.moments.Mblock(l).maxCoeff() <= 1.0);
  }
}

TEST_CASE("early moments do not depend on the horizon") {
  ModelParams p4 = testutil::reference_params();
  ModelParams p3 = p4;
  p3.T = 3;
  const LambdaSpec spec = testutil::reference_lambda();
  const LimitLaw a = solve_limit_law(p4, spec, {});
  const LimitLaw b = solve_limit_law(p3, spec, {});
  CHECK((a.moments.c.head(3) - b.moments.c).cwiseAbs().maxCoeff() <= 1e-14);
  for (int l = -1; l <= 1; ++l)
    CHECK((a.moments.Mblock(l).topLeftCorner(3, 3) - b.moments.Mblock(l))
              .cwiseAbs()
              .maxCoeff() <= 1e-14);
}

TEST_CASE("solved law is a fixed point of the moment map") {
  const ModelParams p = testutil::reference_params();
  const LambdaSpec spec = testutil::reference_lambda();
  const QuadOptions opts;
  const LimitLaw law = solve_limit_law(p, spec, opts);
  CHECK(law.residual <= opts.residual_threshold);
  const MomentData mapped = limit_map_L(law.moments, p, spec, opts);
  double dist = (mapped.c - law.moments.c).cwiseAbs().maxCoeff();
  for (int l = -1; l <= 1; ++l)
    dist = std::max(dist,
                    (mapped.Mblock(l) - law.moments.Mblock(l)).cwiseAbs().maxCoeff());
  CHECK(dist <= 1e-8);
}

TEST_CASE("unreachable quadrature residual threshold is reported") {
  const ModelParams p = testutil::reference_params();
  const LambdaSpec spec = testutil::reference_lambda();
  QuadOptions opts;
  opts.residual_threshold = 1e-12;  // 40-node doubling shift is ~1.5e-6
  CHECK_THROWS_AS(solve_limit_law(p, spec, opts), std::runtime_error);
}

TEST_CASE("spectral package respects the model bounds") {
  const ModelParams p = testutil::reference_params();
  const LambdaSpec spec = testutil::reference_lambda();
  const LimitLaw law = solve_limit_law(p, spec, {});
  const DerivedConstants dc = derived_constants(p, spec);
  const double sigma2 = p.sigma * p.sigma;
  const SpectralPack pack = spectral_pack(law.cov, sigma2, dc.rho_K, 256, 6);
  CHECK(pack.max_eig_K <= dc.rho_K + 1e-9);
  CHECK(pack.max_eig_A <= dc.alpha + 1e-12);
  CHECK(pack.max_eig_A >= 0.0);
  CHECK(pack.A_tail <= 1e-3);  // lag blocks decay geometrically
  // The recovered lag blocks reproduce the resolvent on the grid.
  const SpectralDensity approx = density(pack.A_lags);
  double worst = 0.0;
  for (double w = -3.1; w <= 3.1; w += 0.37)
    worst = std::max(worst,
                     (approx.at(w) - pack.Atilde.at(w)).cwiseAbs().maxCoeff());
  CHECK(worst <= 1e-2);
}

TEST_CASE("solver rejects mismatched correlation radius") {
  StreamRng rng(43, "mf-mismatch");
  const MomentData m = testutil::random_moments(rng, 9, 2, 1, 0.5);
  const LambdaSpec spec(0, std::vector<LambdaEntry>{{0, 0, 1.0}});
  CHECK_THROWS_AS(cov_from_moments(m, spec, 0.1), std::invalid_argument);
}
