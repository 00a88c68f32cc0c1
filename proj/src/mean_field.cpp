#include "ratenet/mean_field.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ratenet {

MomentData MomentData::zero(int T, int d) {
  MomentData m;
  m.T = T;
  m.d = d;
  m.c = Eigen::VectorXd::Zero(T);
  m.M.assign(2 * d + 1, Eigen::MatrixXd::Zero(T, T));
  return m;
}

void MomentData::check_valid(double j_bar, double tol) const {
  for (int l = -d; l <= d; ++l) {
    const Eigen::MatrixXd& B = Mblock(l);
    if (B.minCoeff() < -tol || B.maxCoeff() > 1.0 + tol)
      throw std::runtime_error("firing correlation outside [0, 1]");
    const double defect = (Mblock(-l) - B.transpose()).cwiseAbs().maxCoeff();
    if (defect > tol)
      throw std::runtime_error("firing correlations violate the transpose pairing");
  }
  if (c.cwiseAbs().maxCoeff() > std::abs(j_bar) + tol)
    throw std::runtime_error("scaled mean rates exceed |j_bar|");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (Mblock(0) + Mblock(0).transpose()));
  if (es.eigenvalues().minCoeff() < -tol)
    throw std::runtime_error("same-neuron correlation block not positive semidefinite");
}

CovSeq CovSeq::zero(int T, int d) {
  CovSeq s;
  s.T = T;
  s.d = d;
  s.K.assign(2 * d + 1, Eigen::MatrixXd::Zero(T, T));
  return s;
}

MatrixSeq CovSeq::to_seq() const {
  MatrixSeq s = MatrixSeq::zero(T, d, true);
  for (int k = -d; k <= d; ++k) s.block(k) = block(k);
  return s;
}

double CovSeq::trace0() const { return block(0).trace(); }

CovSeq cov_from_moments(const MomentData& m, const LambdaSpec& spec,
                        double theta_std) {
  if (spec.d() != m.d) throw std::invalid_argument("moment and correlation radii differ");
  CovSeq out = CovSeq::zero(m.T, m.d);
  const double th2 = theta_std * theta_std;
  for (int k = -m.d; k <= m.d; ++k) {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m.T, m.T);
    for (int l = -m.d; l <= m.d; ++l) {
      const double lam = spec.at(k, l);
      if (lam != 0.0) B += lam * m.Mblock(l);
    }
    if (k == 0) B.array() += th2;
    out.block(k) = B;
  }
  return out;
}

GaussianMomentEngine::GaussianMomentEngine(const ModelParams& params,
                                           Eigen::VectorXd mean,
                                           Eigen::MatrixXd cov0,
                                           std::vector<Eigen::MatrixXd> cross,
                                           const GaussHermite& gh)
    : params_(params),
      mean_(std::move(mean)),
      cov0_(std::move(cov0)),
      cross_(std::move(cross)),
      gh_(gh) {
  if (mean_.size() != params_.T || cov0_.rows() != params_.T || cov0_.cols() != params_.T)
    throw std::invalid_argument("innovation law dimensions do not match T");
}

// Affine coefficients of u_{t-1} = Psi^{-1}(v)_{t-1} as a functional of
// (v_0, v_1..v_{t-1}):
//   u_{t-1} = gamma^{t-1} v_0 + sum_{i=1}^{t-1} gamma^{t-1-i} v_i
//             + theta_bar * sum_{m=0}^{t-2} gamma^m.
GaussianMomentEngine::Affine GaussianMomentEngine::functional(int t) const {
  if (t < 1 || t > params_.T) throw std::invalid_argument("time index out of range");
  Affine f;
  f.k0 = std::pow(params_.gamma, t - 1);
  f.a.resize(t - 1);
  double geom = 0.0;
  for (int i = 1; i <= t - 1; ++i) f.a(i - 1) = std::pow(params_.gamma, t - 1 - i);
  for (int m = 0; m <= t - 2; ++m) geom += std::pow(params_.gamma, m);
  f.b = params_.theta_bar * geom;
  return f;
}

double GaussianMomentEngine::mean_entry(int t) const {
  const Affine f = functional(t);
  const int len = t - 1;
  double mean = f.b + f.a.dot(mean_.head(len));
  double var = f.a.dot(cov0_.topLeftCorner(len, len) * f.a);
  if (params_.mu_I.kind == MuI::Kind::Gaussian) {
    mean += f.k0 * params_.mu_I.mean;
    var += f.k0 * f.k0 * params_.mu_I.std * params_.mu_I.std;
  } else {
    mean += f.k0 * params_.mu_I.mean;
  }
  const double g = params_.g;
  return gh_.expect1(mean, var, [g](double x) { return sigmoid(x, g); });
}

double GaussianMomentEngine::second_entry(int l, int s, int t) const {
  if (l < 0 || l > static_cast<int>(cross_.size()))
    throw std::invalid_argument("ring lag out of range");
  const Affine fx = functional(s);
  const Affine fy = functional(t);
  const int lx = s - 1, ly = t - 1;
  double mx = fx.b + fx.a.dot(mean_.head(lx));
  double my = fy.b + fy.a.dot(mean_.head(ly));
  double vx = fx.a.dot(cov0_.topLeftCorner(lx, lx) * fx.a);
  double vy = fy.a.dot(cov0_.topLeftCorner(ly, ly) * fy.a);
  double cxy = 0.0;
  const bool gauss0 = params_.mu_I.kind == MuI::Kind::Gaussian;
  const double var0 = gauss0 ? params_.mu_I.std * params_.mu_I.std : 0.0;
  mx += fx.k0 * params_.mu_I.mean;
  my += fy.k0 * params_.mu_I.mean;
  vx += fx.k0 * fx.k0 * var0;
  vy += fy.k0 * fy.k0 * var0;
  if (l == 0) {
    // Same neuron: shared time-0 draw and shared Gaussian path.
    cxy = fx.a.dot(cov0_.topLeftCorner(lx, ly) * fy.a);
    cxy += fx.k0 * fy.k0 * var0;
    if (s == t) {
      const double g = params_.g;
      return gh_.expect1(mx, vx, [g](double x) {
        const double r = sigmoid(x, g);
        return r * r;
      });
    }
  } else {
    // Distinct neurons: independent time-0 draws, correlated paths.
    cxy = fx.a.dot(cross_[l - 1].topLeftCorner(lx, ly) * fy.a);
  }
  const double g = params_.g;
  return gh_.expect2(mx, my, vx, cxy, vy, [g](double x, double y) {
    return sigmoid(x, g) * sigmoid(y, g);
  });
}

MomentData GaussianMomentEngine::all(int d) const {
  MomentData out = MomentData::zero(params_.T, d);
  for (int t = 1; t <= params_.T; ++t) out.c(t - 1) = params_.j_bar * mean_entry(t);
  for (int l = 0; l <= d; ++l)
    for (int s = 1; s <= params_.T; ++s)
      for (int t = 1; t <= params_.T; ++t)
        out.Mblock(l)(s - 1, t - 1) = second_entry(l, s, t);
  for (int l = 1; l <= d; ++l) out.Mblock(-l) = out.Mblock(l).transpose();
  return out;
}

namespace {

// Innovation law induced by candidate moments: mean c, same-neuron
// covariance sigma^2 I + K^0 (or the strict variant K^0 alone), and
// cross-neuron lag blocks K^l.
GaussianMomentEngine engine_from_moments(const MomentData& m,
                                         const ModelParams& params,
                                         const LambdaSpec& spec,
                                         const QuadOptions& opts,
                                         const GaussHermite& gh) {
  const CovSeq K = cov_from_moments(m, spec, params.theta_std);
  Eigen::MatrixXd cov0 = K.block(0);
  if (!opts.strict_innovation_cov)
    cov0 += params.sigma * params.sigma * Eigen::MatrixXd::Identity(m.T, m.T);
  std::vector<Eigen::MatrixXd> cross;
  for (int l = 1; l <= m.d; ++l) cross.push_back(K.block(l));
  return GaussianMomentEngine(params, m.c, std::move(cov0), std::move(cross), gh);
}

MomentData apply_map(const MomentData& m, const ModelParams& params,
                     const LambdaSpec& spec, const QuadOptions& opts,
                     const GaussHermite& gh) {
  return engine_from_moments(m, params, spec, opts, gh).all(m.d);
}

double moment_distance(const MomentData& a, const MomentData& b) {
  double worst = (a.c - b.c).cwiseAbs().maxCoeff();
  for (int l = -a.d; l <= a.d; ++l)
    worst = std::max(worst,
                     (a.Mblock(l) - b.Mblock(l)).cwiseAbs().maxCoeff());
  return worst;
}

MomentData solve_triangular(const ModelParams& params, const LambdaSpec& spec,
                            const QuadOptions& opts, const GaussHermite& gh) {
  const int T = params.T;
  const int d = spec.d();
  MomentData m = MomentData::zero(T, d);
  for (int t = 1; t <= T; ++t) {
    // Entries at time t read the innovation law only at times < t, which is
    // already final; the engine rebuilt here reflects it.
    const GaussianMomentEngine engine = engine_from_moments(m, params, spec, opts, gh);
    m.c(t - 1) = params.j_bar * engine.mean_entry(t);
    for (int l = 0; l <= d; ++l)
      for (int s = 1; s <= t; ++s) {
        m.Mblock(l)(t - 1, s - 1) = engine.second_entry(l, t, s);
        if (s < t) m.Mblock(l)(s - 1, t - 1) = engine.second_entry(l, s, t);
      }
    for (int l = 1; l <= d; ++l) m.Mblock(-l) = m.Mblock(l).transpose();
  }
  return m;
}

}  // namespace

MomentData limit_map_L(const MomentData& m, const ModelParams& params,
                       const LambdaSpec& spec, const QuadOptions& opts) {
  params.validate();
  if (m.T != params.T) throw std::invalid_argument("moment horizon does not match T");
  const GaussHermite gh(opts.gh_nodes);
  const MomentData out = apply_map(m, params, spec, opts, gh);
  const GaussHermite gh2(2 * opts.gh_nodes);
  const MomentData out2 = apply_map(m, params, spec, opts, gh2);
  const double residual = moment_distance(out, out2);
  if (residual > opts.residual_threshold) {
    std::ostringstream os;
    os << "moment-map quadrature residual " << residual << " exceeds "
       << opts.residual_threshold << " at " << opts.gh_nodes << " nodes";
    throw std::runtime_error(os.str());
  }
  return out;
}

LimitLaw solve_limit_law(const ModelParams& params, const LambdaSpec& spec,
                         const QuadOptions& opts) {
  params.validate();
  const GaussHermite gh(opts.gh_nodes);
  const GaussHermite gh2(2 * opts.gh_nodes);
  MomentData m = solve_triangular(params, spec, opts, gh);
  const MomentData m2 = solve_triangular(params, spec, opts, gh2);
  LimitLaw law{params, spec, std::move(m), CovSeq{}, opts.gh_nodes, 0.0};
  law.residual = moment_distance(law.moments, m2);
  if (law.residual > opts.residual_threshold) {
    std::ostringstream os;
    os << "limit-law quadrature residual " << law.residual << " exceeds "
       << opts.residual_threshold << " at " << opts.gh_nodes << " nodes";
    throw std::runtime_error(os.str());
  }
  law.moments.check_valid(params.j_bar);
  law.cov = cov_from_moments(law.moments, spec, params.theta_std);
  return law;
}

SpectralPack spectral_pack(const CovSeq& cov, double sigma2, double rho_K,
                           int Q, int L_out, double psd_tol) {
  SpectralDensity Kt = density(cov.to_seq());
  SpectralDensity At = resolvent_transform(Kt, sigma2, psd_tol);
  InverseFourierResult inv = inverse_fourier_blocks(At, L_out, Q);
  SpectralPack pack{std::move(Kt), std::move(At), std::move(inv.seq), inv.tail,
                    0.0, 0.0};
  const double alpha = rho_K / (sigma2 + rho_K);
  for (int j = 0; j < Q; ++j) {
    const double w = -3.14159265358979323846 + 2.0 * 3.14159265358979323846 * j / Q;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ek(
        Eigen::MatrixXcd(0.5 * (pack.Ktilde.at(w) + pack.Ktilde.at(w).adjoint())));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ea(
        Eigen::MatrixXcd(0.5 * (pack.Atilde.at(w) + pack.Atilde.at(w).adjoint())));
    pack.max_eig_K = std::max(pack.max_eig_K, ek.eigenvalues().maxCoeff());
    pack.max_eig_A = std::max(pack.max_eig_A, ea.eigenvalues().maxCoeff());
  }
  const double slack = 1e-9 * std::max(1.0, rho_K);
  if (pack.max_eig_K > rho_K + slack)
    throw std::runtime_error("covariance spectrum exceeds the rho_K bound");
  if (pack.max_eig_A > alpha + slack)
    throw std::runtime_error("resolvent spectrum exceeds the alpha bound");
  return pack;
}

}  // namespace ratenet
