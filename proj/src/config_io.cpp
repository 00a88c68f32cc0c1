#include "ratenet/config_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ratenet {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) {
  throw std::invalid_argument("configuration error: " + what);
}

double need_number(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) fail(std::string(key) + " must be a number");
  return j[key].get<double>();
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) fail("matrix must be a nonempty array of rows");
  const auto rows = j.size();
  const auto cols = j[0].size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) fail("matrix rows must have equal length");
    for (std::size_t k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

ModelParams parse_model(const json& j) {
  ModelParams p;
  p.gamma = need_number(j, "gamma");
  p.sigma = need_number(j, "sigma");
  p.theta_bar = need_number(j, "theta_bar");
  p.theta_std = need_number(j, "theta_std");
  p.j_bar = need_number(j, "j_bar");
  if (!j.contains("T") || !j["T"].is_number_integer()) fail("T must be an integer");
  p.T = j["T"].get<int>();
  p.g = need_number(j, "g");
  if (!j.contains("mu_I") || !j["mu_I"].is_object()) fail("mu_I must be an object");
  const json& mu = j["mu_I"];
  const std::string type = mu.value("type", "");
  if (type == "gaussian") {
    p.mu_I.kind = MuI::Kind::Gaussian;
    p.mu_I.mean = need_number(mu, "mean");
    p.mu_I.std = need_number(mu, "std");
  } else if (type == "dirac") {
    p.mu_I.kind = MuI::Kind::Dirac;
    p.mu_I.mean = need_number(mu, "mean");
    p.mu_I.std = 0.0;
  } else {
    fail("mu_I.type must be \"gaussian\" or \"dirac\"");
  }
  p.validate();
  return p;
}

LambdaSpec parse_lambda(const json& j) {
  if (!j.contains("d") || !j["d"].is_number_integer()) fail("lambda.d must be an integer");
  const int d = j["d"].get<int>();
  if (!j.contains("entries") || !j["entries"].is_array())
    fail("lambda.entries must be an array of [k, l, value] triples");
  std::vector<LambdaEntry> entries;
  for (const auto& e : j["entries"]) {
    if (!e.is_array() || e.size() != 3) fail("lambda entry must be [k, l, value]");
    entries.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
  }
  return LambdaSpec(d, entries);
}

json model_to_json(const ModelParams& p) {
  json mu;
  mu["type"] = p.mu_I.kind == MuI::Kind::Gaussian ? "gaussian" : "dirac";
  mu["mean"] = p.mu_I.mean;
  if (p.mu_I.kind == MuI::Kind::Gaussian) mu["std"] = p.mu_I.std;
  return json{{"gamma", p.gamma},     {"sigma", p.sigma},
              {"theta_bar", p.theta_bar}, {"theta_std", p.theta_std},
              {"j_bar", p.j_bar},     {"T", p.T},
              {"g", p.g},             {"mu_I", mu}};
}

json lambda_to_json(const LambdaSpec& spec) {
  json entries = json::array();
  const int d = spec.d();
  for (int k = -d; k <= d; ++k)
    for (int l = -d; l <= d; ++l)
      if (spec.at(k, l) != 0.0) entries.push_back(json::array({k, l, spec.at(k, l)}));
  return json{{"d", d}, {"entries", entries}};
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  if (!root.contains("model")) fail("missing \"model\" block");
  if (!root.contains("lambda")) fail("missing \"lambda\" block");
  ExperimentConfig cfg;
  cfg.model = parse_model(root["model"]);
  cfg.lambda = parse_lambda(root["lambda"]);
  if (root.contains("experiment")) {
    const json& e = root["experiment"];
    if (e.contains("N_list")) {
      cfg.N_list.clear();
      for (const auto& v : e["N_list"]) cfg.N_list.push_back(v.get<int>());
    }
    cfg.trials = e.value("trials", cfg.trials);
    cfg.seed = e.value("seed", cfg.seed);
    cfg.out_dir = e.value("out_dir", cfg.out_dir);
    if (e.contains("quadrature")) {
      cfg.gh_nodes = e["quadrature"].value("gh_nodes", cfg.gh_nodes);
      cfg.omega_grid = e["quadrature"].value("omega_grid", cfg.omega_grid);
    }
    if (e.contains("checks")) cfg.quenched = e["checks"].value("quenched", cfg.quenched);
    cfg.strict_innovation_cov =
        e.value("strict_innovation_cov", cfg.strict_innovation_cov);
    cfg.threads = e.value("threads", cfg.threads);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open configuration file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

GaussianCandidate parse_candidate(const std::string& json_text, const MuI& mu_I) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(std::string("invalid candidate JSON: ") + e.what());
  }
  if (!root.contains("m") || !root["m"].is_array()) fail("candidate needs a mean vector \"m\"");
  GaussianCandidate cand;
  cand.mu_I = mu_I;
  const auto& m = root["m"];
  cand.T = static_cast<int>(m.size());
  cand.m.resize(cand.T);
  for (int i = 0; i < cand.T; ++i) cand.m(i) = m[i].get<double>();
  if (!root.contains("lags") || !root["lags"].is_object())
    fail("candidate needs a \"lags\" object keyed by ring lag");
  int L = 0;
  for (const auto& [key, value] : root["lags"].items()) {
    (void)value;
    L = std::max(L, std::abs(std::stoi(key)));
  }
  cand.h_lags = MatrixSeq::zero(cand.T, L, true);
  std::vector<bool> given(2 * L + 1, false);
  for (const auto& [key, value] : root["lags"].items()) {
    const int lag = std::stoi(key);
    const Eigen::MatrixXd block = matrix_from_json(value);
    if (block.rows() != cand.T || block.cols() != cand.T)
      fail("candidate lag blocks must be T x T with T = len(m)");
    cand.h_lags.block(lag) = block;
    given[lag + L] = true;
  }
  for (int l = 1; l <= L; ++l) {
    if (given[l + L] && !given[-l + L])
      cand.h_lags.block(-l) = cand.h_lags.block(l).transpose();
    else if (given[-l + L] && !given[l + L])
      cand.h_lags.block(l) = cand.h_lags.block(-l).transpose();
  }
  if (cand.h_lags.symmetry_defect() > 1e-9)
    fail("candidate lags violate the transpose pairing");
  return cand;
}

std::string validation_report_json(const ValidationReport& report) {
  json j;
  j["valid"] = report.valid;
  j["lambda_sum"] = report.lambda_sum;
  j["lambda_min"] = report.lambda_min;
  j["min_spectrum"] = report.min_spectrum;
  json v = json::array();
  for (const auto& viol : report.violations)
    v.push_back(json{{"check", viol.check}, {"location", viol.location}, {"value", viol.value}});
  j["violations"] = v;
  return j.dump(2) + "\n";
}

std::string limit_law_json(const LimitLaw& law) {
  json j;
  j["model"] = model_to_json(law.params);
  j["lambda"] = lambda_to_json(law.lambda);
  j["c_e"] = vector_to_json(law.moments.c);
  json M;
  for (int l = -law.moments.d; l <= law.moments.d; ++l)
    M[std::to_string(l)] = matrix_to_json(law.moments.Mblock(l));
  j["M_e"] = M;
  json K;
  for (int k = -law.cov.d; k <= law.cov.d; ++k)
    K[std::to_string(k)] = matrix_to_json(law.cov.block(k));
  j["K_e"] = K;
  j["meta"] = json{{"Q_gh", law.gh_nodes}, {"residual", law.residual}};
  return j.dump(2) + "\n";
}

LimitLaw parse_limit_law(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(std::string("invalid limit-law JSON: ") + e.what());
  }
  LimitLaw law{parse_model(root.at("model")), parse_lambda(root.at("lambda")),
               MomentData{}, CovSeq{}, 0, 0.0};
  const int T = law.params.T;
  const int d = law.lambda.d();
  law.moments = MomentData::zero(T, d);
  const auto& c = root.at("c_e");
  if (static_cast<int>(c.size()) != T) fail("c_e length must equal T");
  for (int t = 0; t < T; ++t) law.moments.c(t) = c[t].get<double>();
  for (int l = -d; l <= d; ++l)
    law.moments.Mblock(l) = matrix_from_json(root.at("M_e").at(std::to_string(l)));
  law.cov = CovSeq::zero(T, d);
  for (int k = -d; k <= d; ++k)
    law.cov.block(k) = matrix_from_json(root.at("K_e").at(std::to_string(k)));
  if (root.contains("meta")) {
    law.gh_nodes = root["meta"].value("Q_gh", 0);
    law.residual = root["meta"].value("residual", 0.0);
  }
  return law;
}

std::string rate_report_json(const RateReport& report) {
  json j;
  j["gamma1"] = report.gamma1;
  j["gamma2"] = report.gamma2;
  j["gamma"] = report.gamma;
  j["i3"] = report.i3;
  j["h"] = report.h;
  j["quad_shift"] = report.quad_shift;
  j["bounds"] = json{{"rho_K", report.bounds.rho_K},
                     {"alpha", report.bounds.alpha},
                     {"beta1", report.bounds.beta1},
                     {"beta2", report.bounds.beta2}};
  return j.dump(2) + "\n";
}

std::string convergence_report_json(const ConvergenceReport& report, int T, int d) {
  const std::vector<std::string> labels = moment_entry_labels(T, d);
  auto entry_to_json = [&](const ConvergenceEntry& e) {
    json je;
    je["N"] = e.N;
    je["sup_error"] = e.sup_error;
    je["max_abs_z"] = e.max_abs_z;
    json entries = json::array();
    for (Eigen::Index i = 0; i < e.mean.size(); ++i)
      entries.push_back(json{{"label", labels[i]},
                             {"mean", e.mean(i)},
                             {"se", e.se(i)},
                             {"target", e.target(i)}});
    je["entries"] = entries;
    return je;
  };
  json j;
  json ann = json::array();
  for (const auto& e : report.annealed) ann.push_back(entry_to_json(e));
  j["annealed"] = ann;
  j["slope"] = report.slope;
  j["annealed_band"] = report.annealed_band;
  j["residual"] = report.residual;
  if (report.has_quenched) {
    j["quenched"] = entry_to_json(report.quenched);
    j["quenched_band"] = report.quenched_band;
  }
  return j.dump(2) + "\n";
}

std::string moments_json(const std::vector<EmpiricalMoments>& per_trial,
                         double j_bar) {
  (void)j_bar;
  json trials = json::array();
  for (const auto& emp : per_trial) {
    json t;
    t["c_hat"] = vector_to_json(emp.c_hat);
    json M;
    for (int k = -emp.K_lag; k <= emp.K_lag; ++k)
      M[std::to_string(k)] = matrix_to_json(emp.M_hat[k + emp.K_lag]);
    t["M_hat"] = M;
    trials.push_back(t);
  }
  json j;
  j["trials"] = trials;
  if (!per_trial.empty()) {
    const int T = per_trial.front().T;
    const int K = per_trial.front().K_lag;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(T);
    std::vector<Eigen::MatrixXd> M(2 * K + 1, Eigen::MatrixXd::Zero(T, T));
    for (const auto& emp : per_trial) {
      c += emp.c_hat;
      for (int k = 0; k <= 2 * K; ++k) M[k] += emp.M_hat[k];
    }
    c /= static_cast<double>(per_trial.size());
    json Mavg;
    for (int k = -K; k <= K; ++k)
      Mavg[std::to_string(k)] = matrix_to_json(M[k + K] / static_cast<double>(per_trial.size()));
    j["average"] = json{{"c_hat", vector_to_json(c)}, {"M_hat", Mavg}};
  }
  return j.dump(2) + "\n";
}

std::string weights_csv(const WeightMatrix& w, std::uint64_t seed,
                        const LambdaSpec& spec) {
  std::ostringstream os;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(spec.hash()));
  os << "# N=" << w.N << " seed=" << seed << " lambda_hash=" << buf << "\n";
  os << "# row = presynaptic neuron i, column = postsynaptic neuron j, both in ring order -n..n\n";
  const int N = w.N;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", w.W(j, i));
      os << buf;
      if (j + 1 < N) os << ",";
    }
    os << "\n";
  }
  return os.str();
}

std::string trajectory_csv(const std::vector<Trajectory>& trajs) {
  std::ostringstream os;
  os << "trial,j,t,U\n";
  char buf[64];
  for (std::size_t trial = 0; trial < trajs.size(); ++trial) {
    const Trajectory& traj = trajs[trial];
    const int n = (traj.N - 1) / 2;
    for (int a = 0; a < traj.N; ++a)
      for (int t = 0; t <= traj.T; ++t) {
        std::snprintf(buf, sizeof(buf), "%.17g", traj.U(a, t));
        os << trial << "," << (a - n) << "," << t << "," << buf << "\n";
      }
  }
  return os.str();
}

}  // namespace ratenet
