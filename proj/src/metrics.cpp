#include "nqe/metrics.hpp"

#include <cmath>

namespace nqe {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

namespace {

DensityMatrix mean_outer(const std::vector<StateVector>& states) {
  if (states.empty()) throw SimError("ensemble: empty class");
  const int n = states[0].n_qubits();
  CMat acc = CMat::Zero(states[0].dim(), states[0].dim());
  for (const StateVector& s : states) {
    if (s.n_qubits() != n) throw SimError("ensemble: mixed qubit counts");
    acc += s.amplitudes() * s.amplitudes().adjoint();
  }
  acc /= double(states.size());
  return DensityMatrix(n, std::move(acc));
}

}  // namespace

EnsemblePair ensemble_from_states(const std::vector<StateVector>& minus,
                                  const std::vector<StateVector>& plus) {
  EnsemblePair ens{mean_outer(minus), mean_outer(plus)};
  ens.n_minus = minus.size();
  ens.n_plus = plus.size();
  const double total = double(ens.n_minus + ens.n_plus);
  ens.p_minus = double(ens.n_minus) / total;
  ens.p_plus = double(ens.n_plus) / total;
  return ens;
}

EnsemblePair ensemble_from_dms(const std::vector<DensityMatrix>& minus,
                               const std::vector<DensityMatrix>& plus) {
  if (minus.empty() || plus.empty()) throw SimError("ensemble: empty class");
  auto mean_dm = [](const std::vector<DensityMatrix>& dms) {
    CMat acc = CMat::Zero(dms[0].dim(), dms[0].dim());
    for (const DensityMatrix& d : dms) acc += d.matrix();
    acc /= double(dms.size());
    return DensityMatrix(dms[0].n_qubits(), std::move(acc));
  };
  EnsemblePair ens{mean_dm(minus), mean_dm(plus)};
  ens.n_minus = minus.size();
  ens.n_plus = plus.size();
  const double total = double(ens.n_minus + ens.n_plus);
  ens.p_minus = double(ens.n_minus) / total;
  ens.p_plus = double(ens.n_plus) / total;
  return ens;
}

double weighted_trace_distance(const EnsemblePair& ens) {
  const CMat diff = 0.5 * ((ens.p_minus * ens.rho_minus.matrix() -
                            ens.p_plus * ens.rho_plus.matrix()) +
                           (ens.p_minus * ens.rho_minus.matrix() -
                            ens.p_plus * ens.rho_plus.matrix()).adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(diff, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double reported_trace_distance(const EnsemblePair& ens) {
  return 2.0 * weighted_trace_distance(ens);
}

double risk_lower_bound(const EnsemblePair& ens) {
  return 0.5 - weighted_trace_distance(ens);
}

HelstromPovm helstrom_povm(const EnsemblePair& ens) {
  const CMat gap = ens.p_plus * ens.rho_plus.matrix() - ens.p_minus * ens.rho_minus.matrix();
  const CMat sym = 0.5 * (gap + gap.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(sym);
  const Eigen::Index d = sym.rows();
  CMat e_plus = CMat::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    double lam = es.eigenvalues()[i];
    if (std::abs(lam) < 1e-12) lam = 0.0;
    if (lam >= 0.0)
      e_plus += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
  }
  return {e_plus, CMat::Identity(d, d) - e_plus};
}

double povm_loss(const EnsemblePair& ens, const CMat& e_plus) {
  const CMat e_minus = CMat::Identity(e_plus.rows(), e_plus.cols()) - e_plus;
  const double miss_minus = (e_plus * ens.rho_minus.matrix()).trace().real();
  const double miss_plus = (e_minus * ens.rho_plus.matrix()).trace().real();
  return ens.p_minus * miss_minus + ens.p_plus * miss_plus;
}

double purity(const DensityMatrix& dm) {
  return (dm.matrix() * dm.matrix()).trace().real();
}

// ---------------------------------------------------------------------------
// Expressibility

namespace {

CMat swap_operator(Eigen::Index d) {
  CMat s = CMat::Zero(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) s(i * d + j, j * d + i) = 1.0;
  return s;
}

}  // namespace

ExpressibilityReport expressibility_deviation(const std::vector<StateVector>& states,
                                              int order) {
  if (states.empty()) throw SimError("expressibility: empty ensemble");
  if (order != 1 && order != 2) throw SimError("expressibility: order must be 1 or 2");
  const int n = states[0].n_qubits();
  if (order == 2 && n > 6) throw SimError("expressibility: order 2 limited to n <= 6");
  const Eigen::Index d = states[0].dim();

  CMat haar, mean;
  if (order == 1) {
    haar = CMat::Identity(d, d) / double(d);
    mean = CMat::Zero(d, d);
    for (const StateVector& s : states) mean += s.amplitudes() * s.amplitudes().adjoint();
  } else {
    haar = (CMat::Identity(d * d, d * d) + swap_operator(d)) / double(d * (d + 1));
    mean = CMat::Zero(d * d, d * d);
    for (const StateVector& s : states) {
      CVec v2(d * d);
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
          v2[i * d + j] = s.amplitudes()[i] * s.amplitudes()[j];
      mean += v2 * v2.adjoint();
    }
  }
  mean /= double(states.size());
  const CMat a = haar - mean;
  ExpressibilityReport rep;
  rep.order = order;
  rep.sample_count = states.size();
  rep.epsilon = std::sqrt((a.adjoint() * a).trace().real());
  return rep;
}

double expressibility_deviation_gram(const std::vector<StateVector>& states, int order) {
  const double d = double(states[0].dim());
  const std::size_t n = states.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double f = fidelity_exact(states[i], states[j]);
      acc += order == 1 ? f : f * f;
    }
  acc /= double(n) * double(n);
  const double haar = order == 1 ? 1.0 / d : 2.0 / (d * (d + 1.0));
  return std::sqrt(std::max(0.0, acc - haar));
}

// ---------------------------------------------------------------------------
// Local effective dimension

double led_identity_closed_form(int d_params, std::size_t n_data, double gamma) {
  const double kappa = gamma * double(n_data) / (2.0 * M_PI * std::log(double(n_data)));
  const double led = d_params * std::log1p(kappa) / std::log(kappa);
  return std::min(double(d_params), led);
}

double local_effective_dimension(
    const std::function<std::vector<double>(const std::vector<double>&,
                                            const std::vector<double>&)>& grad_f,
    const std::function<double(const std::vector<double>&,
                               const std::vector<double>&)>& f,
    const std::vector<std::vector<double>>& data,
    const std::vector<double>& theta_star, const LedConfig& cfg) {
  if (cfg.n_data <= 1) throw SimError("led: n_data must exceed 1");
  if (cfg.mc_samples < 2) throw SimError("led: need at least 2 Monte Carlo samples");
  if (cfg.ball_radius <= 0) throw SimError("led: radius must be positive");
  const int dim = int(theta_star.size());
  const double kappa =
      cfg.gamma * double(cfg.n_data) / (2.0 * M_PI * std::log(double(cfg.n_data)));

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(-cfg.ball_radius, cfg.ball_radius);

  // Empirical Fisher of p(y|x;theta) = (1 + y f)/2:
  // F = E_x [ grad f grad f^T / (1 - f^2) ].
  auto fisher = [&](const std::vector<double>& theta) {
    Mat f_mat = Mat::Zero(dim, dim);
    for (const auto& x : data) {
      const std::vector<double> g = grad_f(x, theta);
      const double fx = f(x, theta);
      const double denom = std::max(1e-9, 1.0 - fx * fx);
      Vec gv = Eigen::Map<const Vec>(g.data(), dim);
      f_mat += gv * gv.transpose() / denom;
    }
    f_mat /= double(data.size());
    return f_mat;
  };

  std::vector<Mat> fishers;
  fishers.reserve(std::size_t(cfg.mc_samples));
  double trace_sum = 0.0;
  for (int s = 0; s < cfg.mc_samples; ++s) {
    std::vector<double> theta = theta_star;
    for (double& t : theta) t += unif(rng);
    Mat fm = fisher(theta);
    trace_sum += fm.trace();
    fishers.push_back(std::move(fm));
  }
  const double mean_trace = trace_sum / double(cfg.mc_samples);
  if (mean_trace <= 0.0) return 0.0;  // constant model

  // LED = 2 ln( mean_theta sqrt(det(I + kappa Fhat)) ) / ln kappa.
  double acc = 0.0;
  for (const Mat& fm : fishers) {
    Mat fhat = double(dim) * fm / mean_trace;
    Mat m = Mat::Identity(dim, dim) + kappa * fhat;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()),
                                          Eigen::EigenvaluesOnly);
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      logdet += std::log(std::max(1.0, es.eigenvalues()[i]));
    acc += std::exp(0.5 * logdet);
  }
  acc /= double(cfg.mc_samples);
  const double led = 2.0 * std::log(acc) / std::log(kappa);
  return std::min(double(dim), std::max(0.0, led));
}

}  // namespace nqe
