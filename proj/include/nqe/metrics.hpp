#pragma once

#include <functional>
#include <random>
#include <vector>

#include "nqe/sim.hpp"

// Ensemble-level quantum-information metrics: class density matrices, trace
// distance and the risk lower bound, the Helstrom POVM, purity,
// expressibility deviation, and the local effective dimension.

namespace nqe {

struct EnsemblePair {
  DensityMatrix rho_minus;
  DensityMatrix rho_plus;
  double p_minus = 0.5;
  double p_plus = 0.5;
  std::size_t n_minus = 0;
  std::size_t n_plus = 0;
};

EnsemblePair ensemble_from_states(const std::vector<StateVector>& minus,
                                  const std::vector<StateVector>& plus);
EnsemblePair ensemble_from_dms(const std::vector<DensityMatrix>& minus,
                               const std::vector<DensityMatrix>& plus);

// Bound convention (carries the 1/2 factor): D_tr = (1/2) ||p- rho- - p+ rho+||_1.
double weighted_trace_distance(const EnsemblePair& ens);
// Figure convention: the unhalved 1-norm, i.e. 2 * weighted_trace_distance.
double reported_trace_distance(const EnsemblePair& ens);

// 1/2 - D_tr
double risk_lower_bound(const EnsemblePair& ens);

struct HelstromPovm {
  CMat e_plus;
  CMat e_minus;
};

// E+ projects onto the nonnegative eigenspace of p+ rho+ - p- rho-.
HelstromPovm helstrom_povm(const EnsemblePair& ens);

// (1/N)[N- tr(E+ rho-) + N+ tr(E- rho+)] for an arbitrary binary POVM.
double povm_loss(const EnsemblePair& ens, const CMat& e_plus);

double purity(const DensityMatrix& dm);

struct ExpressibilityReport {
  int order = 1;
  double epsilon = 0.0;
  std::size_t sample_count = 0;
};

// Hilbert-Schmidt deviation of the ensemble's order-th moment from the Haar
// moment. Order 2 builds 4^n x 4^n matrices; limited to n <= 6.
ExpressibilityReport expressibility_deviation(const std::vector<StateVector>& states,
                                              int order);

// O(N^2) Gram-sum route to the same epsilon, used as an independent check:
// eps^2 = mean_{ij} F_ij^order - order-th Haar constant.
double expressibility_deviation_gram(const std::vector<StateVector>& states, int order);

struct LedConfig {
  std::size_t n_data = 100;       // data samples for the Fisher average
  double gamma = 1.0;             // in (0, 1]
  double ball_radius = 0.05;      // perturbation radius around theta*
  int mc_samples = 32;            // Monte Carlo theta samples in the ball
  std::uint64_t seed = 0;
};

// model(x, theta) -> f in [-1, 1]; p(y|x) = (1 + y f)/2.
// grad(x, theta) -> d f / d theta.
double local_effective_dimension(
    const std::function<std::vector<double>(const std::vector<double>&,
                                            const std::vector<double>&)>& grad_f,
    const std::function<double(const std::vector<double>&,
                               const std::vector<double>&)>& f,
    const std::vector<std::vector<double>>& data,
    const std::vector<double>& theta_star, const LedConfig& cfg);

// Closed-form LED for Fhat = I with D parameters (used as an oracle).
double led_identity_closed_form(int d_params, std::size_t n_data, double gamma);

}  // namespace nqe
