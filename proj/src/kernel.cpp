#include "nqe/kernel.hpp"

#include <cmath>
#include <limits>

namespace nqe {

KernelMatrix kernel_matrix(const std::vector<StateVector>& states,
                           const std::string& descriptor) {
  if (states.empty()) throw SimError("kernel_matrix: empty dataset");
  const Eigen::Index n = Eigen::Index(states.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double f = fidelity_exact(states[std::size_t(i)], states[std::size_t(j)]);
      k(i, j) = f;
      k(j, i) = f;
    }
  }
  return {std::move(k), descriptor};
}

KernelSpectrum KernelSpectrum::of(const KernelMatrix& k) {
  const Eigen::MatrixXd sym = 0.5 * (k.entries + k.entries.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  return {es.eigenvalues(), es.eigenvectors()};
}

double generalization_bound(const KernelSpectrum& spec, const std::vector<int>& labels,
                            double lambda) {
  if (lambda <= 0) throw SimError("generalization_bound: lambda must be positive");
  const Eigen::Index n = spec.eigenvalues.size();
  if (Eigen::Index(labels.size()) != n)
    throw SimError("generalization_bound: label count mismatch");
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = double(labels[std::size_t(i)]);
  const Eigen::VectorXd proj = spec.eigenvectors.transpose() * y;
  double w_sq = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lam = std::max(0.0, spec.eigenvalues[i]);
    const double denom = lam + lambda;
    w_sq += proj[i] * proj[i] * lam / (denom * denom);
  }
  return std::sqrt(std::max(0.0, w_sq) / double(n));
}

double generalization_bound(const KernelMatrix& k, const std::vector<int>& labels,
                            double lambda) {
  return generalization_bound(KernelSpectrum::of(k), labels, lambda);
}

double kernel_variance(const KernelMatrix& k) {
  const Eigen::Index n = k.size();
  if (n < 2) throw SimError("kernel_variance: need at least 2 samples");
  double sum = 0.0, sum_sq = 0.0;
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      sum += k.entries(i, j);
      sum_sq += k.entries(i, j) * k.entries(i, j);
      ++count;
    }
  const double mean = sum / double(count);
  return sum_sq / double(count) - mean * mean;
}

int kernel_rank(const KernelSpectrum& spec, Eigen::Index n) {
  const double lam_max = std::max(0.0, spec.eigenvalues.maxCoeff());
  const double tol = double(n) * std::numeric_limits<double>::epsilon() * lam_max;
  int rank = 0;
  for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i)
    if (spec.eigenvalues[i] > tol) ++rank;
  return rank;
}

int kernel_rank(const KernelMatrix& k) {
  return kernel_rank(KernelSpectrum::of(k), k.size());
}

}  // namespace nqe
