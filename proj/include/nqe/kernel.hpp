#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "nqe/sim.hpp"

// Quantum kernel computations and diagnostics: fidelity Gram matrix, the
// generalization bound G(lambda), off-diagonal variance, and numerical rank.

namespace nqe {

struct KernelMatrix {
  Eigen::MatrixXd entries;
  std::string embedding_descriptor;

  Eigen::Index size() const { return entries.rows(); }
};

KernelMatrix kernel_matrix(const std::vector<StateVector>& states,
                           const std::string& descriptor = "");

// Spectrum of the symmetrized kernel, reused across lambda values and by the
// rank diagnostic.
struct KernelSpectrum {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;
  static KernelSpectrum of(const KernelMatrix& k);
};

// G = sqrt(||W*||_F^2 / N) with
// ||W*||_F^2 = y^T (K+lambda)^{-1} K (K+lambda)^{-1} y.
double generalization_bound(const KernelSpectrum& spec, const std::vector<int>& labels,
                            double lambda);
double generalization_bound(const KernelMatrix& k, const std::vector<int>& labels,
                            double lambda);

// Population variance of the strict upper-triangle entries.
double kernel_variance(const KernelMatrix& k);

// Count of eigenvalues > N * eps_machine * lambda_max.
int kernel_rank(const KernelSpectrum& spec, Eigen::Index n);
int kernel_rank(const KernelMatrix& k);

}  // namespace nqe
