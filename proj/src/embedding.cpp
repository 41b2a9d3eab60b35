#include "nqe/embedding.hpp"

#include <cmath>

namespace nqe {

std::vector<std::pair<int, int>> EmbeddingSpec::couplings() const {
  std::vector<std::pair<int, int>> out;
  const int n = n_qubits;
  if (n < 2) return out;
  for (int i = 0; i + 1 < n; ++i) out.push_back({i, i + 1});
  if (topology == Topology::Ring && n >= 3) out.push_back({n - 1, 0});
  return out;
}

std::vector<double> classical_feature_map(const std::vector<double>& x,
                                          const EmbeddingSpec& spec) {
  if (int(x.size()) != spec.n_qubits)
    throw SimError("classical_feature_map: length mismatch with spec");
  std::vector<double> angles;
  angles.reserve(spec.layer_arity());
  for (double xi : x) angles.push_back(xi);
  for (const auto& [i, j] : spec.couplings())
    angles.push_back((M_PI - x[i]) * (M_PI - x[j]) / 2.0);
  return angles;
}

std::vector<double> replicate_layers(const std::vector<double>& layer_angles,
                                     const EmbeddingSpec& spec) {
  if (int(layer_angles.size()) != spec.layer_arity())
    throw SimError("replicate_layers: arity mismatch");
  std::vector<double> out;
  out.reserve(spec.angle_arity());
  for (int l = 0; l < spec.layers; ++l)
    out.insert(out.end(), layer_angles.begin(), layer_angles.end());
  return out;
}

Circuit zz_feature_circuit(const std::vector<double>& angles, const EmbeddingSpec& spec) {
  if (int(angles.size()) != spec.angle_arity())
    throw SimError("zz_feature_circuit: angle arity mismatch");
  const auto pairs = spec.couplings();
  Circuit c;
  std::size_t k = 0;
  for (int l = 0; l < spec.layers; ++l) {
    for (int q = 0; q < spec.n_qubits; ++q) c.push_back(g_h(q));
    for (int q = 0; q < spec.n_qubits; ++q) c.push_back(g_rz_phase(q, angles[k++]));
    for (const auto& [i, j] : pairs) c.push_back(g_rzz_phase(i, j, angles[k++]));
  }
  return c;
}

StateVector zz_feature_state(const std::vector<double>& angles, const EmbeddingSpec& spec) {
  return run_circuit(zz_feature_circuit(angles, spec), spec.n_qubits);
}

Circuit trainable_unitary_circuit(const std::vector<double>& x,
                                  const std::vector<double>& theta,
                                  const EmbeddingSpec& spec) {
  if (int(theta.size()) != spec.angle_arity())
    throw SimError("trainable_unitary_circuit: theta arity mismatch");
  const auto pairs = spec.couplings();
  const std::vector<double> phi = classical_feature_map(x, spec);
  Circuit c;
  std::size_t k = 0;
  for (int l = 0; l < spec.layers; ++l) {
    // Y-generator exponential first, then V(phi(x)).
    for (int q = 0; q < spec.n_qubits; ++q) c.push_back(g_ry_phase(q, theta[k++]));
    for (const auto& [i, j] : pairs) c.push_back(g_ryy_phase(i, j, theta[k++]));
    std::size_t p = 0;
    for (int q = 0; q < spec.n_qubits; ++q) c.push_back(g_h(q));
    for (int q = 0; q < spec.n_qubits; ++q) c.push_back(g_rz_phase(q, phi[p++]));
    for (const auto& [i, j] : pairs) c.push_back(g_rzz_phase(i, j, phi[p++]));
  }
  return c;
}

StateVector trainable_unitary_state(const std::vector<double>& x,
                                    const std::vector<double>& theta,
                                    const EmbeddingSpec& spec) {
  return run_circuit(trainable_unitary_circuit(x, theta, spec), spec.n_qubits);
}

StateVector amplitude_encode(const std::vector<double>& x, int n_qubits) {
  const std::size_t dim = std::size_t(1) << n_qubits;
  if (x.size() > dim) throw SimError("amplitude_encode: vector longer than 2^n");
  double norm_sq = 0.0;
  for (double v : x) norm_sq += v * v;
  if (norm_sq <= 0.0) throw SimError("amplitude_encode: zero vector");
  const double inv = 1.0 / std::sqrt(norm_sq);
  CVec amps = CVec::Zero(dim);
  for (std::size_t i = 0; i < x.size(); ++i) amps[Eigen::Index(i)] = x[i] * inv;
  return StateVector(n_qubits, std::move(amps));
}

}  // namespace nqe
