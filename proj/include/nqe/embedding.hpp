#pragma once

#include <string>
#include <vector>

#include "nqe/sim.hpp"

// Data-embedding circuits: the ZZ feature map (fixed classical map or
// learned angles), the trainable unitary embedding, and amplitude encoding.

namespace nqe {

enum class Topology { Ring, Chain };
enum class EmbeddingKind { ZzFeature, TrainableUnitary, Amplitude };

struct EmbeddingSpec {
  int n_qubits = 4;
  int layers = 1;
  Topology topology = Topology::Ring;
  EmbeddingKind kind = EmbeddingKind::ZzFeature;

  // Ascending coupling pairs: ring has n of them, chain n-1 (n=2 has one).
  std::vector<std::pair<int, int>> couplings() const;
  int n_couplings() const { return int(couplings().size()); }
  // Angles consumed by one layer: n singles + couplings pairs.
  int layer_arity() const { return n_qubits + n_couplings(); }
  int angle_arity() const { return layers * layer_arity(); }
};

// phi_i = x_i; phi_{i,j} = (pi - x_i)(pi - x_j)/2, for one layer.
std::vector<double> classical_feature_map(const std::vector<double>& x,
                                          const EmbeddingSpec& spec);

// One-layer angles replicated across the spec's L layers.
std::vector<double> replicate_layers(const std::vector<double>& layer_angles,
                                     const EmbeddingSpec& spec);

// Per layer: H on all qubits, then RZ phases, then RZZ phases in ascending
// coupling order. `angles` is the flat per-layer concatenation
// [singles..., pairs...] x L.
Circuit zz_feature_circuit(const std::vector<double>& angles, const EmbeddingSpec& spec);
StateVector zz_feature_state(const std::vector<double>& angles, const EmbeddingSpec& spec);

// Per layer l: e^{i sum theta^l Y terms}, then the ZZ feature layer with the
// classical map of x. `theta` is flat [singles..., pairs...] x L.
Circuit trainable_unitary_circuit(const std::vector<double>& x,
                                  const std::vector<double>& theta,
                                  const EmbeddingSpec& spec);
StateVector trainable_unitary_state(const std::vector<double>& x,
                                    const std::vector<double>& theta,
                                    const EmbeddingSpec& spec);

StateVector amplitude_encode(const std::vector<double>& x, int n_qubits);

}  // namespace nqe
