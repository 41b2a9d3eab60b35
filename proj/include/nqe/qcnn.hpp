#pragma once

#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "nqe/embedding.hpp"
#include "nqe/neuralnet.hpp"
#include "nqe/sim.hpp"

// Quantum convolutional neural network classifier: weight-shared two-qubit
// blocks after the embedding, misclassification-probability (linear) loss,
// parameter-shift training, and accuracy evaluation.
//
// Variational gates use the textbook e^{-i theta P / 2} convention (shift
// +-pi/2, coefficient 1/2); embedding gates keep the e^{+i phi P} convention.

namespace nqe {

enum class AnsatzKind { Su4, Simple };

struct QcnnSpec {
  int n_qubits = 4;
  AnsatzKind ansatz = AnsatzKind::Su4;
  // Qubit pairings per convolution layer; blocks within one layer share
  // parameters.
  std::vector<std::vector<std::pair<int, int>>> layers;
  int readout = 1;

  int block_arity() const { return ansatz == AnsatzKind::Su4 ? 15 : 2; }
  std::size_t shared_param_count() const { return layers.size() * std::size_t(block_arity()); }
  std::size_t expanded_param_count() const;

  // Conv layer 1 on (0,1),(2,3),...; layer 2 on (1,2),(3,4),...,(n-1,0);
  // readout qubit 1 for the 4-qubit pooled preset, n/2 otherwise.
  static QcnnSpec standard(int n_qubits, AnsatzKind ansatz, bool pooled_readout = true);
};

// Shared parameters -> one angle per parameterized gate occurrence.
std::vector<double> expand_qcnn_params(const QcnnSpec& spec,
                                       const std::vector<double>& shared);
// Sum an expanded-space gradient back onto the shared parameters.
std::vector<double> reduce_qcnn_grad(const QcnnSpec& spec,
                                     const std::vector<double>& expanded_grad);

Circuit qcnn_circuit(const QcnnSpec& spec, const std::vector<double>& expanded);

// f = <x| U^dag Z_readout U |x> in [-1, 1].
double qcnn_predict(const StateVector& state, const QcnnSpec& spec,
                    const std::vector<double>& shared);
double qcnn_predict_dm(const DensityMatrix& dm, const QcnnSpec& spec,
                       const std::vector<double>& shared,
                       const std::optional<NoiseModel>& noise);

// (1/N) sum (1 - y_i f_i)/2
double linear_loss(const std::vector<double>& predictions, const std::vector<int>& labels);

struct QcnnTrainConfig {
  int iterations = 200;
  int batch_size = 32;
  double learning_rate = 0.01;
  OptimizerKind optimizer = OptimizerKind::Nesterov;
  std::uint64_t seed = 0;
  std::optional<NoiseModel> noise;  // noisy ansatz evaluation on DM inputs
};

struct QcnnTrainResult {
  std::vector<double> theta;
  std::vector<double> loss_history;       // per-iteration batch loss
  std::vector<double> full_loss_history;  // full-dataset loss per iteration (exact mode)
};

// Pre-embedded inputs: statevectors (noiseless) or density matrices (noisy).
class EmbeddedDataset {
public:
  std::vector<StateVector> states;
  std::vector<DensityMatrix> dms;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  bool noisy() const { return !dms.empty(); }
};

QcnnTrainResult train_qcnn(const EmbeddedDataset& data, const QcnnSpec& spec,
                           const QcnnTrainConfig& config,
                           bool record_full_loss = false);

double qcnn_accuracy(const EmbeddedDataset& data, const QcnnSpec& spec,
                     const std::vector<double>& theta,
                     const std::optional<NoiseModel>& noise = std::nullopt);

// Joint training of a trainable-unitary embedding together with the QCNN:
// theta = [embedding params (phase convention) | qcnn params (rotation
// convention)], minimized by the same parameter-shift engine.
struct JointTrainResult {
  std::vector<double> embed_theta;
  std::vector<double> qcnn_theta;
  std::vector<double> loss_history;
};

JointTrainResult train_qcnn_tue(const std::vector<std::vector<double>>& features,
                                const std::vector<int>& labels,
                                const EmbeddingSpec& embed_spec, const QcnnSpec& spec,
                                const QcnnTrainConfig& config);

double qcnn_tue_loss(const std::vector<std::vector<double>>& features,
                     const std::vector<int>& labels, const EmbeddingSpec& embed_spec,
                     const std::vector<double>& embed_theta, const QcnnSpec& spec,
                     const std::vector<double>& qcnn_theta);

double qcnn_tue_accuracy(const std::vector<std::vector<double>>& features,
                         const std::vector<int>& labels, const EmbeddingSpec& embed_spec,
                         const std::vector<double>& embed_theta, const QcnnSpec& spec,
                         const std::vector<double>& qcnn_theta);

}  // namespace nqe
