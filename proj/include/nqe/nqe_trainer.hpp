#pragma once

#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "nqe/data_io.hpp"
#include "nqe/embedding.hpp"
#include "nqe/metrics.hpp"
#include "nqe/neuralnet.hpp"

// Trains NQE (and PCA-NQE) by minimizing the pairwise fidelity loss with
// hybrid gradients: parameter shift through the circuit, chain rule into the
// classical network.

namespace nqe {

struct NqeModel {
  std::unique_ptr<Net> net;
  EmbeddingSpec embedding;
  std::optional<PcaModel> pca;  // applied before the network when present

  NqeModel clone() const {
    NqeModel m;
    m.net = net->clone();
    m.embedding = embedding;
    m.pca = pca;
    return m;
  }

  std::vector<double> angles_for(const std::vector<double>& x, ForwardCache* cache) const;
  StateVector embed(const std::vector<double>& x) const;
};

enum class FidelityMode { Exact, Shots };

struct NqeTrainConfig {
  int iterations = 50;
  int batch_pairs = 10;
  double learning_rate = 0.1;
  OptimizerKind optimizer = OptimizerKind::Sgd;
  FidelityMode fidelity_mode = FidelityMode::Exact;
  int shots = 1024;
  std::optional<NoiseModel> noise;
  std::uint64_t seed = 0;
  int trace_distance_every = 5;
  std::size_t eval_subset = 256;
};

// [f - (1 + y_i y_j)/2]^2
double fid_loss(double fidelity, int y_i, int y_j);

// batch_pairs i.i.d. uniform ordered pairs with i != j.
std::vector<std::pair<std::size_t, std::size_t>> sample_pairs(std::size_t dataset_size,
                                                              int batch_pairs,
                                                              std::mt19937_64& rng);

struct PairGrad {
  std::vector<double> net_grad;  // flat, summed over both circuit halves
  double loss = 0.0;
  double fidelity = 0.0;
};

PairGrad hybrid_grad(const NqeModel& model, const std::vector<double>& x_i, int y_i,
                     const std::vector<double>& x_j, int y_j,
                     const NqeTrainConfig& config, std::mt19937_64& rng);

struct NqeHistoryRow {
  int iteration = 0;
  double mean_loss = 0.0;
  double reported_trace_distance = std::numeric_limits<double>::quiet_NaN();
};

struct NqeTrainResult {
  std::vector<NqeHistoryRow> history;
  double final_reported_trace_distance = 0.0;
};

// Reported (figure-convention) trace distance of the model's embedding over
// an evaluation subset, computed exactly.
double model_reported_trace_distance(const NqeModel& model, const Dataset& data,
                                     std::size_t subset);

NqeTrainResult train_nqe(const Dataset& data, NqeModel& model, const NqeTrainConfig& config);

}  // namespace nqe
