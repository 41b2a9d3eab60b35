#include "nqe/nqe_trainer.hpp"

#include <algorithm>
#include <cmath>

namespace nqe {

std::vector<double> NqeModel::angles_for(const std::vector<double>& x,
                                         ForwardCache* cache) const {
  Vec input;
  if (pca) {
    input = pca_transform(*pca, Eigen::Map<const Vec>(x.data(), Eigen::Index(x.size())));
  } else {
    input = Eigen::Map<const Vec>(x.data(), Eigen::Index(x.size()));
  }
  const Vec out = net->forward(input, cache);
  if (out.size() != embedding.angle_arity())
    throw SimError("nqe model: net output arity != embedding angle arity");
  return {out.data(), out.data() + out.size()};
}

StateVector NqeModel::embed(const std::vector<double>& x) const {
  return zz_feature_state(angles_for(x, nullptr), embedding);
}

double fid_loss(double fidelity, int y_i, int y_j) {
  if ((y_i != -1 && y_i != 1) || (y_j != -1 && y_j != 1))
    throw SimError("fid_loss: labels must be +/-1");
  const double target = 0.5 * (1.0 + double(y_i) * double(y_j));
  const double dev = fidelity - target;
  return dev * dev;
}

std::vector<std::pair<std::size_t, std::size_t>> sample_pairs(std::size_t dataset_size,
                                                              int batch_pairs,
                                                              std::mt19937_64& rng) {
  if (dataset_size < 2) throw SimError("sample_pairs: need at least 2 points");
  if (batch_pairs < 1) throw SimError("sample_pairs: batch_pairs must be >= 1");
  std::uniform_int_distribution<std::size_t> dist(0, dataset_size - 1);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(std::size_t(batch_pairs));
  while (pairs.size() < std::size_t(batch_pairs)) {
    const std::size_t i = dist(rng), j = dist(rng);
    if (i == j) continue;
    pairs.push_back({i, j});
  }
  return pairs;
}

namespace {

double pair_fidelity(const std::vector<double>& angles, const EmbeddingSpec& spec,
                     const NqeTrainConfig& config, std::mt19937_64& rng) {
  const std::size_t arity = std::size_t(spec.angle_arity());
  const std::vector<double> a_i(angles.begin(), angles.begin() + std::ptrdiff_t(arity));
  const std::vector<double> a_j(angles.begin() + std::ptrdiff_t(arity), angles.end());
  if (config.fidelity_mode == FidelityMode::Exact && !config.noise) {
    return fidelity_exact(zz_feature_state(a_i, spec), zz_feature_state(a_j, spec));
  }
  Circuit combined = zz_feature_circuit(a_i, spec);
  const Circuit adj = adjoint_circuit(zz_feature_circuit(a_j, spec));
  combined.insert(combined.end(), adj.begin(), adj.end());
  double p_zero;
  if (config.noise && !config.noise->trivial()) {
    const DensityMatrix dm = evolve_noisy(combined, spec.n_qubits, *config.noise);
    p_zero = readout_probabilities(dm, *config.noise)[0];
  } else {
    p_zero = std::norm(run_circuit(combined, spec.n_qubits).amp(0));
  }
  p_zero = std::clamp(p_zero, 0.0, 1.0);
  if (config.fidelity_mode == FidelityMode::Exact) return p_zero;
  std::binomial_distribution<int> dist(config.shots, p_zero);
  return double(dist(rng)) / double(config.shots);
}

}  // namespace

PairGrad hybrid_grad(const NqeModel& model, const std::vector<double>& x_i, int y_i,
                     const std::vector<double>& x_j, int y_j,
                     const NqeTrainConfig& config, std::mt19937_64& rng) {
  ForwardCache cache_i, cache_j;
  const std::vector<double> a_i = model.angles_for(x_i, &cache_i);
  const std::vector<double> a_j = model.angles_for(x_j, &cache_j);
  std::vector<double> concat = a_i;
  concat.insert(concat.end(), a_j.begin(), a_j.end());

  auto eval = [&](const std::vector<double>& angles) {
    return pair_fidelity(angles, model.embedding, config, rng);
  };
  const double f = eval(concat);
  const double target = 0.5 * (1.0 + double(y_i) * double(y_j));
  const double dl_df = 2.0 * (f - target);

  PairGrad out;
  out.fidelity = f;
  out.loss = fid_loss(f, y_i, y_j);
  if (dl_df == 0.0) {
    out.net_grad.assign(model.net->param_count(), 0.0);
    return out;
  }
  const std::vector<double> df_da = grad_all_param_shift(eval, concat);

  const Eigen::Index arity = Eigen::Index(a_i.size());
  Vec d_out_i(arity), d_out_j(arity);
  for (Eigen::Index k = 0; k < arity; ++k) {
    d_out_i[k] = dl_df * df_da[std::size_t(k)];
    d_out_j[k] = dl_df * df_da[std::size_t(k) + std::size_t(arity)];
  }
  out.net_grad = model.net->backward(cache_i, d_out_i);
  const std::vector<double> g_j = model.net->backward(cache_j, d_out_j);
  for (std::size_t k = 0; k < out.net_grad.size(); ++k) out.net_grad[k] += g_j[k];
  return out;
}

double model_reported_trace_distance(const NqeModel& model, const Dataset& data,
                                     std::size_t subset) {
  const std::size_t n = subset == 0 ? data.size() : std::min(subset, data.size());
  std::vector<StateVector> minus, plus;
  for (std::size_t i = 0; i < n; ++i) {
    StateVector s = model.embed(data.row(i));
    (data.labels[i] < 0 ? minus : plus).push_back(std::move(s));
  }
  if (minus.empty() || plus.empty())
    throw SimError("trace distance eval: subset lacks one class");
  return reported_trace_distance(ensemble_from_states(minus, plus));
}

NqeTrainResult train_nqe(const Dataset& data, NqeModel& model,
                         const NqeTrainConfig& config) {
  if (config.iterations < 1) throw SimError("train_nqe: iterations must be >= 1");
  if (data.size() < 2) throw SimError("train_nqe: dataset too small");
  for (int y : data.labels)
    if (y != -1 && y != 1) throw SimError("train_nqe: labels must be +/-1");

  std::mt19937_64 rng(config.seed);
  OptimizerState opt;
  opt.kind = config.optimizer;
  opt.lr = config.learning_rate;

  std::vector<double> params = model.net->params();
  NqeTrainResult result;
  for (int it = 0; it < config.iterations; ++it) {
    const auto pairs = sample_pairs(data.size(), config.batch_pairs, rng);
    std::vector<double> grad(params.size(), 0.0);
    double loss_sum = 0.0;
    for (const auto& [i, j] : pairs) {
      const PairGrad pg = hybrid_grad(model, data.row(i), data.labels[i], data.row(j),
                                      data.labels[j], config, rng);
      loss_sum += pg.loss;
      for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += pg.net_grad[k];
    }
    const double inv = 1.0 / double(pairs.size());
    for (double& g : grad) g *= inv;
    const double mean_loss = loss_sum * inv;
    if (!std::isfinite(mean_loss)) throw SimError("train_nqe: loss diverged (NaN)");

    opt_step(opt, params, grad);
    model.net->set_params(params);

    NqeHistoryRow row;
    row.iteration = it + 1;
    row.mean_loss = mean_loss;
    if (config.trace_distance_every > 0 &&
        ((it + 1) % config.trace_distance_every == 0 || it + 1 == config.iterations)) {
      row.reported_trace_distance =
          model_reported_trace_distance(model, data, config.eval_subset);
    }
    result.history.push_back(row);
  }
  result.final_reported_trace_distance =
      model_reported_trace_distance(model, data, config.eval_subset);
  return result;
}

}  // namespace nqe
