#include "nqe/qcnn.hpp"

#include <cmath>

namespace nqe {

std::size_t QcnnSpec::expanded_param_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.size() * std::size_t(block_arity());
  return n;
}

QcnnSpec QcnnSpec::standard(int n_qubits, AnsatzKind ansatz, bool pooled_readout) {
  if (n_qubits < 2 || n_qubits % 2 != 0)
    throw SimError("qcnn: standard schedule needs an even qubit count >= 2");
  QcnnSpec spec;
  spec.n_qubits = n_qubits;
  spec.ansatz = ansatz;
  std::vector<std::pair<int, int>> layer1, layer2;
  for (int q = 0; q + 1 < n_qubits; q += 2) layer1.push_back({q, q + 1});
  for (int q = 1; q + 1 < n_qubits; q += 2) layer2.push_back({q, q + 1});
  if (n_qubits > 2) layer2.push_back({n_qubits - 1, 0});
  spec.layers = {layer1, layer2};
  spec.readout = pooled_readout && n_qubits == 4 ? 1 : n_qubits / 2;
  return spec;
}

std::vector<double> expand_qcnn_params(const QcnnSpec& spec,
                                       const std::vector<double>& shared) {
  if (shared.size() != spec.shared_param_count())
    throw SimError("qcnn: shared parameter arity mismatch");
  std::vector<double> expanded;
  expanded.reserve(spec.expanded_param_count());
  const int arity = spec.block_arity();
  for (std::size_t l = 0; l < spec.layers.size(); ++l)
    for (std::size_t b = 0; b < spec.layers[l].size(); ++b)
      for (int k = 0; k < arity; ++k)
        expanded.push_back(shared[l * std::size_t(arity) + std::size_t(k)]);
  return expanded;
}

std::vector<double> reduce_qcnn_grad(const QcnnSpec& spec,
                                     const std::vector<double>& expanded_grad) {
  std::vector<double> shared(spec.shared_param_count(), 0.0);
  const int arity = spec.block_arity();
  std::size_t e = 0;
  for (std::size_t l = 0; l < spec.layers.size(); ++l)
    for (std::size_t b = 0; b < spec.layers[l].size(); ++b)
      for (int k = 0; k < arity; ++k)
        shared[l * std::size_t(arity) + std::size_t(k)] += expanded_grad[e++];
  return shared;
}

namespace {

void append_block(Circuit& c, AnsatzKind ansatz, int a, int b,
                  const std::vector<double>& p, std::size_t& k) {
  if (ansatz == AnsatzKind::Simple) {
    c.push_back(g_ry(a, p[k++]));
    c.push_back(g_ry(b, p[k++]));
    c.push_back(g_cnot(a, b));
    return;
  }
  // SU(4): Euler on both, XX/YY/ZZ rotations, Euler on both (15 parameters).
  c.push_back(g_rz(a, p[k++]));
  c.push_back(g_ry(a, p[k++]));
  c.push_back(g_rz(a, p[k++]));
  c.push_back(g_rz(b, p[k++]));
  c.push_back(g_ry(b, p[k++]));
  c.push_back(g_rz(b, p[k++]));
  c.push_back(g_rxx(a, b, p[k++]));
  c.push_back(g_ryy(a, b, p[k++]));
  c.push_back(g_rzz(a, b, p[k++]));
  c.push_back(g_rz(a, p[k++]));
  c.push_back(g_ry(a, p[k++]));
  c.push_back(g_rz(a, p[k++]));
  c.push_back(g_rz(b, p[k++]));
  c.push_back(g_ry(b, p[k++]));
  c.push_back(g_rz(b, p[k++]));
}

}  // namespace

Circuit qcnn_circuit(const QcnnSpec& spec, const std::vector<double>& expanded) {
  if (expanded.size() != spec.expanded_param_count())
    throw SimError("qcnn: expanded parameter arity mismatch");
  Circuit c;
  std::size_t k = 0;
  for (const auto& layer : spec.layers)
    for (const auto& [a, b] : layer) append_block(c, spec.ansatz, a, b, expanded, k);
  return c;
}

double qcnn_predict(const StateVector& state, const QcnnSpec& spec,
                    const std::vector<double>& shared) {
  if (state.n_qubits() != spec.n_qubits) throw SimError("qcnn_predict: qubit mismatch");
  StateVector psi = state;
  for (const Gate& g : qcnn_circuit(spec, expand_qcnn_params(spec, shared)))
    apply_gate(psi, g);
  return expectation(psi, Observable::z(spec.readout));
}

namespace {

double predict_expanded(const StateVector& state, const QcnnSpec& spec,
                        const std::vector<double>& expanded) {
  StateVector psi = state;
  for (const Gate& g : qcnn_circuit(spec, expanded)) apply_gate(psi, g);
  return expectation(psi, Observable::z(spec.readout));
}

double predict_expanded_dm(const DensityMatrix& dm, const QcnnSpec& spec,
                           const std::vector<double>& expanded,
                           const std::optional<NoiseModel>& noise) {
  DensityMatrix rho = dm;
  const Circuit circ = qcnn_circuit(spec, expanded);
  for (const Gate& g : circ) {
    const std::vector<int> targets =
        g.two_qubit() ? std::vector<int>{g.q0, g.q1} : std::vector<int>{g.q0};
    const CMat u = lift_operator(g.matrix(), targets, rho.n_qubits());
    rho.matrix() = u * rho.matrix() * u.adjoint();
    if (noise && !noise->trivial()) {
      if (g.two_qubit()) {
        if (noise->p_dep_2q > 0)
          apply_channel_on(rho, kraus_depolarizing_2q(noise->p_dep_2q), {g.q0, g.q1});
      } else if (noise->p_dep_1q > 0) {
        apply_channel_on(rho, kraus_depolarizing_1q(noise->p_dep_1q), {g.q0});
      }
    }
  }
  return expectation(rho, Observable::z(spec.readout));
}

}  // namespace

double qcnn_predict_dm(const DensityMatrix& dm, const QcnnSpec& spec,
                       const std::vector<double>& shared,
                       const std::optional<NoiseModel>& noise) {
  return predict_expanded_dm(dm, spec, expand_qcnn_params(spec, shared), noise);
}

double linear_loss(const std::vector<double>& predictions, const std::vector<int>& labels) {
  if (predictions.empty()) throw SimError("linear_loss: empty batch");
  if (predictions.size() != labels.size()) throw SimError("linear_loss: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (labels[i] != -1 && labels[i] != 1) throw SimError("linear_loss: labels must be +/-1");
    acc += (1.0 - double(labels[i]) * predictions[i]) / 2.0;
  }
  return acc / double(predictions.size());
}

QcnnTrainResult train_qcnn(const EmbeddedDataset& data, const QcnnSpec& spec,
                           const QcnnTrainConfig& config, bool record_full_loss) {
  if (config.iterations < 1) throw SimError("train_qcnn: iterations must be >= 1");
  if (data.size() == 0) throw SimError("train_qcnn: empty dataset");

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> init(-M_PI, M_PI);
  std::vector<double> shared(spec.shared_param_count());
  for (double& t : shared) t = init(rng);

  OptimizerState opt;
  opt.kind = config.optimizer;
  opt.lr = config.learning_rate;

  auto predict_one = [&](std::size_t i, const std::vector<double>& expanded) {
    return data.noisy() ? predict_expanded_dm(data.dms[i], spec, expanded, config.noise)
                        : predict_expanded(data.states[i], spec, expanded);
  };

  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  QcnnTrainResult result;
  for (int it = 0; it < config.iterations; ++it) {
    std::vector<std::size_t> batch;
    const std::size_t bsz = std::min<std::size_t>(std::size_t(config.batch_size), data.size());
    for (std::size_t b = 0; b < bsz; ++b) batch.push_back(pick(rng));

    const std::vector<double> expanded = expand_qcnn_params(spec, shared);
    std::vector<double> expanded_grad(expanded.size(), 0.0);
    double batch_loss = 0.0;
    for (std::size_t idx : batch) {
      auto eval = [&](const std::vector<double>& e) { return predict_one(idx, e); };
      const double f = eval(expanded);
      const double w = -double(data.labels[idx]) / (2.0 * double(batch.size()));
      batch_loss += (1.0 - double(data.labels[idx]) * f) / (2.0 * double(batch.size()));
      const std::vector<double> df =
          grad_all_param_shift(eval, expanded, ShiftRule::rotation_convention());
      for (std::size_t k = 0; k < expanded_grad.size(); ++k)
        expanded_grad[k] += w * df[k];
    }
    if (!std::isfinite(batch_loss)) throw SimError("train_qcnn: loss diverged (NaN)");

    std::vector<double> grad = reduce_qcnn_grad(spec, expanded_grad);
    opt_step(opt, shared, grad);
    result.loss_history.push_back(batch_loss);

    if (record_full_loss) {
      const std::vector<double> exp_now = expand_qcnn_params(spec, shared);
      std::vector<double> preds(data.size());
      for (std::size_t i = 0; i < data.size(); ++i) preds[i] = predict_one(i, exp_now);
      result.full_loss_history.push_back(linear_loss(preds, data.labels));
    }
  }
  result.theta = shared;
  return result;
}

namespace {

double tue_predict(const std::vector<double>& x, const EmbeddingSpec& embed_spec,
                   const std::vector<double>& embed_theta, const QcnnSpec& spec,
                   const std::vector<double>& expanded) {
  StateVector psi = trainable_unitary_state(x, embed_theta, embed_spec);
  for (const Gate& g : qcnn_circuit(spec, expanded)) apply_gate(psi, g);
  return expectation(psi, Observable::z(spec.readout));
}

}  // namespace

JointTrainResult train_qcnn_tue(const std::vector<std::vector<double>>& features,
                                const std::vector<int>& labels,
                                const EmbeddingSpec& embed_spec, const QcnnSpec& spec,
                                const QcnnTrainConfig& config) {
  if (features.empty() || features.size() != labels.size())
    throw SimError("train_qcnn_tue: invalid dataset");
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> init(-M_PI, M_PI);

  std::vector<double> embed_theta(std::size_t(embed_spec.angle_arity()), 0.0);
  std::vector<double> qcnn_theta(spec.shared_param_count());
  for (double& t : qcnn_theta) t = init(rng);

  // Joint flat parameter vector: [embedding | qcnn shared].
  const std::size_t n_embed = embed_theta.size();
  std::vector<double> params = embed_theta;
  params.insert(params.end(), qcnn_theta.begin(), qcnn_theta.end());

  OptimizerState opt;
  opt.kind = config.optimizer;
  opt.lr = config.learning_rate;

  std::uniform_int_distribution<std::size_t> pick(0, features.size() - 1);
  JointTrainResult result;
  for (int it = 0; it < config.iterations; ++it) {
    std::vector<std::size_t> batch;
    const std::size_t bsz = std::min<std::size_t>(std::size_t(config.batch_size),
                                                  features.size());
    for (std::size_t b = 0; b < bsz; ++b) batch.push_back(pick(rng));

    const std::vector<double> emb(params.begin(), params.begin() + std::ptrdiff_t(n_embed));
    const std::vector<double> shared(params.begin() + std::ptrdiff_t(n_embed), params.end());
    const std::vector<double> expanded = expand_qcnn_params(spec, shared);

    std::vector<double> grad(params.size(), 0.0);
    double batch_loss = 0.0;
    for (std::size_t idx : batch) {
      const double w = -double(labels[idx]) / (2.0 * double(batch.size()));
      auto eval_embed = [&](const std::vector<double>& e) {
        return tue_predict(features[idx], embed_spec, e, spec, expanded);
      };
      auto eval_qcnn = [&](const std::vector<double>& e) {
        return tue_predict(features[idx], embed_spec, emb, spec, e);
      };
      const double f = eval_qcnn(expanded);
      batch_loss += (1.0 - double(labels[idx]) * f) / (2.0 * double(batch.size()));
      const std::vector<double> de =
          grad_all_param_shift(eval_embed, emb, ShiftRule::phase_convention());
      for (std::size_t k = 0; k < n_embed; ++k) grad[k] += w * de[k];
      const std::vector<double> dq =
          grad_all_param_shift(eval_qcnn, expanded, ShiftRule::rotation_convention());
      const std::vector<double> dq_shared = reduce_qcnn_grad(spec, dq);
      for (std::size_t k = 0; k < dq_shared.size(); ++k)
        grad[n_embed + k] += w * dq_shared[k];
    }
    if (!std::isfinite(batch_loss)) throw SimError("train_qcnn_tue: loss diverged (NaN)");
    opt_step(opt, params, grad);
    result.loss_history.push_back(batch_loss);
  }
  result.embed_theta.assign(params.begin(), params.begin() + std::ptrdiff_t(n_embed));
  result.qcnn_theta.assign(params.begin() + std::ptrdiff_t(n_embed), params.end());
  return result;
}

double qcnn_tue_loss(const std::vector<std::vector<double>>& features,
                     const std::vector<int>& labels, const EmbeddingSpec& embed_spec,
                     const std::vector<double>& embed_theta, const QcnnSpec& spec,
                     const std::vector<double>& qcnn_theta) {
  const std::vector<double> expanded = expand_qcnn_params(spec, qcnn_theta);
  std::vector<double> preds(features.size());
  for (std::size_t i = 0; i < features.size(); ++i)
    preds[i] = tue_predict(features[i], embed_spec, embed_theta, spec, expanded);
  return linear_loss(preds, labels);
}

double qcnn_tue_accuracy(const std::vector<std::vector<double>>& features,
                         const std::vector<int>& labels, const EmbeddingSpec& embed_spec,
                         const std::vector<double>& embed_theta, const QcnnSpec& spec,
                         const std::vector<double>& qcnn_theta) {
  const std::vector<double> expanded = expand_qcnn_params(spec, qcnn_theta);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const double f = tue_predict(features[i], embed_spec, embed_theta, spec, expanded);
    if ((f >= 0.0 ? 1 : -1) == labels[i]) ++correct;
  }
  return double(correct) / double(features.size());
}

double qcnn_accuracy(const EmbeddedDataset& data, const QcnnSpec& spec,
                     const std::vector<double>& theta,
                     const std::optional<NoiseModel>& noise) {
  if (data.size() == 0) throw SimError("qcnn_accuracy: empty dataset");
  const std::vector<double> expanded = expand_qcnn_params(spec, theta);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double f = data.noisy() ? predict_expanded_dm(data.dms[i], spec, expanded, noise)
                                  : predict_expanded(data.states[i], spec, expanded);
    const int pred = f >= 0.0 ? 1 : -1;  // sign(0) resolved as +1
    if (pred == data.labels[i]) ++correct;
  }
  return double(correct) / double(data.size());
}

}  // namespace nqe
