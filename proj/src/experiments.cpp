#include "nqe/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nqe/kernel.hpp"
#include "nqe/parallel.hpp"

namespace nqe {

using json = nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Formatting / hashing / config plumbing

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string config_hash(const json& config) {
  const std::string dump = config.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!j.is_object()) throw ConfigError("config: " + where + " must be an object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key()))
      throw ConfigError("config: unknown key '" + item.key() + "' in " + where);
  }
}

const json& member(const json& j, const char* key) {
  static const json empty = json::object();
  auto it = j.find(key);
  return it == j.end() ? empty : *it;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config: bad value for '") + key + "'");
  }
}

std::uint64_t require_seed(const json& config, const RunContext& ctx) {
  if (ctx.seed_override) return *ctx.seed_override;
  auto it = config.find("seed");
  if (it == config.end() || !it->is_number_integer())
    throw ConfigError("config: seed required");
  return it->get<std::uint64_t>();
}

std::string topology_name(Topology t) { return t == Topology::Ring ? "ring" : "chain"; }

Topology topology_from(const std::string& s) {
  if (s == "ring") return Topology::Ring;
  if (s == "chain") return Topology::Chain;
  throw ConfigError("config: topology must be 'ring' or 'chain'");
}

EmbeddingSpec parse_embedding(const json& block) {
  check_keys(block, {"n_qubits", "layers", "topology"}, "embedding");
  EmbeddingSpec spec;
  spec.n_qubits = get_or<int>(block, "n_qubits", 4);
  spec.layers = get_or<int>(block, "layers", 1);
  spec.topology = topology_from(get_or<std::string>(block, "topology", "ring"));
  if (spec.n_qubits < 1 || spec.n_qubits > 12)
    throw ConfigError("config: embedding.n_qubits out of range");
  if (spec.layers < 1) throw ConfigError("config: embedding.layers must be >= 1");
  return spec;
}

std::optional<NoiseModel> parse_noise(const json& block) {
  if (block.empty()) return std::nullopt;
  check_keys(block,
             {"preset", "p_dep_1q", "p_dep_2q", "t1_us", "t2_us", "gate_time_1q_us",
              "gate_time_2q_us", "readout_p01", "readout_p10"},
             "noise");
  NoiseModel m;
  const std::string preset = get_or<std::string>(block, "preset", "");
  if (preset == "none") return std::nullopt;
  if (preset == "desk-nisq") {
    m = NoiseModel::desk_nisq();
  } else if (!preset.empty()) {
    throw ConfigError("config: unknown noise preset '" + preset + "'");
  }
  m.p_dep_1q = get_or<double>(block, "p_dep_1q", m.p_dep_1q);
  m.p_dep_2q = get_or<double>(block, "p_dep_2q", m.p_dep_2q);
  m.t1_us = get_or<double>(block, "t1_us", m.t1_us);
  m.t2_us = get_or<double>(block, "t2_us", m.t2_us);
  m.gate_time_1q_us = get_or<double>(block, "gate_time_1q_us", m.gate_time_1q_us);
  m.gate_time_2q_us = get_or<double>(block, "gate_time_2q_us", m.gate_time_2q_us);
  m.readout_p01 = get_or<double>(block, "readout_p01", m.readout_p01);
  m.readout_p10 = get_or<double>(block, "readout_p10", m.readout_p10);
  try {
    m.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: noise: ") + e.what());
  }
  if (m.trivial()) return std::nullopt;
  return m;
}

struct LoadedData {
  Dataset train;
  Dataset test;
};

LoadedData load_data(const json& block, std::uint64_t seed) {
  check_keys(block,
             {"source", "classes", "train_limit", "test_limit", "data_dir", "synthetic"},
             "dataset");
  const std::string source = get_or<std::string>(block, "source", "mnist");
  LoadedData out;
  if (source == "mnist") {
    std::vector<int> classes = get_or<std::vector<int>>(block, "classes", {0, 1});
    if (classes.size() != 2) throw ConfigError("config: dataset.classes needs 2 entries");
    const auto train_limit = get_or<std::size_t>(block, "train_limit", 400);
    const auto test_limit = get_or<std::size_t>(block, "test_limit", 200);
    const std::string dir = get_or<std::string>(block, "data_dir", "");
    out.train = load_binary_mnist(classes[0], classes[1], Split::Train, train_limit, dir);
    out.test = load_binary_mnist(classes[0], classes[1], Split::Test, test_limit, dir);
  } else if (source == "synthetic") {
    const json& sb = member(block, "synthetic");
    check_keys(sb, {"n_samples", "n_features", "clusters_per_class", "class_sep"},
               "dataset.synthetic");
    SyntheticSpec spec;
    spec.n_samples = get_or<std::size_t>(sb, "n_samples", spec.n_samples);
    spec.n_features = get_or<int>(sb, "n_features", spec.n_features);
    spec.clusters_per_class = get_or<int>(sb, "clusters_per_class", spec.clusters_per_class);
    spec.class_sep = get_or<double>(sb, "class_sep", spec.class_sep);
    spec.seed = seed;
    out.train = make_synthetic(spec);
    spec.seed = seed + 0x9e3779b97f4a7c15ULL;
    spec.n_samples = get_or<std::size_t>(block, "test_limit", spec.n_samples / 2);
    out.test = make_synthetic(spec);
  } else {
    throw ConfigError("config: dataset.source must be 'mnist' or 'synthetic'");
  }
  if (out.train.size() < 2) throw ConfigError("config: dataset too small");
  return out;
}

// Classical baseline pipeline: PCA to n_qubits features, min-max scaled to
// [0, pi], then the fixed feature map.
struct FixedPipeline {
  PcaModel pca;
  RangeScaler scaler;
  EmbeddingSpec spec;
  bool use_pca = true;

  std::vector<double> features_for(const std::vector<double>& x) const {
    Eigen::Map<const Vec> raw(x.data(), Eigen::Index(x.size()));
    Vec v = use_pca ? pca_transform(pca, raw) : Vec(raw);
    v = scaler.apply(v);
    return {v.data(), v.data() + v.size()};
  }
  std::vector<double> angles_for(const std::vector<double>& x) const {
    return replicate_layers(classical_feature_map(features_for(x), spec), spec);
  }
  Circuit circuit_for(const std::vector<double>& x) const {
    return zz_feature_circuit(angles_for(x), spec);
  }
  StateVector state_for(const std::vector<double>& x) const {
    return zz_feature_state(angles_for(x), spec);
  }
};

FixedPipeline make_fixed_pipeline(const Dataset& train, const EmbeddingSpec& spec) {
  FixedPipeline p;
  p.spec = spec;
  if (train.features.cols() == spec.n_qubits) {
    p.use_pca = false;
    p.scaler = fit_range_scaler(train.features);
  } else {
    p.pca = pca_fit(train.features, spec.n_qubits);
    const Eigen::MatrixXd scores = pca_transform_all(p.pca, train.features);
    p.scaler = fit_range_scaler(scores);
  }
  return p;
}

struct NqeBuildSpec {
  std::string net = "mlp";
  std::vector<int> hidden = {12, 12};
  int pca = 4;  // 0 = feed raw features
  int cnn_c1 = 8, cnn_c2 = 16;
  NqeTrainConfig train;
};

NqeBuildSpec parse_nqe(const json& block, std::uint64_t seed) {
  check_keys(block,
             {"net", "hidden", "pca", "cnn_channels", "iterations", "batch_pairs",
              "learning_rate", "optimizer", "fidelity_mode", "shots",
              "trace_distance_every", "eval_subset"},
             "nqe");
  NqeBuildSpec b;
  b.net = get_or<std::string>(block, "net", "mlp");
  if (b.net != "mlp" && b.net != "cnn")
    throw ConfigError("config: nqe.net must be 'mlp' or 'cnn'");
  b.hidden = get_or<std::vector<int>>(block, "hidden", b.hidden);
  b.pca = get_or<int>(block, "pca", b.net == "cnn" ? 0 : 4);
  if (auto it = block.find("cnn_channels"); it != block.end()) {
    auto ch = it->get<std::vector<int>>();
    if (ch.size() != 2) throw ConfigError("config: nqe.cnn_channels needs 2 entries");
    b.cnn_c1 = ch[0];
    b.cnn_c2 = ch[1];
  }
  b.train.iterations = get_or<int>(block, "iterations", 50);
  b.train.batch_pairs = get_or<int>(block, "batch_pairs", 10);
  b.train.learning_rate = get_or<double>(block, "learning_rate", 0.1);
  b.train.optimizer = optimizer_from_string(get_or<std::string>(block, "optimizer", "sgd"));
  const std::string mode = get_or<std::string>(block, "fidelity_mode", "exact");
  if (mode == "exact")
    b.train.fidelity_mode = FidelityMode::Exact;
  else if (mode == "shots")
    b.train.fidelity_mode = FidelityMode::Shots;
  else
    throw ConfigError("config: nqe.fidelity_mode must be 'exact' or 'shots'");
  b.train.shots = get_or<int>(block, "shots", 1024);
  b.train.trace_distance_every = get_or<int>(block, "trace_distance_every", 5);
  b.train.eval_subset = get_or<std::size_t>(block, "eval_subset", 256);
  b.train.seed = seed;
  return b;
}

NqeModel build_nqe_model(const NqeBuildSpec& b, const Dataset& train,
                         const EmbeddingSpec& spec, std::mt19937_64& rng) {
  NqeModel model;
  model.embedding = spec;
  const int out = spec.angle_arity();
  if (b.net == "cnn") {
    const int side = int(std::lround(std::sqrt(double(train.features.cols()))));
    if (side * side != train.features.cols())
      throw ConfigError("config: nqe.net=cnn needs square images");
    model.net = std::make_unique<Cnn2d>(out, rng, b.cnn_c1, b.cnn_c2, side);
  } else {
    int in = int(train.features.cols());
    if (b.pca > 0) {
      model.pca = pca_fit(train.features, b.pca);
      in = b.pca;
    }
    std::vector<int> dims = {in};
    dims.insert(dims.end(), b.hidden.begin(), b.hidden.end());
    dims.push_back(out);
    model.net = std::make_unique<Mlp>(dims, rng);
  }
  return model;
}

void write_lines(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << content;
}

std::string artifact_path(const RunContext& ctx, const std::string& name) {
  fs::create_directories(ctx.out_dir.empty() ? "." : ctx.out_dir);
  return (fs::path(ctx.out_dir.empty() ? "." : ctx.out_dir) / name).string();
}

std::string csv_header(const std::string& hash) {
  return "# format_version=1 config_hash=" + hash + "\n";
}

void write_json_artifact(const RunContext& ctx, const std::string& name, json j,
                         const std::string& hash) {
  j["format_version"] = 1;
  j["config_hash"] = hash;
  write_lines(artifact_path(ctx, name), j.dump(2) + "\n");
}

EnsemblePair ensemble_of(const EmbeddedDataset& data) {
  if (data.noisy()) {
    std::vector<DensityMatrix> minus, plus;
    for (std::size_t i = 0; i < data.size(); ++i)
      (data.labels[i] < 0 ? minus : plus).push_back(data.dms[i]);
    return ensemble_from_dms(minus, plus);
  }
  std::vector<StateVector> minus, plus;
  for (std::size_t i = 0; i < data.size(); ++i)
    (data.labels[i] < 0 ? minus : plus).push_back(data.states[i]);
  return ensemble_from_states(minus, plus);
}

EmbeddedDataset embed_with(const std::function<Circuit(const std::vector<double>&)>& circ,
                           const Dataset& data, int n_qubits,
                           const std::optional<NoiseModel>& noise) {
  EmbeddedDataset out;
  out.labels = data.labels;
  if (noise) {
    out.dms.assign(data.size(), DensityMatrix(n_qubits));
    parallel_for(data.size(), [&](std::size_t i) {
      out.dms[i] = evolve_noisy(circ(data.row(i)), n_qubits, *noise);
    });
  } else {
    out.states.assign(data.size(), StateVector(n_qubits));
    parallel_for(data.size(), [&](std::size_t i) {
      out.states[i] = run_circuit(circ(data.row(i)), n_qubits);
    });
  }
  return out;
}

// Trains an NQE model inline for subcommands that need one but were not given
// a checkpoint.
NqeModel inline_nqe(const json& nqe_block, const LoadedData& data,
                    const EmbeddingSpec& spec, std::uint64_t seed) {
  NqeBuildSpec b = parse_nqe(nqe_block, seed);
  std::mt19937_64 rng(seed ^ 0xa5a5a5a5a5a5a5a5ULL);
  NqeModel model = build_nqe_model(b, data.train, spec, rng);
  train_nqe(data.train, model, b.train);
  return model;
}

std::function<Circuit(const std::vector<double>&)> model_circuit_fn(const NqeModel& model) {
  return [&model](const std::vector<double>& x) {
    return zz_feature_circuit(model.angles_for(x, nullptr), model.embedding);
  };
}

// ---------------------------------------------------------------------------
// Presets

json preset_config(const std::string& subcommand, const std::string& name) {
  json c;
  c["dataset"] = {{"source", "mnist"}, {"classes", {0, 1}},
                  {"train_limit", 400}, {"test_limit", 200}};
  c["embedding"] = {{"n_qubits", 4}, {"layers", 1}, {"topology", "ring"}};
  if (name == "toy") {
    c["dataset"] = {{"source", "synthetic"},
                    {"synthetic", {{"n_samples", 40}, {"n_features", 4}}},
                    {"test_limit", 20}};
    if (subcommand == "train-qcnn" || subcommand == "compare-embeddings")
      c["qcnn"] = {{"variant", "fixed"}, {"iterations", 3}, {"batch_size", 8}};
    c["nqe"] = {{"net", "mlp"}, {"hidden", {8}}, {"pca", 0}, {"iterations", 3},
                {"eval_subset", 40}};
    return c;
  }
  if (name == "fig2-noiseless") {
    c["nqe"] = {{"net", "mlp"}, {"hidden", {12, 12}}, {"pca", 4}, {"iterations", 200},
                {"batch_pairs", 10}, {"learning_rate", 0.1}, {"optimizer", "sgd"}};
    if (subcommand == "train-qcnn")
      c["qcnn"] = {{"variant", "pca_nqe"}, {"ansatz", "su4"}, {"iterations", 200},
                   {"batch_size", 32}, {"learning_rate", 0.01}, {"optimizer", "nesterov"}};
    return c;
  }
  if (name == "fig2-noisy-desk") {
    c["nqe"] = {{"net", "mlp"}, {"hidden", {12, 12}}, {"pca", 4}, {"iterations", 100},
                {"batch_pairs", 10}};
    c["qcnn"] = {{"variant", "pca_nqe"}, {"ansatz", "simple"}, {"iterations", 50},
                 {"batch_size", 10}, {"learning_rate", 0.1}, {"optimizer", "nesterov"}};
    c["noise"] = {{"preset", "desk-nisq"}};
    c["dataset"]["train_limit"] = 100;
    c["dataset"]["test_limit"] = 60;
    return c;
  }
  if (name == "fig3-comparison") {
    c["nqe"] = {{"net", "mlp"}, {"hidden", {12, 12}}, {"pca", 4}, {"iterations", 100},
                {"batch_pairs", 10}};
    c["qcnn"] = {{"variant", "fixed"}, {"ansatz", "su4"}, {"iterations", 60},
                 {"batch_size", 25}, {"learning_rate", 0.05}, {"optimizer", "nesterov"}};
    c["variants"] = {"fixed", "pca_nqe", "trainable_unitary"};
    c["tue_layers"] = {1, 2, 3};
    c["dataset"]["train_limit"] = 100;
    c["dataset"]["test_limit"] = 60;
    return c;
  }
  if (name == "fig4-led") {
    c["dataset"] = {{"source", "synthetic"},
                    {"synthetic", {{"n_samples", 60}, {"n_features", 4}}},
                    {"test_limit", 30}};
    c["nqe"] = {{"net", "mlp"}, {"hidden", {8}}, {"pca", 0}, {"iterations", 40}};
    c["metrics"] = {{"led", true}, {"expressibility_order2", false}, {"subset", 60}};
    return c;
  }
  if (name == "fig5-kernel" || name == "appendixF-rank") {
    c["nqe"] = {{"net", "mlp"}, {"hidden", {12, 12}}, {"pca", 4}, {"iterations", 100},
                {"batch_pairs", 10}};
    c["study"] = {{"lambda_grid", {1e-3, 1e-2, 1e-1, 1.0, 10.0}}, {"repetitions", 5},
                  {"samples", 200}};
    c["dataset"]["train_limit"] = 0;
    return c;
  }
  if (name == "fig6-expressibility") {
    c["nqe"] = {{"net", "mlp"}, {"hidden", {12, 12}}, {"pca", 4}, {"iterations", 100},
                {"batch_pairs", 10}};
    c["metrics"] = {{"expressibility_order2", true}, {"led", false}, {"subset", 200}};
    return c;
  }
  throw ConfigError("config: unknown preset '" + name + "' for " + subcommand);
}

json expand_preset(const std::string& subcommand, const json& config) {
  auto it = config.find("preset");
  if (it == config.end()) return config;
  json base = preset_config(subcommand, it->get<std::string>());
  json user = config;
  user.erase("preset");
  base.merge_patch(user);
  return base;
}

}  // namespace

// ---------------------------------------------------------------------------
// Checkpoints

void save_checkpoint(const NqeModel& model, std::uint64_t rng_seed,
                     const std::string& cfg_hash, const std::string& path) {
  json j;
  j["format_version"] = 1;
  j["net_kind"] = model.net->kind();
  j["layer_dims"] = model.net->layer_dims();
  j["weights"] = model.net->params();
  j["rng_seed"] = rng_seed;
  j["config_hash"] = cfg_hash;
  j["embedding"] = {{"n_qubits", model.embedding.n_qubits},
                    {"layers", model.embedding.layers},
                    {"topology", topology_name(model.embedding.topology)}};
  if (model.pca) {
    json p;
    p["mean"] = std::vector<double>(model.pca->mean.data(),
                                    model.pca->mean.data() + model.pca->mean.size());
    json rows = json::array();
    for (Eigen::Index r = 0; r < model.pca->components.rows(); ++r) {
      const Vec row = model.pca->components.row(r);
      rows.push_back(std::vector<double>(row.data(), row.data() + row.size()));
    }
    p["components"] = rows;
    p["variances"] = std::vector<double>(
        model.pca->variances.data(),
        model.pca->variances.data() + model.pca->variances.size());
    j["pca"] = p;
  }
  write_lines(path, j.dump(2) + "\n");
}

NqeModel load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read checkpoint " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("checkpoint " + path + ": " + e.what());
  }
  if (get_or<int>(j, "format_version", -1) != 1)
    throw std::runtime_error("checkpoint " + path + ": unsupported format_version");
  NqeModel model;
  const json& emb = member(j, "embedding");
  model.embedding.n_qubits = get_or<int>(emb, "n_qubits", 4);
  model.embedding.layers = get_or<int>(emb, "layers", 1);
  model.embedding.topology = topology_from(get_or<std::string>(emb, "topology", "ring"));
  const std::string kind = j.at("net_kind").get<std::string>();
  const auto dims = j.at("layer_dims").get<std::vector<int>>();
  std::mt19937_64 scratch(0);
  if (kind == "mlp") {
    model.net = std::make_unique<Mlp>(dims, scratch);
  } else if (kind == "cnn2d") {
    if (dims.size() != 4) throw std::runtime_error("checkpoint: bad cnn2d layer_dims");
    const int side = int(std::lround(std::sqrt(double(dims[0]))));
    model.net = std::make_unique<Cnn2d>(dims[3], scratch, dims[1], dims[2], side);
  } else {
    throw std::runtime_error("checkpoint: unknown net_kind '" + kind + "'");
  }
  model.net->set_params(j.at("weights").get<std::vector<double>>());
  if (j.contains("pca")) {
    const json& p = j["pca"];
    PcaModel pca;
    const auto mean = p.at("mean").get<std::vector<double>>();
    pca.mean = Eigen::Map<const Vec>(mean.data(), Eigen::Index(mean.size()));
    const auto& rows = p.at("components");
    pca.components.resize(Eigen::Index(rows.size()), pca.mean.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto row = rows[r].get<std::vector<double>>();
      pca.components.row(Eigen::Index(r)) =
          Eigen::Map<const Vec>(row.data(), Eigen::Index(row.size()));
    }
    const auto vars = p.at("variances").get<std::vector<double>>();
    pca.variances = Eigen::Map<const Vec>(vars.data(), Eigen::Index(vars.size()));
    model.pca = std::move(pca);
  }
  return model;
}

// ---------------------------------------------------------------------------
// Variational head + LED helpers

namespace {
Circuit qnn_head_circuit(int n_qubits, int layers, const std::vector<double>& theta) {
  Circuit c;
  std::size_t k = 0;
  for (int l = 0; l < layers; ++l) {
    for (int q = 0; q < n_qubits; ++q) c.push_back(g_ry(q, theta.at(k++)));
    if (n_qubits > 1)
      for (int q = 0; q < n_qubits; ++q) c.push_back(g_cnot(q, (q + 1) % n_qubits));
  }
  return c;
}
}  // namespace

double qnn_head_predict(const StateVector& embedded, int layers,
                        const std::vector<double>& theta) {
  StateVector psi = embedded;
  for (const Gate& g : qnn_head_circuit(psi.n_qubits(), layers, theta))
    apply_gate(psi, g);
  return expectation(psi, Observable::z(0));
}

std::vector<double> qnn_head_grad(const StateVector& embedded, int layers,
                                  const std::vector<double>& theta) {
  return grad_all_param_shift(
      [&](const std::vector<double>& t) { return qnn_head_predict(embedded, layers, t); },
      theta, ShiftRule::rotation_convention());
}

std::vector<double> train_qnn_head(const std::vector<StateVector>& states,
                                   const std::vector<int>& labels, int layers,
                                   int iterations, double lr, std::mt19937_64& rng) {
  const int n = states.at(0).n_qubits();
  std::uniform_real_distribution<double> init(-M_PI, M_PI);
  std::vector<double> theta(std::size_t(layers) * std::size_t(n));
  for (double& t : theta) t = init(rng);
  OptimizerState opt;
  opt.kind = OptimizerKind::Sgd;
  opt.lr = lr;
  opt.reset(theta.size());
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> grad(theta.size(), 0.0);
    for (std::size_t i = 0; i < states.size(); ++i) {
      const auto g = qnn_head_grad(states[i], layers, theta);
      // d/dtheta of (1 - y f)/2
      for (std::size_t k = 0; k < grad.size(); ++k)
        grad[k] -= 0.5 * double(labels[i]) * g[k];
    }
    for (double& g : grad) g /= double(states.size());
    opt_step(opt, theta, grad);
  }
  return theta;
}

double led_for_states(const std::vector<StateVector>& states, int layers,
                      const std::vector<double>& theta_star, const LedConfig& cfg) {
  // Data rows carry the index into the pre-embedded state list.
  std::vector<std::vector<double>> data;
  data.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) data.push_back({double(i)});
  auto f = [&](const std::vector<double>& x, const std::vector<double>& theta) {
    return qnn_head_predict(states[std::size_t(x[0])], layers, theta);
  };
  auto grad = [&](const std::vector<double>& x, const std::vector<double>& theta) {
    return qnn_head_grad(states[std::size_t(x[0])], layers, theta);
  };
  return local_effective_dimension(grad, f, data, theta_star, cfg);
}

// ---------------------------------------------------------------------------
// Subcommands

void cmd_train_nqe(const nlohmann::json& raw, const RunContext& ctx) {
  const json config = expand_preset("train-nqe", raw);
  check_keys(config, {"seed", "dataset", "embedding", "nqe", "noise", "metrics"},
             "top level");
  const std::uint64_t seed = require_seed(config, ctx);
  const std::string hash = config_hash(config);
  const LoadedData data = load_data(member(config, "dataset"), seed);
  const EmbeddingSpec spec = parse_embedding(member(config, "embedding"));
  NqeBuildSpec build = parse_nqe(member(config, "nqe"), seed);
  build.train.noise = parse_noise(member(config, "noise"));
  const json& metrics_block = member(config, "metrics");
  check_keys(metrics_block, {"expressibility_order2", "led", "subset"}, "metrics");

  std::mt19937_64 rng(seed ^ 0xa5a5a5a5a5a5a5a5ULL);
  NqeModel model = build_nqe_model(build, data.train, spec, rng);
  const NqeTrainResult result = train_nqe(data.train, model, build.train);

  save_checkpoint(model, seed, hash, artifact_path(ctx, "checkpoint.json"));

  std::string csv = csv_header(hash) + "iteration,mean_loss,reported_trace_distance\n";
  for (const auto& row : result.history) {
    csv += std::to_string(row.iteration) + "," + format_double(row.mean_loss) + ",";
    if (std::isnan(row.reported_trace_distance))
      csv += "";
    else
      csv += format_double(row.reported_trace_distance);
    csv += "\n";
  }
  write_lines(artifact_path(ctx, "nqe_history.csv"), csv);

  const std::size_t subset =
      std::min<std::size_t>(data.train.size(),
                            get_or<std::size_t>(metrics_block, "subset", build.train.eval_subset));
  std::vector<StateVector> states;
  std::vector<StateVector> minus, plus;
  for (std::size_t i = 0; i < subset; ++i) {
    states.push_back(model.embed(data.train.row(i)));
    (data.train.labels[i] < 0 ? minus : plus).push_back(states.back());
  }
  const EnsemblePair ens = ensemble_from_states(minus, plus);
  json m;
  m["dtr_bound_convention"] = weighted_trace_distance(ens);
  m["dtr_reported"] = reported_trace_distance(ens);
  m["risk_lower_bound"] = risk_lower_bound(ens);
  m["purity_minus"] = purity(ens.rho_minus);
  m["purity_plus"] = purity(ens.rho_plus);
  m["epsilon_order1"] = expressibility_deviation(states, 1).epsilon;
  if (get_or<bool>(metrics_block, "expressibility_order2", false) && spec.n_qubits <= 6)
    m["epsilon_order2"] = expressibility_deviation(states, 2).epsilon;
  m["final_reported_trace_distance"] = result.final_reported_trace_distance;
  write_json_artifact(ctx, "metrics.json", m, hash);
}

namespace {

struct QcnnBuildSpec {
  std::string variant = "fixed";
  std::string checkpoint;
  AnsatzKind ansatz = AnsatzKind::Su4;
  int tue_layers = 1;
  QcnnTrainConfig train;
};

QcnnBuildSpec parse_qcnn(const json& block, std::uint64_t seed) {
  check_keys(block,
             {"variant", "checkpoint", "ansatz", "tue_layers", "iterations", "batch_size",
              "learning_rate", "optimizer"},
             "qcnn");
  QcnnBuildSpec b;
  b.variant = get_or<std::string>(block, "variant", "fixed");
  if (b.variant != "fixed" && b.variant != "pca_nqe" && b.variant != "nqe" &&
      b.variant != "trainable_unitary")
    throw ConfigError("config: qcnn.variant must be one of fixed, pca_nqe, nqe, "
                      "trainable_unitary");
  b.checkpoint = get_or<std::string>(block, "checkpoint", "");
  const std::string ansatz = get_or<std::string>(block, "ansatz", "su4");
  if (ansatz == "su4")
    b.ansatz = AnsatzKind::Su4;
  else if (ansatz == "simple")
    b.ansatz = AnsatzKind::Simple;
  else
    throw ConfigError("config: qcnn.ansatz must be 'su4' or 'simple'");
  b.tue_layers = get_or<int>(block, "tue_layers", 1);
  b.train.iterations = get_or<int>(block, "iterations", 200);
  b.train.batch_size = get_or<int>(block, "batch_size", 32);
  b.train.learning_rate = get_or<double>(block, "learning_rate", 0.01);
  b.train.optimizer =
      optimizer_from_string(get_or<std::string>(block, "optimizer", "nesterov"));
  b.train.seed = seed;
  return b;
}

struct VariantRun {
  std::string label;
  std::vector<double> loss_history;
  std::vector<double> full_loss_history;
  double final_loss = 0.0;
  double accuracy_train = 0.0;
  double accuracy_test = 0.0;
  double dtr_reported = 0.0;
  double bound = 0.0;
  std::vector<double> theta;
};

// Embeds both splits for one variant, trains the classifier and evaluates it.
VariantRun run_variant(const std::string& variant, const LoadedData& data,
                       const EmbeddingSpec& spec, const json& nqe_block,
                       const QcnnBuildSpec& q, const std::optional<NoiseModel>& noise,
                       std::uint64_t seed) {
  VariantRun out;
  out.label = variant;
  QcnnTrainConfig tcfg = q.train;
  tcfg.noise = noise;

  if (variant == "trainable_unitary") {
    EmbeddingSpec espec = spec;
    espec.layers = q.tue_layers;
    espec.kind = EmbeddingKind::TrainableUnitary;
    const FixedPipeline pipe = make_fixed_pipeline(data.train, spec);
    std::vector<std::vector<double>> xs_train, xs_test;
    for (std::size_t i = 0; i < data.train.size(); ++i)
      xs_train.push_back(pipe.features_for(data.train.row(i)));
    for (std::size_t i = 0; i < data.test.size(); ++i)
      xs_test.push_back(pipe.features_for(data.test.row(i)));
    const QcnnSpec qspec = QcnnSpec::standard(spec.n_qubits, q.ansatz);
    const JointTrainResult jr =
        train_qcnn_tue(xs_train, data.train.labels, espec, qspec, tcfg);
    out.loss_history = jr.loss_history;
    out.theta = jr.qcnn_theta;
    out.final_loss = qcnn_tue_loss(xs_train, data.train.labels, espec, jr.embed_theta,
                                   qspec, jr.qcnn_theta);
    out.accuracy_train = qcnn_tue_accuracy(xs_train, data.train.labels, espec,
                                           jr.embed_theta, qspec, jr.qcnn_theta);
    out.accuracy_test = qcnn_tue_accuracy(xs_test, data.test.labels, espec,
                                          jr.embed_theta, qspec, jr.qcnn_theta);
    std::vector<StateVector> minus, plus;
    for (std::size_t i = 0; i < xs_train.size(); ++i) {
      StateVector s = trainable_unitary_state(xs_train[i], jr.embed_theta, espec);
      (data.train.labels[i] < 0 ? minus : plus).push_back(std::move(s));
    }
    const EnsemblePair ens = ensemble_from_states(minus, plus);
    out.dtr_reported = reported_trace_distance(ens);
    out.bound = risk_lower_bound(ens);
    return out;
  }

  std::function<Circuit(const std::vector<double>&)> circ;
  FixedPipeline pipe;
  NqeModel model;
  if (variant == "fixed") {
    pipe = make_fixed_pipeline(data.train, spec);
    circ = [&pipe](const std::vector<double>& x) { return pipe.circuit_for(x); };
  } else {
    if (!q.checkpoint.empty())
      model = load_checkpoint(q.checkpoint);
    else if (!nqe_block.empty())
      model = inline_nqe(nqe_block, data, spec, seed);
    else
      throw ConfigError("config: qcnn.variant '" + variant +
                        "' needs qcnn.checkpoint or an nqe block");
    circ = model_circuit_fn(model);
  }

  const EmbeddedDataset train_emb = embed_with(circ, data.train, spec.n_qubits, noise);
  const EmbeddedDataset test_emb = embed_with(circ, data.test, spec.n_qubits, noise);
  const EnsemblePair ens = ensemble_of(train_emb);
  out.dtr_reported = reported_trace_distance(ens);
  out.bound = risk_lower_bound(ens);

  const QcnnSpec qspec = QcnnSpec::standard(spec.n_qubits, q.ansatz);
  const QcnnTrainResult tr = train_qcnn(train_emb, qspec, tcfg, !noise.has_value());
  out.theta = tr.theta;
  out.loss_history = tr.loss_history;
  out.full_loss_history = tr.full_loss_history;
  std::vector<double> preds(train_emb.size());
  parallel_for(train_emb.size(), [&](std::size_t i) {
    preds[i] = noise ? qcnn_predict_dm(train_emb.dms[i], qspec, tr.theta, noise)
                     : qcnn_predict(train_emb.states[i], qspec, tr.theta);
  });
  out.final_loss = linear_loss(preds, train_emb.labels);
  out.accuracy_train = qcnn_accuracy(train_emb, qspec, tr.theta, noise);
  out.accuracy_test = qcnn_accuracy(test_emb, qspec, tr.theta, noise);
  return out;
}

}  // namespace

void cmd_train_qcnn(const nlohmann::json& raw, const RunContext& ctx) {
  const json config = expand_preset("train-qcnn", raw);
  check_keys(config, {"seed", "dataset", "embedding", "nqe", "qcnn", "noise"},
             "top level");
  const std::uint64_t seed = require_seed(config, ctx);
  const std::string hash = config_hash(config);
  const LoadedData data = load_data(member(config, "dataset"), seed);
  const EmbeddingSpec spec = parse_embedding(member(config, "embedding"));
  const QcnnBuildSpec q = parse_qcnn(member(config, "qcnn"), seed);
  const std::optional<NoiseModel> noise = parse_noise(member(config, "noise"));

  const VariantRun run =
      run_variant(q.variant, data, spec, member(config, "nqe"), q, noise, seed);

  std::string csv = csv_header(hash) + "iteration,batch_loss,full_loss,bound\n";
  for (std::size_t i = 0; i < run.loss_history.size(); ++i) {
    csv += std::to_string(i + 1) + "," + format_double(run.loss_history[i]) + ",";
    if (i < run.full_loss_history.size())
      csv += format_double(run.full_loss_history[i]);
    csv += "," + format_double(run.bound) + "\n";
  }
  write_lines(artifact_path(ctx, "qcnn_history.csv"), csv);

  json theta_ckpt;
  theta_ckpt["net_kind"] = "qcnn";
  theta_ckpt["layer_dims"] =
      std::vector<int>{spec.n_qubits, q.ansatz == AnsatzKind::Su4 ? 15 : 2};
  theta_ckpt["weights"] = run.theta;
  theta_ckpt["rng_seed"] = seed;
  write_json_artifact(ctx, "qcnn_theta.json", theta_ckpt, hash);

  json r;
  r["variant"] = run.label;
  r["final_loss"] = run.final_loss;
  r["accuracy_train"] = run.accuracy_train;
  r["accuracy_test"] = run.accuracy_test;
  r["dtr_reported"] = run.dtr_reported;
  r["bound"] = run.bound;
  write_json_artifact(ctx, "result.json", r, hash);
}

void cmd_kernel_study(const nlohmann::json& raw, const RunContext& ctx) {
  const json config = expand_preset("kernel-study", raw);
  check_keys(config, {"seed", "dataset", "embedding", "nqe", "study", "checkpoints"},
             "top level");
  const std::uint64_t seed = require_seed(config, ctx);
  const std::string hash = config_hash(config);
  const LoadedData data = load_data(member(config, "dataset"), seed);
  const EmbeddingSpec spec = parse_embedding(member(config, "embedding"));
  const json& study = member(config, "study");
  check_keys(study, {"lambda_grid", "repetitions", "samples"}, "study");
  std::vector<double> lambdas =
      get_or<std::vector<double>>(study, "lambda_grid", {1e-3, 1e-2, 1e-1, 1.0, 10.0});
  for (double l : lambdas)
    if (l <= 0) throw ConfigError("config: study.lambda_grid entries must be > 0");
  const int reps = get_or<int>(study, "repetitions", 5);
  const std::size_t n_per = get_or<std::size_t>(study, "samples", 200);
  if (reps < 1) throw ConfigError("config: study.repetitions must be >= 1");

  const json& ckpts = member(config, "checkpoints");
  check_keys(ckpts, {"pca_nqe", "nqe"}, "checkpoints");

  const FixedPipeline pipe = make_fixed_pipeline(data.train, spec);
  auto load_or_train = [&](const char* key, const char* fallback_net,
                           std::uint64_t salt) -> NqeModel {
    const std::string path = get_or<std::string>(ckpts, key, "");
    if (!path.empty()) return load_checkpoint(path);
    json nqe_block = member(config, "nqe");
    if (nqe_block.empty())
      throw ConfigError("config: kernel study needs an nqe block or checkpoints");
    nqe_block["net"] = fallback_net;
    if (std::string(fallback_net) == "cnn") nqe_block["pca"] = 0;
    return inline_nqe(nqe_block, data, spec, seed + salt);
  };
  const NqeModel pca_model = load_or_train("pca_nqe", "mlp", 1);
  const bool cnn_feasible =
      data.train.features.cols() >= 64;  // raw images; otherwise reuse the MLP route
  const NqeModel nqe_model =
      cnn_feasible ? load_or_train("nqe", "cnn", 2) : load_or_train("nqe", "mlp", 2);

  // Disjoint resamples: one global shuffle, consecutive chunks.
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed ^ 0x5deece66dULL);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t chunk = std::min(n_per, data.train.size() / std::size_t(reps));
  if (chunk < 2) throw ConfigError("config: study.samples too large for the dataset");

  std::string csv = csv_header(hash) +
                    "repetition,lambda,G_fixed,G_pca_nqe,G_nqe,variance_fixed,"
                    "variance_nqe,d_fixed,d_nqe\n";
  for (int r = 0; r < reps; ++r) {
    std::vector<std::size_t> idx(order.begin() + std::ptrdiff_t(r * chunk),
                                 order.begin() + std::ptrdiff_t((r + 1) * chunk));
    std::vector<int> labels;
    std::vector<StateVector> s_fixed(idx.size(), StateVector(spec.n_qubits));
    std::vector<StateVector> s_pca(idx.size(), StateVector(spec.n_qubits));
    std::vector<StateVector> s_nqe(idx.size(), StateVector(spec.n_qubits));
    for (std::size_t k : idx) labels.push_back(data.train.labels[k]);
    parallel_for(idx.size(), [&](std::size_t i) {
      const std::vector<double> x = data.train.row(idx[i]);
      s_fixed[i] = pipe.state_for(x);
      s_pca[i] = pca_model.embed(x);
      s_nqe[i] = nqe_model.embed(x);
    });
    const KernelMatrix k_fixed = kernel_matrix(s_fixed, "fixed");
    const KernelMatrix k_pca = kernel_matrix(s_pca, "pca_nqe");
    const KernelMatrix k_nqe = kernel_matrix(s_nqe, "nqe");
    const KernelSpectrum sp_fixed = KernelSpectrum::of(k_fixed);
    const KernelSpectrum sp_pca = KernelSpectrum::of(k_pca);
    const KernelSpectrum sp_nqe = KernelSpectrum::of(k_nqe);
    const double var_fixed = kernel_variance(k_fixed);
    const double var_nqe = kernel_variance(k_nqe);
    const int d_fixed = kernel_rank(sp_fixed, k_fixed.size());
    const int d_nqe = kernel_rank(sp_nqe, k_nqe.size());
    for (double lambda : lambdas) {
      csv += std::to_string(r + 1) + "," + format_double(lambda) + "," +
             format_double(generalization_bound(sp_fixed, labels, lambda)) + "," +
             format_double(generalization_bound(sp_pca, labels, lambda)) + "," +
             format_double(generalization_bound(sp_nqe, labels, lambda)) + "," +
             format_double(var_fixed) + "," + format_double(var_nqe) + "," +
             std::to_string(d_fixed) + "," + std::to_string(d_nqe) + "\n";
    }
  }
  write_lines(artifact_path(ctx, "kernel_study.csv"), csv);
}

void cmd_metrics_report(const nlohmann::json& raw, const RunContext& ctx) {
  const json config = expand_preset("metrics-report", raw);
  check_keys(config, {"seed", "dataset", "embedding", "nqe", "noise", "metrics",
                      "checkpoint"},
             "top level");
  const std::uint64_t seed = require_seed(config, ctx);
  const std::string hash = config_hash(config);
  const LoadedData data = load_data(member(config, "dataset"), seed);
  const EmbeddingSpec spec = parse_embedding(member(config, "embedding"));
  const std::optional<NoiseModel> noise = parse_noise(member(config, "noise"));
  const json& metrics_block = member(config, "metrics");
  check_keys(metrics_block, {"expressibility_order2", "led", "subset", "led_layers",
                             "led_mc_samples", "led_n_data"},
             "metrics");
  const bool want_eps2 =
      get_or<bool>(metrics_block, "expressibility_order2", true) && spec.n_qubits <= 6;
  const bool want_led = get_or<bool>(metrics_block, "led", false);
  const std::size_t subset = std::min<std::size_t>(
      data.train.size(), get_or<std::size_t>(metrics_block, "subset", 200));

  const FixedPipeline pipe = make_fixed_pipeline(data.train, spec);
  const std::string ckpt = get_or<std::string>(config, "checkpoint", "");
  NqeModel model;
  if (!ckpt.empty())
    model = load_checkpoint(ckpt);
  else if (!member(config, "nqe").empty())
    model = inline_nqe(member(config, "nqe"), data, spec, seed);
  else
    throw ConfigError("config: metrics report needs 'checkpoint' or an nqe block");

  json report;
  std::mt19937_64 rng(seed ^ 0xc0ffee1234ULL);
  for (const std::string variant : {"fixed", "nqe"}) {
    std::vector<StateVector> states(subset, StateVector(spec.n_qubits));
    std::vector<Circuit> circuits(subset);
    parallel_for(subset, [&](std::size_t i) {
      const std::vector<double> x = data.train.row(i);
      circuits[i] = variant == "fixed" ? pipe.circuit_for(x)
                                       : zz_feature_circuit(model.angles_for(x, nullptr),
                                                            model.embedding);
      states[i] = run_circuit(circuits[i], spec.n_qubits);
    });
    std::vector<StateVector> minus, plus;
    for (std::size_t i = 0; i < subset; ++i)
      (data.train.labels[i] < 0 ? minus : plus).push_back(states[i]);
    const EnsemblePair ens = ensemble_from_states(minus, plus);
    json v;
    v["dtr_bound_convention"] = weighted_trace_distance(ens);
    v["dtr_reported"] = reported_trace_distance(ens);
    v["risk_lower_bound"] = risk_lower_bound(ens);
    v["purity_minus"] = purity(ens.rho_minus);
    v["purity_plus"] = purity(ens.rho_plus);
    v["epsilon_order1"] = expressibility_deviation(states, 1).epsilon;
    if (want_eps2) v["epsilon_order2"] = expressibility_deviation(states, 2).epsilon;
    if (noise) {
      std::vector<DensityMatrix> nminus, nplus;
      std::vector<DensityMatrix> dms(subset, DensityMatrix(spec.n_qubits));
      parallel_for(subset, [&](std::size_t i) {
        dms[i] = evolve_noisy(circuits[i], spec.n_qubits, *noise);
      });
      for (std::size_t i = 0; i < subset; ++i)
        (data.train.labels[i] < 0 ? nminus : nplus).push_back(dms[i]);
      const EnsemblePair nens = ensemble_from_dms(nminus, nplus);
      v["dtr_bound_convention_noisy"] = weighted_trace_distance(nens);
      v["contractive"] =
          weighted_trace_distance(nens) <= weighted_trace_distance(ens) + 1e-9;
    }
    if (want_led) {
      const int layers = get_or<int>(metrics_block, "led_layers", 2);
      std::vector<int> labels(data.train.labels.begin(),
                              data.train.labels.begin() + std::ptrdiff_t(subset));
      const std::vector<double> theta_star =
          train_qnn_head(states, labels, layers, 30, 0.1, rng);
      LedConfig lcfg;
      lcfg.seed = seed + (variant == "fixed" ? 11 : 13);
      lcfg.n_data = std::min<std::size_t>(
          subset, get_or<std::size_t>(metrics_block, "led_n_data", 100));
      lcfg.mc_samples = get_or<int>(metrics_block, "led_mc_samples", 32);
      std::vector<StateVector> led_states(states.begin(),
                                          states.begin() + std::ptrdiff_t(lcfg.n_data));
      v["led"] = led_for_states(led_states, layers, theta_star, lcfg);
    }
    report[variant] = v;
  }
  write_json_artifact(ctx, "metrics_report.json", report, hash);
}

void cmd_compare_embeddings(const nlohmann::json& raw, const RunContext& ctx) {
  const json config = expand_preset("compare-embeddings", raw);
  check_keys(config,
             {"seed", "dataset", "embedding", "nqe", "qcnn", "noise", "variants",
              "tue_layers"},
             "top level");
  const std::uint64_t seed = require_seed(config, ctx);
  const std::string hash = config_hash(config);
  const LoadedData data = load_data(member(config, "dataset"), seed);
  const EmbeddingSpec spec = parse_embedding(member(config, "embedding"));
  const QcnnBuildSpec q = parse_qcnn(member(config, "qcnn"), seed);
  const std::optional<NoiseModel> noise = parse_noise(member(config, "noise"));
  const std::vector<std::string> variants = get_or<std::vector<std::string>>(
      config, "variants", {"fixed", "pca_nqe", "trainable_unitary"});
  const std::vector<int> tue_layers =
      get_or<std::vector<int>>(config, "tue_layers", {1});

  std::vector<VariantRun> runs;
  for (const std::string& variant : variants) {
    if (variant == "trainable_unitary") {
      for (int L : tue_layers) {
        QcnnBuildSpec qq = q;
        qq.tue_layers = L;
        VariantRun r =
            run_variant(variant, data, spec, member(config, "nqe"), qq, noise, seed);
        r.label = "trainable_unitary_L" + std::to_string(L);
        runs.push_back(std::move(r));
      }
    } else {
      runs.push_back(
          run_variant(variant, data, spec, member(config, "nqe"), q, noise, seed));
    }
  }

  std::string csv = csv_header(hash) +
                    "variant,final_loss,accuracy_train,accuracy_test,dtr_reported,bound\n";
  for (const auto& r : runs) {
    csv += r.label + "," + format_double(r.final_loss) + "," +
           format_double(r.accuracy_train) + "," + format_double(r.accuracy_test) + "," +
           format_double(r.dtr_reported) + "," + format_double(r.bound) + "\n";
  }
  write_lines(artifact_path(ctx, "comparison.csv"), csv);

  std::size_t max_len = 0;
  for (const auto& r : runs) max_len = std::max(max_len, r.loss_history.size());
  std::string hist = csv_header(hash) + "iteration";
  for (const auto& r : runs) hist += "," + r.label;
  hist += "\n";
  for (std::size_t i = 0; i < max_len; ++i) {
    hist += std::to_string(i + 1);
    for (const auto& r : runs) {
      hist += ",";
      if (i < r.loss_history.size()) hist += format_double(r.loss_history[i]);
    }
    hist += "\n";
  }
  write_lines(artifact_path(ctx, "loss_history.csv"), hist);

  json rep = json::array();
  for (const auto& r : runs) {
    rep.push_back({{"variant", r.label},
                   {"final_loss", r.final_loss},
                   {"accuracy_train", r.accuracy_train},
                   {"accuracy_test", r.accuracy_test},
                   {"dtr_reported", r.dtr_reported},
                   {"bound", r.bound}});
  }
  json wrapper;
  wrapper["runs"] = rep;
  write_json_artifact(ctx, "comparison.json", wrapper, hash);
}

void run_subcommand(const std::string& name, const nlohmann::json& config,
                    const RunContext& ctx) {
  set_worker_count(ctx.workers);
  if (name == "train-nqe")
    cmd_train_nqe(config, ctx);
  else if (name == "train-qcnn")
    cmd_train_qcnn(config, ctx);
  else if (name == "kernel-study")
    cmd_kernel_study(config, ctx);
  else if (name == "metrics-report")
    cmd_metrics_report(config, ctx);
  else if (name == "compare-embeddings")
    cmd_compare_embeddings(config, ctx);
  else
    throw ConfigError("unknown subcommand '" + name + "'");
}

}  // namespace nqe
