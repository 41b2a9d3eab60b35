#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "nqe/nqe_trainer.hpp"
#include "nqe/qcnn.hpp"

// Config-driven experiment runners tying the modules together. Each runner
// validates a strict JSON config (unknown keys rejected, seed mandatory) and
// writes CSV/JSON artifacts into the output directory.

namespace nqe {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Shortest round-trip decimal for a 64-bit float.
std::string format_double(double v);

// FNV-1a over the canonical (key-sorted) dump.
std::string config_hash(const nlohmann::json& config);

// Checkpoint (de)serialization for NQE models.
void save_checkpoint(const NqeModel& model, std::uint64_t rng_seed,
                     const std::string& cfg_hash, const std::string& path);
NqeModel load_checkpoint(const std::string& path);

struct RunContext {
  std::string out_dir;
  int workers = 0;  // 0 = available cores
  std::optional<std::uint64_t> seed_override;
};

// Subcommand entry points; throw ConfigError (exit code 2 at the CLI) on
// invalid configs.
void cmd_train_nqe(const nlohmann::json& config, const RunContext& ctx);
void cmd_train_qcnn(const nlohmann::json& config, const RunContext& ctx);
void cmd_kernel_study(const nlohmann::json& config, const RunContext& ctx);
void cmd_metrics_report(const nlohmann::json& config, const RunContext& ctx);
void cmd_compare_embeddings(const nlohmann::json& config, const RunContext& ctx);

void run_subcommand(const std::string& name, const nlohmann::json& config,
                    const RunContext& ctx);

// Small hardware-efficient variational head used by the effective-dimension
// study: per layer, RY(theta) on every qubit then a CNOT ring; Z readout on
// qubit 0. theta has layers * n_qubits entries (rotation convention).
double qnn_head_predict(const StateVector& embedded, int layers,
                        const std::vector<double>& theta);
std::vector<double> qnn_head_grad(const StateVector& embedded, int layers,
                                  const std::vector<double>& theta);
std::vector<double> train_qnn_head(const std::vector<StateVector>& states,
                                   const std::vector<int>& labels, int layers,
                                   int iterations, double lr, std::mt19937_64& rng);
// Local effective dimension of the head over pre-embedded inputs.
double led_for_states(const std::vector<StateVector>& states, int layers,
                      const std::vector<double>& theta_star, const LedConfig& cfg);

}  // namespace nqe
