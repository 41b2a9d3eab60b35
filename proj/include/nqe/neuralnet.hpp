#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

// Minimal classical networks with exact manual backpropagation, producing
// embedding angles g(x, w). Hidden layers use ReLU; the output layer is
// linear so angles can take any real value.

namespace nqe {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class NetError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ForwardCache;

class Net {
public:
  virtual ~Net() = default;
  virtual int input_dim() const = 0;
  virtual int output_dim() const = 0;
  virtual std::size_t param_count() const = 0;
  virtual std::vector<double> params() const = 0;
  virtual void set_params(const std::vector<double>& p) = 0;
  virtual Vec forward(const Vec& x, ForwardCache* cache) const = 0;
  // Returns the flat parameter gradient; optionally also d loss / d input.
  virtual std::vector<double> backward(const ForwardCache& cache, const Vec& d_out,
                                       Vec* d_input = nullptr) const = 0;
  virtual std::string kind() const = 0;
  virtual std::vector<int> layer_dims() const = 0;
  virtual std::unique_ptr<Net> clone() const = 0;
};

struct ForwardCache {
  // MLP: pre-activations and activations per layer (activations[0] = input).
  std::vector<Vec> activations;
  std::vector<Vec> pre_activations;
  // CNN: feature maps and pooling argmax indices.
  std::vector<std::vector<Mat>> feature_maps;   // per conv stage, per channel (post-ReLU)
  std::vector<std::vector<Mat>> pre_relu;       // per conv stage, per channel
  std::vector<std::vector<Eigen::MatrixXi>> pool_argmax;  // flat index into pre-pool map
  std::vector<std::vector<Mat>> pooled;         // per stage, per channel
  Mat input_image;
  Vec dense_input;
};

class Mlp : public Net {
public:
  // dims = [in, hidden..., out]
  Mlp(std::vector<int> dims, std::mt19937_64& rng);
  Mlp() = default;

  int input_dim() const override { return dims_.front(); }
  int output_dim() const override { return dims_.back(); }
  std::size_t param_count() const override;
  std::vector<double> params() const override;
  void set_params(const std::vector<double>& p) override;
  Vec forward(const Vec& x, ForwardCache* cache) const override;
  std::vector<double> backward(const ForwardCache& cache, const Vec& d_out,
                               Vec* d_input) const override;
  std::string kind() const override { return "mlp"; }
  std::vector<int> layer_dims() const override { return dims_; }
  std::unique_ptr<Net> clone() const override { return std::make_unique<Mlp>(*this); }

  std::vector<Mat> weights;
  std::vector<Vec> biases;

private:
  std::vector<int> dims_;
};

// Two 3x3 conv stages (zero padding 1, channels 1 -> c1 -> c2), each followed
// by 2x2 max pooling, then a dense layer to `out_dim`. Input is a 28x28 image
// flattened row-major; spatial sizes run 28 -> 14 -> 7.
class Cnn2d : public Net {
public:
  Cnn2d(int out_dim, std::mt19937_64& rng, int c1 = 8, int c2 = 16, int image_side = 28);
  Cnn2d() = default;

  int input_dim() const override { return side_ * side_; }
  int output_dim() const override { return out_dim_; }
  std::size_t param_count() const override;
  std::vector<double> params() const override;
  void set_params(const std::vector<double>& p) override;
  Vec forward(const Vec& x, ForwardCache* cache) const override;
  std::vector<double> backward(const ForwardCache& cache, const Vec& d_out,
                               Vec* d_input) const override;
  std::string kind() const override { return "cnn2d"; }
  std::vector<int> layer_dims() const override { return {side_ * side_, c1_, c2_, out_dim_}; }
  std::unique_ptr<Net> clone() const override { return std::make_unique<Cnn2d>(*this); }

  // kernels1[c_out]: 3x3; kernels2[c_out][c_in]: 3x3.
  std::vector<Mat> kernels1;
  std::vector<double> bias1;
  std::vector<std::vector<Mat>> kernels2;
  std::vector<double> bias2;
  Mat dense_w;
  Vec dense_b;

private:
  int side_ = 28, c1_ = 8, c2_ = 16, out_dim_ = 8;
};

// ---------------------------------------------------------------------------
// Optimizers

enum class OptimizerKind { Sgd, Nesterov, Adam };

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::Sgd;
  double lr = 0.1;
  double momentum = 0.9;                       // Nesterov
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;  // Adam
  std::vector<double> buf1, buf2;              // velocity / first+second moments
  long step_count = 0;

  void reset(std::size_t n_params);
};

// In-place update; throws on NaN gradients.
void opt_step(OptimizerState& opt, std::vector<double>& params,
              const std::vector<double>& grads);

OptimizerKind optimizer_from_string(const std::string& name);

}  // namespace nqe
