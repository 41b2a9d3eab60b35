#include "nqe/neuralnet.hpp"

#include <cmath>

namespace nqe {

namespace {

double uniform_init(std::mt19937_64& rng, int fan_in) {
  const double bound = std::sqrt(6.0 / double(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  return dist(rng);
}

}  // namespace

// ---------------------------------------------------------------------------
// Mlp

Mlp::Mlp(std::vector<int> dims, std::mt19937_64& rng) : dims_(std::move(dims)) {
  if (dims_.size() < 2) throw NetError("mlp: need at least input and output dims");
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    Mat w(dims_[l + 1], dims_[l]);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = uniform_init(rng, dims_[l]);
    weights.push_back(std::move(w));
    biases.push_back(Vec::Zero(dims_[l + 1]));
  }
}

std::size_t Mlp::param_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l)
    n += std::size_t(weights[l].size()) + std::size_t(biases[l].size());
  return n;
}

std::vector<double> Mlp::params() const {
  std::vector<double> p;
  p.reserve(param_count());
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (Eigen::Index i = 0; i < weights[l].rows(); ++i)
      for (Eigen::Index j = 0; j < weights[l].cols(); ++j) p.push_back(weights[l](i, j));
    for (Eigen::Index i = 0; i < biases[l].size(); ++i) p.push_back(biases[l][i]);
  }
  return p;
}

void Mlp::set_params(const std::vector<double>& p) {
  if (p.size() != param_count()) throw NetError("mlp: parameter count mismatch");
  std::size_t k = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (Eigen::Index i = 0; i < weights[l].rows(); ++i)
      for (Eigen::Index j = 0; j < weights[l].cols(); ++j) weights[l](i, j) = p[k++];
    for (Eigen::Index i = 0; i < biases[l].size(); ++i) biases[l][i] = p[k++];
  }
}

Vec Mlp::forward(const Vec& x, ForwardCache* cache) const {
  if (x.size() != dims_.front()) throw NetError("mlp: input shape mismatch");
  Vec a = x;
  if (cache) {
    cache->activations.clear();
    cache->pre_activations.clear();
    cache->activations.push_back(a);
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Vec z = weights[l] * a + biases[l];
    if (cache) cache->pre_activations.push_back(z);
    const bool hidden = l + 1 < weights.size();
    a = hidden ? z.cwiseMax(0.0) : z;
    if (cache) cache->activations.push_back(a);
  }
  return a;
}

std::vector<double> Mlp::backward(const ForwardCache& cache, const Vec& d_out,
                                  Vec* d_input) const {
  if (cache.activations.size() != weights.size() + 1)
    throw NetError("mlp: stale or missing forward cache");
  std::vector<Mat> dW(weights.size());
  std::vector<Vec> db(weights.size());
  Vec delta = d_out;
  for (std::size_t li = weights.size(); li-- > 0;) {
    if (li + 1 < weights.size()) {
      // ReLU subgradient at 0 is 0.
      const Vec& z = cache.pre_activations[li];
      for (Eigen::Index i = 0; i < delta.size(); ++i)
        if (z[i] <= 0.0) delta[i] = 0.0;
    }
    dW[li] = delta * cache.activations[li].transpose();
    db[li] = delta;
    delta = weights[li].transpose() * delta;
  }
  if (d_input) *d_input = delta;

  std::vector<double> g;
  g.reserve(param_count());
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (Eigen::Index i = 0; i < dW[l].rows(); ++i)
      for (Eigen::Index j = 0; j < dW[l].cols(); ++j) g.push_back(dW[l](i, j));
    for (Eigen::Index i = 0; i < db[l].size(); ++i) g.push_back(db[l][i]);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Cnn2d

Cnn2d::Cnn2d(int out_dim, std::mt19937_64& rng, int c1, int c2, int image_side)
    : side_(image_side), c1_(c1), c2_(c2), out_dim_(out_dim) {
  if (side_ % 4 != 0) throw NetError("cnn: image side must be divisible by 4");
  for (int c = 0; c < c1_; ++c) {
    Mat k(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) k(i, j) = uniform_init(rng, 9);
    kernels1.push_back(std::move(k));
    bias1.push_back(0.0);
  }
  for (int c = 0; c < c2_; ++c) {
    std::vector<Mat> ks;
    for (int ci = 0; ci < c1_; ++ci) {
      Mat k(3, 3);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) k(i, j) = uniform_init(rng, 9 * c1_);
      ks.push_back(std::move(k));
    }
    kernels2.push_back(std::move(ks));
    bias2.push_back(0.0);
  }
  const int dense_in = c2_ * (side_ / 4) * (side_ / 4);
  dense_w = Mat(out_dim_, dense_in);
  for (Eigen::Index i = 0; i < dense_w.rows(); ++i)
    for (Eigen::Index j = 0; j < dense_w.cols(); ++j) dense_w(i, j) = uniform_init(rng, dense_in);
  dense_b = Vec::Zero(out_dim_);
}

std::size_t Cnn2d::param_count() const {
  return std::size_t(c1_) * 9 + c1_ + std::size_t(c2_) * c1_ * 9 + c2_ +
         std::size_t(dense_w.size()) + std::size_t(dense_b.size());
}

std::vector<double> Cnn2d::params() const {
  std::vector<double> p;
  p.reserve(param_count());
  for (int c = 0; c < c1_; ++c)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) p.push_back(kernels1[c](i, j));
  for (double b : bias1) p.push_back(b);
  for (int c = 0; c < c2_; ++c)
    for (int ci = 0; ci < c1_; ++ci)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) p.push_back(kernels2[c][ci](i, j));
  for (double b : bias2) p.push_back(b);
  for (Eigen::Index i = 0; i < dense_w.rows(); ++i)
    for (Eigen::Index j = 0; j < dense_w.cols(); ++j) p.push_back(dense_w(i, j));
  for (Eigen::Index i = 0; i < dense_b.size(); ++i) p.push_back(dense_b[i]);
  return p;
}

void Cnn2d::set_params(const std::vector<double>& p) {
  if (p.size() != param_count()) throw NetError("cnn: parameter count mismatch");
  std::size_t k = 0;
  for (int c = 0; c < c1_; ++c)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) kernels1[c](i, j) = p[k++];
  for (int c = 0; c < c1_; ++c) bias1[c] = p[k++];
  for (int c = 0; c < c2_; ++c)
    for (int ci = 0; ci < c1_; ++ci)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) kernels2[c][ci](i, j) = p[k++];
  for (int c = 0; c < c2_; ++c) bias2[c] = p[k++];
  for (Eigen::Index i = 0; i < dense_w.rows(); ++i)
    for (Eigen::Index j = 0; j < dense_w.cols(); ++j) dense_w(i, j) = p[k++];
  for (Eigen::Index i = 0; i < dense_b.size(); ++i) dense_b[i] = p[k++];
}

namespace {

// 3x3 convolution with zero padding 1 (same size).
Mat conv3x3(const Mat& in, const Mat& kernel) {
  const Eigen::Index h = in.rows(), w = in.cols();
  Mat out = Mat::Zero(h, w);
  for (Eigen::Index r = 0; r < h; ++r)
    for (Eigen::Index c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          const Eigen::Index rr = r + dr, cc = c + dc;
          if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
          acc += in(rr, cc) * kernel(dr + 1, dc + 1);
        }
      out(r, c) = acc;
    }
  return out;
}

Mat maxpool2(const Mat& in, Eigen::MatrixXi& argmax) {
  const Eigen::Index h = in.rows() / 2, w = in.cols() / 2;
  Mat out(h, w);
  argmax.resize(h, w);
  for (Eigen::Index r = 0; r < h; ++r)
    for (Eigen::Index c = 0; c < w; ++c) {
      double best = in(2 * r, 2 * c);
      int arg = 0;
      for (int k = 1; k < 4; ++k) {
        const double v = in(2 * r + k / 2, 2 * c + k % 2);
        if (v > best) {
          best = v;
          arg = k;
        }
      }
      out(r, c) = best;
      argmax(r, c) = arg;
    }
  return out;
}

}  // namespace

Vec Cnn2d::forward(const Vec& x, ForwardCache* cache) const {
  if (x.size() != side_ * side_) throw NetError("cnn: input shape mismatch");
  Mat img(side_, side_);
  for (int r = 0; r < side_; ++r)
    for (int c = 0; c < side_; ++c) img(r, c) = x[r * side_ + c];

  ForwardCache local;
  ForwardCache& cc = cache ? *cache : local;
  cc.input_image = img;
  cc.feature_maps.assign(2, {});
  cc.pre_relu.assign(2, {});
  cc.pool_argmax.assign(2, {});
  cc.pooled.assign(2, {});

  // Stage 1
  std::vector<Mat> stage1;
  for (int c = 0; c < c1_; ++c) {
    Mat z = conv3x3(img, kernels1[c]).array() + bias1[c];
    cc.pre_relu[0].push_back(z);
    Mat a = z.cwiseMax(0.0);
    cc.feature_maps[0].push_back(a);
    Eigen::MatrixXi am;
    Mat p = maxpool2(a, am);
    cc.pool_argmax[0].push_back(am);
    cc.pooled[0].push_back(p);
    stage1.push_back(std::move(p));
  }

  // Stage 2
  std::vector<Mat> stage2;
  for (int c = 0; c < c2_; ++c) {
    Mat z = Mat::Zero(side_ / 2, side_ / 2);
    for (int ci = 0; ci < c1_; ++ci) z += conv3x3(stage1[ci], kernels2[c][ci]);
    z.array() += bias2[c];
    cc.pre_relu[1].push_back(z);
    Mat a = z.cwiseMax(0.0);
    cc.feature_maps[1].push_back(a);
    Eigen::MatrixXi am;
    Mat p = maxpool2(a, am);
    cc.pool_argmax[1].push_back(am);
    cc.pooled[1].push_back(p);
    stage2.push_back(std::move(p));
  }

  const int q = side_ / 4;
  Vec flat(c2_ * q * q);
  for (int c = 0; c < c2_; ++c)
    for (int r = 0; r < q; ++r)
      for (int s = 0; s < q; ++s) flat[c * q * q + r * q + s] = stage2[c](r, s);
  cc.dense_input = flat;
  return dense_w * flat + dense_b;
}

std::vector<double> Cnn2d::backward(const ForwardCache& cache, const Vec& d_out,
                                    Vec* d_input) const {
  if (cache.pooled.size() != 2) throw NetError("cnn: stale or missing forward cache");
  const int q = side_ / 4;

  Mat d_dense_w = d_out * cache.dense_input.transpose();
  Vec d_dense_b = d_out;
  Vec d_flat = dense_w.transpose() * d_out;

  // Unflatten and un-pool stage 2.
  std::vector<Mat> d_stage2_act(c2_, Mat::Zero(side_ / 2, side_ / 2));
  for (int c = 0; c < c2_; ++c)
    for (int r = 0; r < q; ++r)
      for (int s = 0; s < q; ++s) {
        const int arg = cache.pool_argmax[1][c](r, s);
        d_stage2_act[c](2 * r + arg / 2, 2 * s + arg % 2) += d_flat[c * q * q + r * q + s];
      }
  // ReLU
  for (int c = 0; c < c2_; ++c)
    for (Eigen::Index r = 0; r < d_stage2_act[c].rows(); ++r)
      for (Eigen::Index s = 0; s < d_stage2_act[c].cols(); ++s)
        if (cache.pre_relu[1][c](r, s) <= 0.0) d_stage2_act[c](r, s) = 0.0;

  // Conv2 gradients and gradient w.r.t. stage-1 pooled maps.
  std::vector<std::vector<Mat>> d_k2(c2_, std::vector<Mat>(c1_, Mat::Zero(3, 3)));
  std::vector<double> d_b2(c2_, 0.0);
  std::vector<Mat> d_stage1_pooled(c1_, Mat::Zero(side_ / 2, side_ / 2));
  const Eigen::Index h2 = side_ / 2;
  for (int c = 0; c < c2_; ++c) {
    d_b2[c] = d_stage2_act[c].sum();
    for (int ci = 0; ci < c1_; ++ci) {
      const Mat& in = cache.pooled[0][ci];
      for (Eigen::Index r = 0; r < h2; ++r)
        for (Eigen::Index s = 0; s < h2; ++s) {
          const double d = d_stage2_act[c](r, s);
          if (d == 0.0) continue;
          for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc) {
              const Eigen::Index rr = r + dr, ss = s + dc;
              if (rr < 0 || rr >= h2 || ss < 0 || ss >= h2) continue;
              d_k2[c][ci](dr + 1, dc + 1) += in(rr, ss) * d;
              d_stage1_pooled[ci](rr, ss) += kernels2[c][ci](dr + 1, dc + 1) * d;
            }
        }
    }
  }

  // Un-pool stage 1, ReLU, conv1 gradients.
  std::vector<Mat> d_stage1_act(c1_, Mat::Zero(side_, side_));
  for (int c = 0; c < c1_; ++c)
    for (Eigen::Index r = 0; r < h2; ++r)
      for (Eigen::Index s = 0; s < h2; ++s) {
        const int arg = cache.pool_argmax[0][c](r, s);
        d_stage1_act[c](2 * r + arg / 2, 2 * s + arg % 2) += d_stage1_pooled[c](r, s);
      }
  for (int c = 0; c < c1_; ++c)
    for (Eigen::Index r = 0; r < side_; ++r)
      for (Eigen::Index s = 0; s < side_; ++s)
        if (cache.pre_relu[0][c](r, s) <= 0.0) d_stage1_act[c](r, s) = 0.0;

  std::vector<Mat> d_k1(c1_, Mat::Zero(3, 3));
  std::vector<double> d_b1(c1_, 0.0);
  Mat d_img = Mat::Zero(side_, side_);
  const Mat& img = cache.input_image;
  for (int c = 0; c < c1_; ++c) {
    d_b1[c] = d_stage1_act[c].sum();
    for (Eigen::Index r = 0; r < side_; ++r)
      for (Eigen::Index s = 0; s < side_; ++s) {
        const double d = d_stage1_act[c](r, s);
        if (d == 0.0) continue;
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc) {
            const Eigen::Index rr = r + dr, ss = s + dc;
            if (rr < 0 || rr >= side_ || ss < 0 || ss >= side_) continue;
            d_k1[c](dr + 1, dc + 1) += img(rr, ss) * d;
            d_img(rr, ss) += kernels1[c](dr + 1, dc + 1) * d;
          }
      }
  }
  if (d_input) {
    d_input->resize(side_ * side_);
    for (int r = 0; r < side_; ++r)
      for (int c = 0; c < side_; ++c) (*d_input)[r * side_ + c] = d_img(r, c);
  }

  std::vector<double> g;
  g.reserve(param_count());
  for (int c = 0; c < c1_; ++c)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) g.push_back(d_k1[c](i, j));
  for (int c = 0; c < c1_; ++c) g.push_back(d_b1[c]);
  for (int c = 0; c < c2_; ++c)
    for (int ci = 0; ci < c1_; ++ci)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) g.push_back(d_k2[c][ci](i, j));
  for (int c = 0; c < c2_; ++c) g.push_back(d_b2[c]);
  for (Eigen::Index i = 0; i < d_dense_w.rows(); ++i)
    for (Eigen::Index j = 0; j < d_dense_w.cols(); ++j) g.push_back(d_dense_w(i, j));
  for (Eigen::Index i = 0; i < d_dense_b.size(); ++i) g.push_back(d_dense_b[i]);
  return g;
}

// ---------------------------------------------------------------------------
// Optimizers

void OptimizerState::reset(std::size_t n_params) {
  buf1.assign(n_params, 0.0);
  buf2.assign(n_params, 0.0);
  step_count = 0;
}

void opt_step(OptimizerState& opt, std::vector<double>& params,
              const std::vector<double>& grads) {
  if (params.size() != grads.size()) throw NetError("opt_step: shape mismatch");
  for (double g : grads)
    if (!std::isfinite(g)) throw NetError("opt_step: non-finite gradient");
  if (opt.buf1.size() != params.size()) opt.reset(params.size());
  ++opt.step_count;

  switch (opt.kind) {
    case OptimizerKind::Sgd:
      for (std::size_t i = 0; i < params.size(); ++i) params[i] -= opt.lr * grads[i];
      break;
    case OptimizerKind::Nesterov:
      for (std::size_t i = 0; i < params.size(); ++i) {
        opt.buf1[i] = opt.momentum * opt.buf1[i] + grads[i];
        params[i] -= opt.lr * (grads[i] + opt.momentum * opt.buf1[i]);
      }
      break;
    case OptimizerKind::Adam: {
      const double bc1 = 1.0 - std::pow(opt.beta1, double(opt.step_count));
      const double bc2 = 1.0 - std::pow(opt.beta2, double(opt.step_count));
      for (std::size_t i = 0; i < params.size(); ++i) {
        opt.buf1[i] = opt.beta1 * opt.buf1[i] + (1 - opt.beta1) * grads[i];
        opt.buf2[i] = opt.beta2 * opt.buf2[i] + (1 - opt.beta2) * grads[i] * grads[i];
        const double mhat = opt.buf1[i] / bc1;
        const double vhat = opt.buf2[i] / bc2;
        params[i] -= opt.lr * mhat / (std::sqrt(vhat) + opt.eps);
      }
      break;
    }
  }
}

OptimizerKind optimizer_from_string(const std::string& name) {
  if (name == "sgd") return OptimizerKind::Sgd;
  if (name == "nesterov") return OptimizerKind::Nesterov;
  if (name == "adam") return OptimizerKind::Adam;
  throw NetError("unknown optimizer: " + name);
}

}  // namespace nqe
