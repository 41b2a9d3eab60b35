#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "nqe/neuralnet.hpp"

using namespace nqe;

namespace {

// Scalar loss L = d . f(x) with fixed direction d, so dL/dw is checkable by
// central finite differences on the parameter vector.
double directed_loss(const Net& net, const Vec& x, const Vec& d) {
  return d.dot(net.forward(x, nullptr));
}

void check_backward_against_fd(Net& net, const Vec& x, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Vec d(net.output_dim());
  for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = gauss(rng);

  ForwardCache cache;
  net.forward(x, &cache);
  Vec d_input;
  std::vector<double> grad = net.backward(cache, d, &d_input);
  std::vector<double> params = net.params();
  REQUIRE(grad.size() == params.size());

  const double h = 1e-6;
  std::uniform_int_distribution<std::size_t> pick(0, params.size() - 1);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t k = pick(rng);
    std::vector<double> p = params;
    p[k] += h;
    net.set_params(p);
    const double up = directed_loss(net, x, d);
    p[k] -= 2 * h;
    net.set_params(p);
    const double down = directed_loss(net, x, d);
    const double fd = (up - down) / (2 * h);
    const double scale = std::max({1.0, std::abs(fd), std::abs(grad[k])});
    CHECK(std::abs(grad[k] - fd) / scale < 1e-6);
  }
  net.set_params(params);

  // Input gradient against finite differences too.
  for (Eigen::Index k = 0; k < std::min<Eigen::Index>(x.size(), 10); ++k) {
    Vec xp = x;
    xp[k] += h;
    const double up = directed_loss(net, xp, d);
    xp[k] -= 2 * h;
    const double down = directed_loss(net, xp, d);
    const double fd = (up - down) / (2 * h);
    const double scale = std::max({1.0, std::abs(fd), std::abs(d_input[k])});
    CHECK(std::abs(d_input[k] - fd) / scale < 1e-6);
  }
}

}  // namespace

TEST_CASE("MLP backprop matches finite differences") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> gauss;
  for (auto dims : {std::vector<int>{4, 12, 12, 8}, std::vector<int>{4, 12, 4}}) {
    Mlp net(dims, rng);
    Vec x(dims.front());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = gauss(rng);
    check_backward_against_fd(net, x, 101 + std::uint64_t(dims.size()));
  }
}

TEST_CASE("CNN backprop matches finite differences") {
  std::mt19937_64 rng(42);
  Cnn2d net(6, rng, 3, 4, 8);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec x(64);
  for (Eigen::Index i = 0; i < 64; ++i) x[i] = unif(rng);
  check_backward_against_fd(net, x, 202);
}

TEST_CASE("MLP parameter round trip and count") {
  std::mt19937_64 rng(43);
  Mlp net({5, 7, 3}, rng);
  CHECK(net.param_count() == std::size_t(5 * 7 + 7 + 7 * 3 + 3));
  std::vector<double> p = net.params();
  REQUIRE(p.size() == net.param_count());
  std::vector<double> q = p;
  for (double& v : q) v += 0.25;
  net.set_params(q);
  CHECK(net.params() == q);
  CHECK_THROWS_AS(net.set_params(std::vector<double>(3, 0.0)), NetError);
}

TEST_CASE("CNN shapes: pooling halves the side twice") {
  std::mt19937_64 rng(44);
  Cnn2d net(8, rng, 2, 3, 28);
  CHECK(net.input_dim() == 784);
  CHECK(net.output_dim() == 8);
  // dense input is c2 * 7 * 7 after 28 -> 14 -> 7.
  CHECK(net.dense_w.cols() == 3 * 7 * 7);
  Vec x = Vec::Ones(784) * 0.5;
  CHECK(net.forward(x, nullptr).size() == 8);
}

TEST_CASE("initialization is bounded and seed-reproducible") {
  std::mt19937_64 r1(45), r2(45), r3(46);
  Mlp a({6, 10, 4}, r1), b({6, 10, 4}, r2), c({6, 10, 4}, r3);
  CHECK(a.params() == b.params());
  CHECK(a.params() != c.params());
  for (double v : a.params()) CHECK(std::abs(v) < 2.0);
}

TEST_CASE("clone is independent of the original") {
  std::mt19937_64 rng(47);
  Mlp net({3, 5, 2}, rng);
  auto copy = net.clone();
  std::vector<double> p = net.params();
  std::vector<double> zeros(p.size(), 0.0);
  net.set_params(zeros);
  CHECK(copy->params() == p);
}

TEST_CASE("SGD step follows the textbook recurrence") {
  OptimizerState opt;
  opt.kind = OptimizerKind::Sgd;
  opt.lr = 0.1;
  opt.reset(2);
  std::vector<double> w{1.0, -2.0};
  opt_step(opt, w, {0.5, -1.0});
  CHECK(w[0] == doctest::Approx(0.95).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(-1.9).epsilon(1e-12));
}

TEST_CASE("Nesterov momentum matches the manual recurrence") {
  OptimizerState opt;
  opt.kind = OptimizerKind::Nesterov;
  opt.lr = 0.1;
  opt.momentum = 0.9;
  opt.reset(1);
  std::vector<double> w{0.0};
  // Reference: v <- mu v + g; w <- w - lr (g + mu v).
  double v_ref = 0.0, w_ref = 0.0;
  std::vector<double> grads{1.0, 0.5, -0.25};
  for (double g : grads) {
    v_ref = 0.9 * v_ref + g;
    w_ref -= 0.1 * (g + 0.9 * v_ref);
    opt_step(opt, w, {g});
    CHECK(w[0] == doctest::Approx(w_ref).epsilon(1e-12));
  }
}

TEST_CASE("Adam matches the bias-corrected recurrence") {
  OptimizerState opt;
  opt.kind = OptimizerKind::Adam;
  opt.lr = 0.01;
  opt.reset(1);
  std::vector<double> w{0.5};
  double m = 0.0, v = 0.0, w_ref = 0.5;
  std::vector<double> grads{0.3, -0.7, 0.1, 0.9};
  for (int t = 1; t <= int(grads.size()); ++t) {
    const double g = grads[std::size_t(t - 1)];
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mhat = m / (1.0 - std::pow(0.9, t));
    const double vhat = v / (1.0 - std::pow(0.999, t));
    w_ref -= 0.01 * mhat / (std::sqrt(vhat) + 1e-8);
    opt_step(opt, w, {g});
    CHECK(w[0] == doctest::Approx(w_ref).epsilon(1e-10));
  }
}

TEST_CASE("NaN gradients are rejected") {
  OptimizerState opt;
  opt.reset(1);
  std::vector<double> w{1.0};
  CHECK_THROWS_AS(opt_step(opt, w, {std::nan("")}), NetError);
}

TEST_CASE("optimizer_from_string") {
  CHECK(optimizer_from_string("sgd") == OptimizerKind::Sgd);
  CHECK(optimizer_from_string("nesterov") == OptimizerKind::Nesterov);
  CHECK(optimizer_from_string("adam") == OptimizerKind::Adam);
  CHECK_THROWS(optimizer_from_string("rmsprop"));
}
