#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include "nqe/data_io.hpp"

using namespace nqe;

TEST_CASE("IDX round trip preserves header and payload") {
  IdxTensor t;
  t.dtype = 0x08;
  t.dims = {3, 4, 5};
  t.payload.resize(60);
  for (std::size_t i = 0; i < 60; ++i) t.payload[i] = std::uint8_t(i * 7);
  CHECK(t.element_count() == 60);
  std::vector<std::uint8_t> bytes = serialize_idx(t);
  IdxTensor back = parse_idx(bytes);
  CHECK(back.dtype == t.dtype);
  CHECK(back.dims == t.dims);
  CHECK(back.payload == t.payload);
}

TEST_CASE("IDX parser rejects malformed input") {
  CHECK_THROWS_AS(parse_idx({0x00, 0x00}), DataError);
  // Wrong magic prefix.
  CHECK_THROWS_AS(parse_idx({0x01, 0x02, 0x08, 0x01, 0, 0, 0, 1, 42}), DataError);
  // Truncated payload: claims 2 elements, carries 1.
  CHECK_THROWS_AS(parse_idx({0x00, 0x00, 0x08, 0x01, 0, 0, 0, 2, 42}), DataError);
}

TEST_CASE("IDX file loading handles plain and gzip files") {
  namespace fs = std::filesystem;
  IdxTensor t;
  t.dims = {2, 3};
  t.payload = {1, 2, 3, 4, 5, 6};
  const fs::path dir = fs::temp_directory_path() / "nqe_idx_test";
  fs::create_directories(dir);
  const fs::path plain = dir / "t.idx";
  {
    std::ofstream out(plain, std::ios::binary);
    auto bytes = serialize_idx(t);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              std::streamsize(bytes.size()));
  }
  IdxTensor back = load_idx_file(plain.string());
  CHECK(back.payload == t.payload);
  CHECK_THROWS_AS(load_idx_file((dir / "missing.idx").string()), DataError);
  fs::remove_all(dir);
}

TEST_CASE("bundled binary MNIST loads balanced -1/+1 digits in range") {
  Dataset train = load_binary_mnist(0, 1, Split::Train, 100);
  CHECK(train.size() == 100);
  CHECK(train.features.rows() == 100);
  CHECK(train.features.cols() == 784);
  std::size_t minus = 0, plus = 0;
  for (int y : train.labels) {
    CHECK((y == -1 || y == 1));
    (y == -1 ? minus : plus)++;
  }
  // Interleaved storage keeps head-of-file subsets roughly balanced.
  CHECK(minus >= 40);
  CHECK(plus >= 40);
  CHECK(train.features.minCoeff() >= 0.0);
  CHECK(train.features.maxCoeff() <= 1.0);
  CHECK(train.features.maxCoeff() > 0.5);
}

TEST_CASE("bundled train and test splits differ and limit=0 keeps everything") {
  Dataset all = load_binary_mnist(0, 1, Split::Train, 0);
  Dataset test = load_binary_mnist(0, 1, Split::Test, 0);
  CHECK(all.size() > 1000);
  CHECK(test.size() > 100);
  CHECK(all.size() != test.size());
}

TEST_CASE("loading is deterministic") {
  Dataset a = load_binary_mnist(0, 1, Split::Train, 50);
  Dataset b = load_binary_mnist(0, 1, Split::Train, 50);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
}

TEST_CASE("PCA components are orthonormal and reproduce small data exactly") {
  std::mt19937_64 rng(71);
  std::normal_distribution<double> gauss;
  // Rank-2 data in 5 dims: two PCA components capture everything.
  Eigen::MatrixXd basis(2, 5);
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 0; j < 5; ++j) basis(i, j) = gauss(rng);
  Eigen::MatrixXd coef(40, 2);
  for (Eigen::Index i = 0; i < 40; ++i)
    for (Eigen::Index j = 0; j < 2; ++j) coef(i, j) = gauss(rng);
  Eigen::MatrixXd x = coef * basis;

  PcaModel pca = pca_fit(x, 2);
  CHECK((pca.components * pca.components.transpose() -
         Eigen::MatrixXd::Identity(2, 2))
            .cwiseAbs()
            .maxCoeff() < 1e-9);
  CHECK(pca.variances[0] >= pca.variances[1]);

  // Projection back through the components reconstructs the centered data.
  Eigen::MatrixXd scores = pca_transform_all(pca, x);
  Eigen::MatrixXd recon =
      (scores * pca.components).rowwise() + pca.mean.transpose();
  CHECK((recon - x).cwiseAbs().maxCoeff() < 1e-8);

  // Single-vector and batch transforms agree.
  Eigen::VectorXd one = pca_transform(pca, x.row(7).transpose());
  CHECK((one - scores.row(7).transpose()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("PCA scores maximize variance along the first component") {
  std::mt19937_64 rng(72);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd x(200, 3);
  for (Eigen::Index i = 0; i < 200; ++i) {
    const double big = 5.0 * gauss(rng);
    x(i, 0) = big + 0.1 * gauss(rng);
    x(i, 1) = 0.3 * gauss(rng);
    x(i, 2) = big * 0.5 + 0.1 * gauss(rng);
  }
  PcaModel pca = pca_fit(x, 3);
  CHECK(pca.variances[0] > 10.0 * pca.variances[1]);
}

TEST_CASE("range scaler maps train extrema to [lo, hi] and clips outside") {
  Eigen::MatrixXd train(3, 2);
  train << 0.0, 10.0, 5.0, 20.0, 10.0, 30.0;
  RangeScaler s = fit_range_scaler(train, 0.0, M_PI);
  Eigen::VectorXd lo = s.apply(train.row(0).transpose());
  Eigen::VectorXd hi = s.apply(train.row(2).transpose());
  CHECK(lo[0] == doctest::Approx(0.0));
  CHECK(hi[1] == doctest::Approx(M_PI));
  Eigen::VectorXd outside(2);
  outside << -5.0, 100.0;
  Eigen::VectorXd clipped = s.apply(outside);
  CHECK(clipped[0] == doctest::Approx(0.0));
  CHECK(clipped[1] == doctest::Approx(M_PI));
  // Round trip inside the range.
  Eigen::VectorXd mid(2);
  mid << 5.0, 20.0;
  CHECK((s.invert(s.apply(mid)) - mid).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("synthetic clusters are deterministic, balanced, and interleaved") {
  SyntheticSpec spec;
  spec.n_samples = 60;
  spec.n_features = 4;
  spec.clusters_per_class = 2;
  spec.class_sep = 2.0;
  spec.seed = 9;
  Dataset a = make_synthetic(spec);
  Dataset b = make_synthetic(spec);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  CHECK(a.size() == 60);
  CHECK(a.features.cols() == 4);
  int sum = 0;
  for (int y : a.labels) sum += y;
  CHECK(sum == 0);
  // Any prefix stays nearly balanced.
  int head = 0;
  for (std::size_t i = 0; i < 10; ++i) head += a.labels[i];
  CHECK(std::abs(head) <= 2);

  spec.seed = 10;
  Dataset c = make_synthetic(spec);
  CHECK(a.features != c.features);
}

TEST_CASE("larger class separation widens the between-class gap") {
  SyntheticSpec close_spec;
  close_spec.n_samples = 200;
  close_spec.clusters_per_class = 1;
  close_spec.class_sep = 0.5;
  close_spec.seed = 4;
  SyntheticSpec far_spec = close_spec;
  far_spec.class_sep = 6.0;

  auto gap = [](const Dataset& d) {
    Eigen::RowVectorXd mean_m = Eigen::RowVectorXd::Zero(d.features.cols());
    Eigen::RowVectorXd mean_p = mean_m;
    double nm = 0, np = 0;
    for (Eigen::Index i = 0; i < d.features.rows(); ++i) {
      if (d.labels[std::size_t(i)] < 0) {
        mean_m += d.features.row(i);
        nm += 1;
      } else {
        mean_p += d.features.row(i);
        np += 1;
      }
    }
    return ((mean_p / np) - (mean_m / nm)).norm();
  };
  CHECK(gap(make_synthetic(far_spec)) > gap(make_synthetic(close_spec)));
}

TEST_CASE("data dir resolution prefers the explicit argument") {
  CHECK(resolve_data_dir("/some/explicit/dir") == "/some/explicit/dir");
  CHECK(!resolve_data_dir("").empty());  // falls back to bundled fixtures
  CHECK_FALSE(official_files_present("/definitely/not/here"));
}
