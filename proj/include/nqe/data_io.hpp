#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

// Dataset ingestion and preprocessing: IDX parsing (MNIST container format),
// class filtering, PCA, feature scaling, synthetic clusters, deterministic
// splits.

namespace nqe {

class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct IdxTensor {
  std::uint8_t dtype = 0x08;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> payload;  // row-major

  std::size_t element_count() const;
};

IdxTensor parse_idx(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> serialize_idx(const IdxTensor& tensor);
// Reads a plain or gzip-compressed IDX file.
IdxTensor load_idx_file(const std::string& path);

struct Dataset {
  // rows = samples; pixels scaled to [0,1] or PCA scores.
  Eigen::MatrixXd features;
  std::vector<int> labels;  // -1 / +1
  std::string provenance;

  std::size_t size() const { return labels.size(); }
  std::vector<double> row(std::size_t i) const;
};

struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;  // k orthonormal rows
  Eigen::VectorXd variances;   // descending
};

PcaModel pca_fit(const Eigen::MatrixXd& features, int k);
Eigen::VectorXd pca_transform(const PcaModel& model, const Eigen::VectorXd& x);
Eigen::MatrixXd pca_transform_all(const PcaModel& model, const Eigen::MatrixXd& x);

struct RangeScaler {
  Eigen::VectorXd min;
  Eigen::VectorXd max;
  double lo = 0.0, hi = M_PI;

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;  // clipped to [lo, hi]
  Eigen::VectorXd invert(const Eigen::VectorXd& y) const;
};

RangeScaler fit_range_scaler(const Eigen::MatrixXd& train_features, double lo = 0.0,
                             double hi = M_PI);
Eigen::MatrixXd scale_all(const RangeScaler& s, const Eigen::MatrixXd& x);

struct SyntheticSpec {
  std::size_t n_samples = 400;
  int n_features = 4;
  int clusters_per_class = 4;
  double class_sep = 1.0;
  std::uint64_t seed = 0;
};

// Per class, Gaussian clusters (sigma = 1) centered at distinct random
// hypercube vertices of side 2*class_sep; balanced classes.
Dataset make_synthetic(const SyntheticSpec& spec);

enum class Split { Train, Test };

// Filters `class_a` -> -1 and `class_b` -> +1 from IDX files found in
// `data_dir` (official MNIST names, optionally .gz). Falls back to the
// bundled subset when official files are missing. limit = 0 keeps everything.
Dataset load_binary_mnist(int class_a, int class_b, Split split, std::size_t limit = 0,
                          const std::string& data_dir = "");

// Resolution order: explicit argument, NQE_DATA_DIR, bundled fixtures.
std::string resolve_data_dir(const std::string& explicit_dir);
bool official_files_present(const std::string& data_dir);

}  // namespace nqe
