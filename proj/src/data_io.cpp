#include "nqe/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include <zlib.h>

#ifndef NQE_BUNDLED_DATA_DIR
#define NQE_BUNDLED_DATA_DIR ""
#endif

namespace nqe {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// IDX format

namespace {

std::size_t dtype_size(std::uint8_t dtype) {
  switch (dtype) {
    case 0x08: case 0x09: return 1;
    case 0x0B: return 2;
    case 0x0C: case 0x0D: return 4;
    case 0x0E: return 8;
    default: throw DataError("idx: unsupported dtype");
  }
}

}  // namespace

std::size_t IdxTensor::element_count() const {
  std::size_t n = 1;
  for (std::uint32_t d : dims) n *= d;
  return n;
}

IdxTensor parse_idx(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4) throw DataError("idx: truncated header");
  if (bytes[0] != 0 || bytes[1] != 0) throw DataError("idx: bad magic");
  IdxTensor t;
  t.dtype = bytes[2];
  const int ndims = bytes[3];
  dtype_size(t.dtype);
  if (ndims < 1 || bytes.size() < 4 + 4 * std::size_t(ndims))
    throw DataError("idx: truncated dimension list");
  std::size_t off = 4;
  for (int i = 0; i < ndims; ++i) {
    const std::uint32_t d = (std::uint32_t(bytes[off]) << 24) |
                            (std::uint32_t(bytes[off + 1]) << 16) |
                            (std::uint32_t(bytes[off + 2]) << 8) |
                            std::uint32_t(bytes[off + 3]);
    t.dims.push_back(d);
    off += 4;
  }
  const std::size_t payload = t.element_count() * dtype_size(t.dtype);
  if (bytes.size() != off + payload) throw DataError("idx: truncated payload");
  t.payload.assign(bytes.begin() + std::ptrdiff_t(off), bytes.end());
  return t;
}

std::vector<std::uint8_t> serialize_idx(const IdxTensor& tensor) {
  std::vector<std::uint8_t> out;
  out.push_back(0);
  out.push_back(0);
  out.push_back(tensor.dtype);
  out.push_back(std::uint8_t(tensor.dims.size()));
  for (std::uint32_t d : tensor.dims) {
    out.push_back(std::uint8_t(d >> 24));
    out.push_back(std::uint8_t(d >> 16));
    out.push_back(std::uint8_t(d >> 8));
    out.push_back(std::uint8_t(d));
  }
  out.insert(out.end(), tensor.payload.begin(), tensor.payload.end());
  return out;
}

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& data) {
  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) throw DataError("gzip: init failed");
  std::vector<std::uint8_t> out;
  std::vector<std::uint8_t> buf(1 << 16);
  zs.next_in = const_cast<Bytef*>(data.data());
  zs.avail_in = uInt(data.size());
  int ret = Z_OK;
  do {
    zs.next_out = buf.data();
    zs.avail_out = uInt(buf.size());
    ret = inflate(&zs, Z_NO_FLUSH);
    if (ret != Z_OK && ret != Z_STREAM_END) {
      inflateEnd(&zs);
      throw DataError("gzip: corrupt stream");
    }
    out.insert(out.end(), buf.data(), buf.data() + (buf.size() - zs.avail_out));
  } while (ret != Z_STREAM_END);
  inflateEnd(&zs);
  return out;
}

}  // namespace

IdxTensor load_idx_file(const std::string& path) {
  std::vector<std::uint8_t> bytes = read_file(path);
  if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b) bytes = gunzip(bytes);
  return parse_idx(bytes);
}

// ---------------------------------------------------------------------------
// Dataset / PCA / scaling

std::vector<double> Dataset::row(std::size_t i) const {
  std::vector<double> out(std::size_t(features.cols()));
  for (Eigen::Index j = 0; j < features.cols(); ++j) out[std::size_t(j)] = features(Eigen::Index(i), j);
  return out;
}

PcaModel pca_fit(const Eigen::MatrixXd& features, int k) {
  const Eigen::Index n = features.rows(), m = features.cols();
  if (n < 2) throw DataError("pca: need at least 2 samples");
  if (k < 1 || k > std::min(n, m)) throw DataError("pca: k out of range");
  PcaModel model;
  model.mean = features.colwise().mean();
  Eigen::MatrixXd centered = features.rowwise() - model.mean.transpose();
  Eigen::MatrixXd cov = centered.transpose() * centered / double(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  model.components.resize(k, m);
  model.variances.resize(k);
  for (int i = 0; i < k; ++i) {
    // Eigen sorts ascending; take the top-k from the back.
    Eigen::VectorXd comp = es.eigenvectors().col(m - 1 - i);
    Eigen::Index arg;
    comp.cwiseAbs().maxCoeff(&arg);
    if (comp[arg] < 0) comp = -comp;
    model.components.row(i) = comp.transpose();
    model.variances[i] = std::max(0.0, es.eigenvalues()[m - 1 - i]);
  }
  return model;
}

Eigen::VectorXd pca_transform(const PcaModel& model, const Eigen::VectorXd& x) {
  return model.components * (x - model.mean);
}

Eigen::MatrixXd pca_transform_all(const PcaModel& model, const Eigen::MatrixXd& x) {
  return (x.rowwise() - model.mean.transpose()) * model.components.transpose();
}

Eigen::VectorXd RangeScaler::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double span = max[i] - min[i];
    if (span <= 0) {
      out[i] = 0.5 * (lo + hi);  // constant feature maps to the midpoint
    } else {
      out[i] = lo + (x[i] - min[i]) / span * (hi - lo);
      out[i] = std::clamp(out[i], lo, hi);
    }
  }
  return out;
}

Eigen::VectorXd RangeScaler::invert(const Eigen::VectorXd& y) const {
  Eigen::VectorXd out(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double span = max[i] - min[i];
    out[i] = span <= 0 ? min[i] : min[i] + (y[i] - lo) / (hi - lo) * span;
  }
  return out;
}

RangeScaler fit_range_scaler(const Eigen::MatrixXd& train_features, double lo, double hi) {
  if (train_features.rows() == 0) throw DataError("scaler: empty training set");
  RangeScaler s;
  s.lo = lo;
  s.hi = hi;
  s.min = train_features.colwise().minCoeff();
  s.max = train_features.colwise().maxCoeff();
  return s;
}

Eigen::MatrixXd scale_all(const RangeScaler& s, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    out.row(i) = s.apply(x.row(i).transpose()).transpose();
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic clusters

Dataset make_synthetic(const SyntheticSpec& spec) {
  if (spec.n_samples == 0 || spec.n_features < 1 || spec.clusters_per_class < 1)
    throw DataError("synthetic: invalid spec");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> coin(0, 1);

  // Distinct hypercube vertices of side 2*class_sep for all clusters.
  const int total_clusters = 2 * spec.clusters_per_class;
  std::set<std::vector<int>> used;
  std::vector<Eigen::VectorXd> centers;
  while (int(centers.size()) < total_clusters) {
    std::vector<int> vertex(std::size_t(spec.n_features));
    for (int& v : vertex) v = coin(rng);
    if (!used.insert(vertex).second) continue;
    Eigen::VectorXd c(spec.n_features);
    for (int i = 0; i < spec.n_features; ++i)
      c[i] = (vertex[std::size_t(i)] * 2 - 1) * spec.class_sep;
    centers.push_back(c);
  }

  const std::size_t per_class = spec.n_samples / 2;
  Dataset ds;
  ds.features.resize(Eigen::Index(2 * per_class), spec.n_features);
  ds.labels.resize(2 * per_class);
  ds.provenance = "synthetic";
  // Alternate classes so any head-of-dataset subset stays balanced.
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < per_class; ++i) {
    for (int cls = 0; cls < 2; ++cls) {
      const int cluster = int(i % std::size_t(spec.clusters_per_class));
      const Eigen::VectorXd& center =
          centers[std::size_t(cls * spec.clusters_per_class + cluster)];
      for (int j = 0; j < spec.n_features; ++j)
        ds.features(row, j) = center[j] + gauss(rng);
      ds.labels[std::size_t(row)] = cls == 0 ? -1 : 1;
      ++row;
    }
  }
  return ds;
}

// ---------------------------------------------------------------------------
// MNIST loading

std::string resolve_data_dir(const std::string& explicit_dir) {
  if (!explicit_dir.empty()) return explicit_dir;
  if (const char* env = std::getenv("NQE_DATA_DIR"); env && *env) return env;
  return NQE_BUNDLED_DATA_DIR;
}

namespace {

std::string find_idx(const std::string& dir, const std::string& base) {
  for (const std::string& name : {base, base + ".gz"}) {
    const fs::path p = fs::path(dir) / name;
    if (fs::exists(p)) return p.string();
  }
  return "";
}

const char* kTrainImages = "train-images-idx3-ubyte";
const char* kTrainLabels = "train-labels-idx1-ubyte";
const char* kTestImages = "t10k-images-idx3-ubyte";
const char* kTestLabels = "t10k-labels-idx1-ubyte";

}  // namespace

bool official_files_present(const std::string& data_dir) {
  return !find_idx(data_dir, kTrainImages).empty() &&
         !find_idx(data_dir, kTrainLabels).empty() &&
         !find_idx(data_dir, kTestImages).empty() &&
         !find_idx(data_dir, kTestLabels).empty();
}

Dataset load_binary_mnist(int class_a, int class_b, Split split, std::size_t limit,
                          const std::string& data_dir) {
  std::string dir = resolve_data_dir(data_dir);
  std::string provenance = "mnist";
  if (!official_files_present(dir)) {
    const std::string bundled = NQE_BUNDLED_DATA_DIR;
    if (dir != bundled && official_files_present(bundled)) {
      std::fprintf(stderr,
                   "warning: official MNIST files not found in '%s'; "
                   "falling back to the bundled subset\n",
                   dir.c_str());
      dir = bundled;
      provenance = "bundled-subset";
    } else if (official_files_present(bundled)) {
      dir = bundled;
      provenance = "bundled-subset";
    } else {
      throw DataError("no MNIST files found (set NQE_DATA_DIR or install fixtures)");
    }
  } else if (dir == std::string(NQE_BUNDLED_DATA_DIR)) {
    provenance = "bundled-subset";
  }

  const IdxTensor images = load_idx_file(
      find_idx(dir, split == Split::Train ? kTrainImages : kTestImages));
  const IdxTensor labels = load_idx_file(
      find_idx(dir, split == Split::Train ? kTrainLabels : kTestLabels));
  if (images.dims.size() != 3 || labels.dims.size() != 1)
    throw DataError("mnist: unexpected tensor ranks");
  if (images.dims[0] != labels.dims[0]) throw DataError("mnist: image/label count mismatch");
  const std::size_t count = images.dims[0];
  const std::size_t pixels = std::size_t(images.dims[1]) * images.dims[2];

  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < count; ++i) {
    const int lbl = labels.payload[i];
    if (lbl == class_a || lbl == class_b) keep.push_back(i);
    if (limit > 0 && keep.size() >= limit) break;
  }

  Dataset ds;
  ds.provenance = provenance;
  ds.features.resize(Eigen::Index(keep.size()), Eigen::Index(pixels));
  ds.labels.resize(keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const std::size_t i = keep[r];
    for (std::size_t p = 0; p < pixels; ++p)
      ds.features(Eigen::Index(r), Eigen::Index(p)) =
          double(images.payload[i * pixels + p]) / 255.0;
    ds.labels[r] = labels.payload[i] == class_a ? -1 : 1;
  }
  return ds;
}

}  // namespace nqe
