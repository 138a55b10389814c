#include "m2m/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

#include "m2m/error.hpp"
#include "m2m/rng.hpp"

namespace m2m {

LabeledDataset LabeledDataset::from_samples(Matrix inputs, std::vector<int> labels) {
  if (inputs.rows() != labels.size())
    throw DatasetError("from_samples: row count does not match label count");
  if (labels.empty()) throw DatasetError("from_samples: empty dataset");

  std::map<int, int> counts;  // original label -> count; ordered for determinism
  for (int y : labels) {
    if (y < 0) throw DatasetError("from_samples: negative label");
    ++counts[y];
  }
  std::vector<std::pair<int, int>> order(counts.begin(), counts.end());
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  std::map<int, int> remap;  // original label -> class index
  LabeledDataset out;
  out.class_ids_.reserve(order.size());
  out.class_counts_.reserve(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    remap[order[k].first] = static_cast<int>(k);
    out.class_ids_.push_back(order[k].first);
    out.class_counts_.push_back(order[k].second);
  }
  out.inputs_ = std::move(inputs);
  out.labels_.resize(labels.size());
  out.by_class_.resize(order.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int cls = remap[labels[i]];
    out.labels_[i] = cls;
    out.by_class_[cls].push_back(static_cast<int>(i));
  }
  return out;
}

bool LabeledDataset::balanced() const {
  for (int c : class_counts_)
    if (c != class_counts_.front()) return false;
  return true;
}

namespace {

LabeledDataset from_selected(const LabeledDataset& source, const std::vector<int>& indices) {
  Matrix inputs(indices.size(), source.dim());
  std::vector<int> labels(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    inputs.set_row(i, source.row(static_cast<std::size_t>(indices[i])));
    labels[i] = source.label(static_cast<std::size_t>(indices[i]));
  }
  return LabeledDataset::from_samples(std::move(inputs), std::move(labels));
}

}  // namespace

LabeledDataset make_long_tail(const LabeledDataset& balanced, double rho, std::uint64_t seed) {
  if (!(rho > 1.0)) throw ProfileError("make_long_tail: imbalance ratio must be > 1");
  if (!balanced.balanced()) throw ProfileError("make_long_tail: input dataset is not balanced");
  const int k_classes = balanced.num_classes();
  if (k_classes < 2) throw ProfileError("make_long_tail: need at least two classes");
  const int n = balanced.class_counts().front();
  if (n < 1) throw ProfileError("make_long_tail: empty classes");

  Rng rng(derive_seed(seed, 0x7a11));
  std::vector<int> selected;
  for (int k = 0; k < k_classes; ++k) {
    const double exact = n * std::pow(rho, -static_cast<double>(k) / (k_classes - 1));
    const int target = std::max(1, static_cast<int>(std::floor(exact + 0.5)));
    std::vector<int> pool = balanced.indices_of_class(k);
    rng.partial_shuffle(std::span<int>(pool), static_cast<std::size_t>(target));
    selected.insert(selected.end(), pool.begin(), pool.begin() + target);
  }
  return from_selected(balanced, selected);
}

LabeledDataset gaussian_mixture(int num_classes, int per_class, int dim, double separation,
                                std::uint64_t seed) {
  if (num_classes < 2) throw DomainError("gaussian_mixture: need at least two classes");
  if (dim < 2) throw DomainError("gaussian_mixture: need dimension >= 2");
  if (per_class < 1) throw DomainError("gaussian_mixture: need at least one sample per class");
  if (separation < 0.0) throw DomainError("gaussian_mixture: separation must be non-negative");

  const double radius = separation / (2.0 * std::sin(std::numbers::pi / num_classes));
  Rng rng(derive_seed(seed, 0x9a55));
  Matrix inputs(static_cast<std::size_t>(num_classes) * per_class, dim);
  std::vector<int> labels(inputs.rows());
  std::size_t row = 0;
  for (int k = 0; k < num_classes; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / num_classes;
    const double mx = radius * std::cos(angle);
    const double my = radius * std::sin(angle);
    for (int i = 0; i < per_class; ++i, ++row) {
      auto r = inputs.row(row);
      for (int j = 0; j < dim; ++j) r[j] = rng.normal();
      r[0] += mx;
      r[1] += my;
      labels[row] = k;
    }
  }
  return LabeledDataset::from_samples(std::move(inputs), std::move(labels));
}

LabeledDataset two_moons(int per_class, double noise, std::uint64_t seed) {
  if (per_class < 1) throw DomainError("two_moons: need at least one sample per class");
  Rng rng(derive_seed(seed, 0x3003));
  Matrix inputs(2 * static_cast<std::size_t>(per_class), 2);
  std::vector<int> labels(inputs.rows());
  for (int i = 0; i < per_class; ++i) {
    const double t = std::numbers::pi * rng.uniform();
    auto r0 = inputs.row(static_cast<std::size_t>(i));
    r0[0] = std::cos(t) + noise * rng.normal();
    r0[1] = std::sin(t) + noise * rng.normal();
    labels[static_cast<std::size_t>(i)] = 0;
    const double s = std::numbers::pi * rng.uniform();
    auto r1 = inputs.row(static_cast<std::size_t>(per_class + i));
    r1[0] = 1.0 - std::cos(s) + noise * rng.normal();
    r1[1] = 0.5 - std::sin(s) + noise * rng.normal();
    labels[static_cast<std::size_t>(per_class + i)] = 1;
  }
  return LabeledDataset::from_samples(std::move(inputs), std::move(labels));
}

LabeledDataset concentric_rings(int num_classes, int per_class, double noise,
                                std::uint64_t seed) {
  if (num_classes < 2) throw DomainError("concentric_rings: need at least two classes");
  if (per_class < 1) throw DomainError("concentric_rings: need at least one sample per class");
  Rng rng(derive_seed(seed, 0x2177));
  Matrix inputs(static_cast<std::size_t>(num_classes) * per_class, 2);
  std::vector<int> labels(inputs.rows());
  std::size_t row = 0;
  for (int k = 0; k < num_classes; ++k) {
    const double radius = static_cast<double>(k + 1);
    for (int i = 0; i < per_class; ++i, ++row) {
      const double t = 2.0 * std::numbers::pi * rng.uniform();
      auto r = inputs.row(row);
      r[0] = radius * std::cos(t) + noise * rng.normal();
      r[1] = radius * std::sin(t) + noise * rng.normal();
      labels[row] = k;
    }
  }
  return LabeledDataset::from_samples(std::move(inputs), std::move(labels));
}

SplitResult split(const LabeledDataset& dataset, double val_fraction, int test_per_class,
                  std::uint64_t seed) {
  if (val_fraction < 0.0 || val_fraction >= 1.0)
    throw SplitError("split: val_fraction must be in [0, 1)");
  if (test_per_class < 1) throw SplitError("split: test_per_class must be >= 1");

  Rng rng(derive_seed(seed, 0x5917));
  std::vector<int> train_idx, val_idx, test_idx;
  for (int k = 0; k < dataset.num_classes(); ++k) {
    std::vector<int> pool = dataset.indices_of_class(k);
    const int n = static_cast<int>(pool.size());
    const int n_val = static_cast<int>(std::floor(val_fraction * (n - test_per_class)));
    if (n < test_per_class + n_val + 1)
      throw SplitError("split: class " + std::to_string(k) + " has too few samples (" +
                       std::to_string(n) + ") for the requested split");
    rng.partial_shuffle(std::span<int>(pool), pool.size());
    test_idx.insert(test_idx.end(), pool.begin(), pool.begin() + test_per_class);
    val_idx.insert(val_idx.end(), pool.begin() + test_per_class,
                   pool.begin() + test_per_class + n_val);
    train_idx.insert(train_idx.end(), pool.begin() + test_per_class + n_val, pool.end());
  }
  SplitResult out;
  out.train = from_selected(dataset, train_idx);
  if (!val_idx.empty()) out.val = from_selected(dataset, val_idx);
  out.test = from_selected(dataset, test_idx);
  return out;
}

void write_csv(const LabeledDataset& dataset, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot open CSV for writing: " + file.string());
  for (std::size_t j = 0; j < dataset.dim(); ++j) out << 'x' << j << ',';
  out << "label\n";
  char buf[64];
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto row = dataset.row(i);
    for (double v : row) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << buf << ',';
    }
    out << dataset.label(i) << '\n';
  }
  if (!out) throw IoError("short write on CSV: " + file.string());
}

LabeledDataset read_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open CSV: " + file.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty CSV: " + file.string());
  std::size_t dim = std::count(line.begin(), line.end(), ',');
  if (dim == 0) throw IoError("CSV header has no feature columns: " + file.string());

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    for (std::size_t j = 0; j < dim; ++j) {
      if (!std::getline(ss, cell, ',')) throw IoError("short CSV row in " + file.string());
      values.push_back(std::strtod(cell.c_str(), nullptr));
    }
    if (!std::getline(ss, cell)) throw IoError("missing label in " + file.string());
    labels.push_back(std::stoi(cell));
    ++rows;
  }
  Matrix inputs(rows, dim);
  std::memcpy(inputs.data(), values.data(), values.size() * sizeof(double));
  return LabeledDataset::from_samples(std::move(inputs), std::move(labels));
}

namespace {

struct IdxTensor {
  std::vector<std::uint32_t> dims;
  std::vector<unsigned char> bytes;
};

IdxTensor read_idx(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open IDX file: " + file.string());
  unsigned char magic[4];
  in.read(reinterpret_cast<char*>(magic), 4);
  if (!in || magic[0] != 0 || magic[1] != 0)
    throw IoError("bad IDX magic: " + file.string());
  if (magic[2] != 0x08)
    throw IoError("unsupported IDX element type (only unsigned byte): " + file.string());
  const int ndims = magic[3];
  if (ndims < 1 || ndims > 4) throw IoError("unsupported IDX rank: " + file.string());
  IdxTensor t;
  for (int i = 0; i < ndims; ++i) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw IoError("truncated IDX header: " + file.string());
    t.dims.push_back((std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
                     (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]));
  }
  std::size_t total = 1;
  for (auto d : t.dims) total *= d;
  t.bytes.resize(total);
  in.read(reinterpret_cast<char*>(t.bytes.data()), static_cast<std::streamsize>(total));
  if (!in) throw IoError("truncated IDX payload: " + file.string());
  return t;
}

}  // namespace

LabeledDataset load_idx(const std::filesystem::path& images_file,
                        const std::filesystem::path& labels_file) {
  const IdxTensor images = read_idx(images_file);
  const IdxTensor labels = read_idx(labels_file);
  if (labels.dims.size() != 1)
    throw IoError("IDX label file must be rank 1: " + labels_file.string());
  const std::size_t n = images.dims.front();
  if (labels.dims.front() != n)
    throw IoError("IDX image/label counts differ");
  std::size_t item = 1;
  for (std::size_t i = 1; i < images.dims.size(); ++i) item *= images.dims[i];
  if (item == 0 || n == 0) throw IoError("empty IDX dataset");

  Matrix inputs(n, item);
  std::vector<int> ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = inputs.row(i);
    for (std::size_t j = 0; j < item; ++j)
      row[j] = static_cast<double>(images.bytes[i * item + j]) / 255.0;
    ys[i] = static_cast<int>(labels.bytes[i]);
  }
  return LabeledDataset::from_samples(std::move(inputs), std::move(ys));
}

}  // namespace m2m
