#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "m2m/matrix.hpp"

namespace m2m {

/// Labeled vectors with 0-based integer class labels. Classes are re-indexed
/// at construction so that per-class counts are non-increasing: class 0 is
/// always the most frequent (ties keep their original order). class_ids()
/// maps each class index back to the label value it carried on input.
class LabeledDataset {
 public:
  LabeledDataset() = default;

  /// Builds a dataset from raw rows and labels, re-indexing classes by
  /// descending count. Labels may be any non-negative integers; the distinct
  /// values present define the K classes.
  static LabeledDataset from_samples(Matrix inputs, std::vector<int> labels);

  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return inputs_.cols(); }
  int num_classes() const { return static_cast<int>(class_counts_.size()); }

  const Matrix& inputs() const { return inputs_; }
  const std::vector<int>& labels() const { return labels_; }
  int label(std::size_t i) const { return labels_[i]; }
  std::span<const double> row(std::size_t i) const { return inputs_.row(i); }

  const std::vector<int>& class_counts() const { return class_counts_; }
  const std::vector<int>& class_ids() const { return class_ids_; }
  const std::vector<int>& indices_of_class(int cls) const { return by_class_[cls]; }

  bool balanced() const;

 private:
  Matrix inputs_;
  std::vector<int> labels_;
  std::vector<int> class_counts_;            // non-increasing
  std::vector<int> class_ids_;               // original label per class index
  std::vector<std::vector<int>> by_class_;   // sample indices per class
};

/// Long-tail subsampling: from a class-balanced dataset with n samples per
/// class, class k keeps round(n * rho^(-k / (K-1))) samples chosen uniformly
/// at random (round half up, clamped to >= 1), so the head/tail ratio is rho
/// up to rounding and intermediate counts decay geometrically.
LabeledDataset make_long_tail(const LabeledDataset& balanced, double rho, std::uint64_t seed);

/// K Gaussian blobs in d dimensions with unit isotropic noise. Class means
/// sit on a circle in the first two coordinates, scaled so that adjacent
/// means are `separation` apart (for K=2 this puts them at +-(separation/2, 0)).
LabeledDataset gaussian_mixture(int num_classes, int per_class, int dim, double separation,
                                std::uint64_t seed);

/// Two interleaved crescents in 2-D with Gaussian jitter of the given scale.
LabeledDataset two_moons(int per_class, double noise, std::uint64_t seed);

/// K concentric rings in 2-D, radii 1..K, with Gaussian jitter.
LabeledDataset concentric_rings(int num_classes, int per_class, double noise,
                                std::uint64_t seed);

struct SplitResult {
  LabeledDataset train;
  LabeledDataset val;
  LabeledDataset test;
};

/// Per-class split: exactly test_per_class samples per class go to the test
/// split (so it is perfectly balanced), a val_fraction share of the remainder
/// goes to validation, the rest to train. Selection is uniform per seed.
SplitResult split(const LabeledDataset& dataset, double val_fraction, int test_per_class,
                  std::uint64_t seed);

/// CSV I/O; header row "x0,...,x{d-1},label", doubles serialized with enough
/// digits to round-trip exactly. Labels are written as the current 0-based
/// class indices.
void write_csv(const LabeledDataset& dataset, const std::filesystem::path& file);
LabeledDataset read_csv(const std::filesystem::path& file);

/// IDX loader (big-endian magic, unsigned-byte payload). Items are flattened
/// to vectors and scaled to [0, 1]; labels come from the companion file.
LabeledDataset load_idx(const std::filesystem::path& images_file,
                        const std::filesystem::path& labels_file);

}  // namespace m2m
