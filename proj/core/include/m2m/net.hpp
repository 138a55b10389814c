#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "m2m/matrix.hpp"
#include "m2m/rng.hpp"

namespace m2m {

enum class Activation : std::uint8_t { identity = 0, relu = 1 };

struct DenseLayer {
  Matrix weights;             // out_dim x in_dim
  std::vector<double> bias;   // out_dim
  Activation activation = Activation::identity;

  std::size_t in_dim() const { return weights.cols(); }
  std::size_t out_dim() const { return weights.rows(); }
};

/// Parameter gradients, shaped exactly like the layers they belong to.
struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> bias;
};

/// Activations recorded during a forward pass; consumed by the backward passes.
struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre;   // pre-activation per layer
  std::vector<Matrix> post;  // post-activation per layer; post.back() == logits
  const Matrix& logits() const { return post.back(); }
};

/// Dense feed-forward classifier producing K logits, with exact gradients
/// with respect to both parameters and inputs. The output layer is always
/// identity; hidden layers are relu by default.
///
/// All arithmetic is double precision and sequential, so results are
/// bit-reproducible from the construction seed.
class DenseNet {
 public:
  DenseNet() = default;
  explicit DenseNet(std::vector<DenseLayer> layers);

  /// Fresh MLP: relu hidden layers, identity output. Weights are uniform in
  /// +-1/sqrt(fan_in), biases zero. Draw order is layer by layer, weight
  /// matrix row-major, so nets are reproducible from the Rng state.
  static DenseNet make_mlp(std::size_t input_dim, std::span<const int> hidden_widths,
                           std::size_t output_dim, Rng& rng);

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  /// batch is m x input_dim; returns m x output_dim logits.
  Matrix forward(const Matrix& batch) const;
  ForwardCache forward_cache(const Matrix& batch) const;

  /// dlogits is the loss gradient at the logits (m x K).
  Gradients backward_params(const ForwardCache& cache, const Matrix& dlogits) const;
  Matrix backward_input(const ForwardCache& cache, const Matrix& dlogits) const;

  Gradients zero_gradients() const;

  /// Checkpoint format (little-endian, round-trips bit-exactly):
  ///   magic "M2MNET\x00\x01", u32 layer count,
  ///   per layer: u32 in_dim, u32 out_dim, u8 activation tag,
  ///   then per layer: out*in weight doubles row-major, out bias doubles.
  void save(const std::filesystem::path& file) const;
  static DenseNet load(const std::filesystem::path& file);

 private:
  std::vector<DenseLayer> layers_;
};

/// Row-wise softmax with max subtraction.
Matrix softmax_rows(const Matrix& logits);

struct CeResult {
  double loss = 0.0;
  Matrix dlogits;
};

/// Mean cross-entropy over rows; gradient is (softmax - onehot) / m.
/// Labels are 0-based class indices in [0, K).
CeResult cross_entropy(const Matrix& logits, std::span<const int> labels);

/// Weighted variant: loss = mean_i(w_i * nll_i), gradient scaled to match.
CeResult cross_entropy(const Matrix& logits, std::span<const int> labels,
                       std::span<const double> sample_weights);

/// Cross-entropy of `net` on a single input toward `label`; forward only.
double ce_value(const DenseNet& net, std::span<const double> x, int label);

/// Objectives differentiable with respect to the input vector.
struct CeToward { int label; };   // cross-entropy toward a class
struct LogitOf { int index; };    // a single raw logit
using InputObjective = std::variant<CeToward, LogitOf>;

struct InputGradient {
  double value = 0.0;
  std::vector<double> gradient;
};

/// Value and d(objective)/dx for an objective over net(x).
InputGradient input_gradient(const DenseNet& net, std::span<const double> x,
                             const InputObjective& objective);

}  // namespace m2m
