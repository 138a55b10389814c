#include "m2m/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace m2m {

namespace {

constexpr char kMagic[8] = {'M', '2', 'M', 'N', 'E', 'T', '\x00', '\x01'};

void apply_activation(Matrix& m, Activation act) {
  if (act == Activation::identity) return;
  double* p = m.data();
  for (std::size_t i = 0; i < m.size(); ++i) p[i] = p[i] > 0.0 ? p[i] : 0.0;
}

}  // namespace

DenseNet::DenseNet(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ShapeError("DenseNet: at least one layer required");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.bias.size() != layer.out_dim())
      throw ShapeError("DenseNet: bias length does not match layer output width");
    if (l > 0 && layers_[l - 1].out_dim() != layer.in_dim())
      throw ShapeError("DenseNet: consecutive layer dimensions do not chain");
  }
}

DenseNet DenseNet::make_mlp(std::size_t input_dim, std::span<const int> hidden_widths,
                            std::size_t output_dim, Rng& rng) {
  std::vector<DenseLayer> layers;
  std::size_t in = input_dim;
  auto add_layer = [&](std::size_t out, Activation act) {
    DenseLayer layer;
    layer.weights = Matrix(out, in);
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    for (std::size_t i = 0; i < layer.weights.size(); ++i)
      layer.weights.data()[i] = rng.uniform(-scale, scale);
    layer.bias.assign(out, 0.0);
    layer.activation = act;
    layers.push_back(std::move(layer));
    in = out;
  };
  for (int w : hidden_widths) {
    if (w <= 0) throw ShapeError("make_mlp: hidden width must be positive");
    add_layer(static_cast<std::size_t>(w), Activation::relu);
  }
  add_layer(output_dim, Activation::identity);
  return DenseNet(std::move(layers));
}

std::size_t DenseNet::input_dim() const {
  if (layers_.empty()) throw ShapeError("DenseNet: empty net");
  return layers_.front().in_dim();
}

std::size_t DenseNet::output_dim() const {
  if (layers_.empty()) throw ShapeError("DenseNet: empty net");
  return layers_.back().out_dim();
}

Matrix DenseNet::forward(const Matrix& batch) const {
  if (batch.cols() != input_dim())
    throw ShapeError("DenseNet::forward: batch width does not match input dimension");
  Matrix act = batch;
  for (const auto& layer : layers_) {
    const std::size_t m = act.rows();
    const std::size_t out = layer.out_dim();
    Matrix next(m, out);
    for (std::size_t i = 0; i < m; ++i) {
      const auto in_row = act.row(i);
      auto out_row = next.row(i);
      for (std::size_t j = 0; j < out; ++j) {
        const auto w_row = layer.weights.row(j);
        double sum = layer.bias[j];
        for (std::size_t k = 0; k < w_row.size(); ++k) sum += w_row[k] * in_row[k];
        out_row[j] = sum;
      }
    }
    apply_activation(next, layer.activation);
    act = std::move(next);
  }
  return act;
}

ForwardCache DenseNet::forward_cache(const Matrix& batch) const {
  if (batch.cols() != input_dim())
    throw ShapeError("DenseNet::forward_cache: batch width does not match input dimension");
  ForwardCache cache;
  cache.input = batch;
  cache.pre.reserve(layers_.size());
  cache.post.reserve(layers_.size());
  const Matrix* act = &cache.input;
  for (const auto& layer : layers_) {
    const std::size_t m = act->rows();
    const std::size_t out = layer.out_dim();
    Matrix pre(m, out);
    for (std::size_t i = 0; i < m; ++i) {
      const auto in_row = act->row(i);
      auto out_row = pre.row(i);
      for (std::size_t j = 0; j < out; ++j) {
        const auto w_row = layer.weights.row(j);
        double sum = layer.bias[j];
        for (std::size_t k = 0; k < w_row.size(); ++k) sum += w_row[k] * in_row[k];
        out_row[j] = sum;
      }
    }
    Matrix post = pre;
    apply_activation(post, layer.activation);
    cache.pre.push_back(std::move(pre));
    cache.post.push_back(std::move(post));
    act = &cache.post.back();
  }
  return cache;
}

Gradients DenseNet::backward_params(const ForwardCache& cache, const Matrix& dlogits) const {
  if (!dlogits.same_shape(cache.logits()))
    throw ShapeError("backward_params: dlogits shape does not match logits");
  Gradients grads = zero_gradients();
  const std::size_t m = dlogits.rows();
  Matrix dz = dlogits;  // identity output activation
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& layer = layers_[l];
    if (l + 1 < layers_.size()) {
      // dz currently holds d(post_l); fold in the activation derivative.
      const Matrix& pre = cache.pre[l];
      for (std::size_t i = 0; i < dz.size(); ++i)
        if (layer.activation == Activation::relu && pre.data()[i] <= 0.0) dz.data()[i] = 0.0;
    }
    const Matrix& input = l == 0 ? cache.input : cache.post[l - 1];
    Matrix& dw = grads.weights[l];
    auto& db = grads.bias[l];
    for (std::size_t i = 0; i < m; ++i) {
      const auto dz_row = dz.row(i);
      const auto in_row = input.row(i);
      for (std::size_t j = 0; j < layer.out_dim(); ++j) {
        const double g = dz_row[j];
        if (g == 0.0) continue;
        db[j] += g;
        auto dw_row = dw.row(j);
        for (std::size_t k = 0; k < in_row.size(); ++k) dw_row[k] += g * in_row[k];
      }
    }
    if (l == 0) break;
    // propagate to the previous layer's post-activation
    Matrix dprev(m, layer.in_dim());
    for (std::size_t i = 0; i < m; ++i) {
      const auto dz_row = dz.row(i);
      auto dprev_row = dprev.row(i);
      for (std::size_t j = 0; j < layer.out_dim(); ++j) {
        const double g = dz_row[j];
        if (g == 0.0) continue;
        const auto w_row = layer.weights.row(j);
        for (std::size_t k = 0; k < w_row.size(); ++k) dprev_row[k] += g * w_row[k];
      }
    }
    dz = std::move(dprev);
  }
  return grads;
}

Matrix DenseNet::backward_input(const ForwardCache& cache, const Matrix& dlogits) const {
  if (!dlogits.same_shape(cache.logits()))
    throw ShapeError("backward_input: dlogits shape does not match logits");
  const std::size_t m = dlogits.rows();
  Matrix dz = dlogits;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& layer = layers_[l];
    if (l + 1 < layers_.size()) {
      const Matrix& pre = cache.pre[l];
      for (std::size_t i = 0; i < dz.size(); ++i)
        if (layer.activation == Activation::relu && pre.data()[i] <= 0.0) dz.data()[i] = 0.0;
    }
    Matrix dprev(m, layer.in_dim());
    for (std::size_t i = 0; i < m; ++i) {
      const auto dz_row = dz.row(i);
      auto dprev_row = dprev.row(i);
      for (std::size_t j = 0; j < layer.out_dim(); ++j) {
        const double g = dz_row[j];
        if (g == 0.0) continue;
        const auto w_row = layer.weights.row(j);
        for (std::size_t k = 0; k < w_row.size(); ++k) dprev_row[k] += g * w_row[k];
      }
    }
    dz = std::move(dprev);
  }
  return dz;
}

Gradients DenseNet::zero_gradients() const {
  Gradients grads;
  grads.weights.reserve(layers_.size());
  grads.bias.reserve(layers_.size());
  for (const auto& layer : layers_) {
    grads.weights.emplace_back(layer.out_dim(), layer.in_dim());
    grads.bias.emplace_back(layer.out_dim(), 0.0);
  }
  return grads;
}

void DenseNet::save(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot open checkpoint for writing: " + file.string());
  out.write(kMagic, sizeof(kMagic));
  auto write_u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  write_u32(static_cast<std::uint32_t>(layers_.size()));
  for (const auto& layer : layers_) {
    write_u32(static_cast<std::uint32_t>(layer.in_dim()));
    write_u32(static_cast<std::uint32_t>(layer.out_dim()));
    const auto tag = static_cast<std::uint8_t>(layer.activation);
    out.write(reinterpret_cast<const char*>(&tag), 1);
  }
  for (const auto& layer : layers_) {
    out.write(reinterpret_cast<const char*>(layer.weights.data()),
              static_cast<std::streamsize>(layer.weights.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(layer.bias.data()),
              static_cast<std::streamsize>(layer.bias.size() * sizeof(double)));
  }
  if (!out) throw IoError("short write on checkpoint: " + file.string());
}

DenseNet DenseNet::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + file.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError("bad checkpoint magic: " + file.string());
  auto read_u32 = [&]() {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
  };
  const std::uint32_t n_layers = read_u32();
  if (!in || n_layers == 0 || n_layers > 1024)
    throw IoError("bad checkpoint header: " + file.string());
  std::vector<DenseLayer> layers(n_layers);
  for (auto& layer : layers) {
    const std::uint32_t in_dim = read_u32();
    const std::uint32_t out_dim = read_u32();
    std::uint8_t tag = 0;
    in.read(reinterpret_cast<char*>(&tag), 1);
    if (!in || tag > 1) throw IoError("bad layer header: " + file.string());
    layer.weights = Matrix(out_dim, in_dim);
    layer.bias.assign(out_dim, 0.0);
    layer.activation = static_cast<Activation>(tag);
  }
  for (auto& layer : layers) {
    in.read(reinterpret_cast<char*>(layer.weights.data()),
            static_cast<std::streamsize>(layer.weights.size() * sizeof(double)));
    in.read(reinterpret_cast<char*>(layer.bias.data()),
            static_cast<std::streamsize>(layer.bias.size() * sizeof(double)));
  }
  if (!in) throw IoError("truncated checkpoint: " + file.string());
  return DenseNet(std::move(layers));
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix probs(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto in_row = logits.row(i);
    auto out_row = probs.row(i);
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : in_row) mx = std::max(mx, v);
    double sum = 0.0;
    for (std::size_t j = 0; j < in_row.size(); ++j) {
      out_row[j] = std::exp(in_row[j] - mx);
      sum += out_row[j];
    }
    for (std::size_t j = 0; j < in_row.size(); ++j) out_row[j] /= sum;
  }
  return probs;
}

namespace {

CeResult cross_entropy_impl(const Matrix& logits, std::span<const int> labels,
                            const double* sample_weights) {
  const std::size_t m = logits.rows();
  const std::size_t k = logits.cols();
  if (labels.size() != m) throw ShapeError("cross_entropy: label count does not match rows");
  CeResult result;
  result.dlogits = Matrix(m, k);
  if (m == 0) return result;
  const Matrix probs = softmax_rows(logits);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= k)
      throw DomainError("cross_entropy: label out of range");
    const auto logit_row = logits.row(i);
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : logit_row) mx = std::max(mx, v);
    double lse = 0.0;
    for (double v : logit_row) lse += std::exp(v - mx);
    const double nll = std::log(lse) - (logit_row[y] - mx);
    const double w = sample_weights ? sample_weights[i] : 1.0;
    total += w * nll;
    const auto p_row = probs.row(i);
    auto g_row = result.dlogits.row(i);
    for (std::size_t j = 0; j < k; ++j) g_row[j] = w * p_row[j] / static_cast<double>(m);
    g_row[y] -= w / static_cast<double>(m);
  }
  result.loss = total / static_cast<double>(m);
  return result;
}

}  // namespace

CeResult cross_entropy(const Matrix& logits, std::span<const int> labels) {
  return cross_entropy_impl(logits, labels, nullptr);
}

CeResult cross_entropy(const Matrix& logits, std::span<const int> labels,
                       std::span<const double> sample_weights) {
  if (sample_weights.size() != logits.rows())
    throw ShapeError("cross_entropy: weight count does not match rows");
  return cross_entropy_impl(logits, labels, sample_weights.data());
}

double ce_value(const DenseNet& net, std::span<const double> x, int label) {
  Matrix batch(1, x.size());
  batch.set_row(0, x);
  const Matrix logits = net.forward(batch);
  const int labels[1] = {label};
  return cross_entropy(logits, labels).loss;
}

InputGradient input_gradient(const DenseNet& net, std::span<const double> x,
                             const InputObjective& objective) {
  if (x.size() != net.input_dim())
    throw ShapeError("input_gradient: input width does not match net");
  Matrix batch(1, x.size());
  batch.set_row(0, x);
  const ForwardCache cache = net.forward_cache(batch);
  const std::size_t k = net.output_dim();
  Matrix dlogits(1, k);
  InputGradient result;
  if (const auto* ce = std::get_if<CeToward>(&objective)) {
    const int labels[1] = {ce->label};
    CeResult ce_result = cross_entropy(cache.logits(), labels);
    result.value = ce_result.loss;
    dlogits = std::move(ce_result.dlogits);
  } else {
    const auto& sel = std::get<LogitOf>(objective);
    if (sel.index < 0 || static_cast<std::size_t>(sel.index) >= k)
      throw DomainError("input_gradient: logit index out of range");
    result.value = cache.logits()(0, static_cast<std::size_t>(sel.index));
    dlogits(0, static_cast<std::size_t>(sel.index)) = 1.0;
  }
  const Matrix dx = net.backward_input(cache, dlogits);
  result.gradient.assign(dx.row(0).begin(), dx.row(0).end());
  return result;
}

}  // namespace m2m
