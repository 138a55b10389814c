#include "m2m/optimizer.hpp"

namespace m2m {

double LrSchedule::rate(int epoch) const {
  double factor = 1.0;
  for (const auto& [at, f] : decay_steps) {
    if (epoch >= at) factor *= f;
  }
  double warm = 1.0;
  if (warmup_epochs > 0 && epoch < warmup_epochs)
    warm = static_cast<double>(epoch + 1) / static_cast<double>(warmup_epochs);
  return base * warm * factor;
}

void SgdMomentum::step(DenseNet& net, const Gradients& grads) {
  auto& layers = net.layers();
  if (grads.weights.size() != layers.size() || grads.bias.size() != layers.size())
    throw ShapeError("SgdMomentum::step: gradient layer count mismatch");
  if (!initialized_) {
    velocity_ = net.zero_gradients();
    initialized_ = true;
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& layer = layers[l];
    const Matrix& gw = grads.weights[l];
    if (!gw.same_shape(layer.weights) || grads.bias[l].size() != layer.bias.size())
      throw ShapeError("SgdMomentum::step: gradient shape mismatch");
    Matrix& vw = velocity_.weights[l];
    double* w = layer.weights.data();
    double* v = vw.data();
    const double* g = gw.data();
    for (std::size_t i = 0; i < layer.weights.size(); ++i) {
      v[i] = momentum_ * v[i] + g[i] + weight_decay_ * w[i];
      w[i] -= lr_ * v[i];
    }
    auto& vb = velocity_.bias[l];
    for (std::size_t i = 0; i < layer.bias.size(); ++i) {
      vb[i] = momentum_ * vb[i] + grads.bias[l][i] + weight_decay_ * layer.bias[i];
      layer.bias[i] -= lr_ * vb[i];
    }
  }
}

}  // namespace m2m
