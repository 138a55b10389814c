#pragma once

#include <utility>
#include <vector>

#include "m2m/net.hpp"

namespace m2m {

/// Learning-rate schedule: linear warm-up toward the base rate over the first
/// warmup_epochs, then multiplicative step decays from the listed epochs.
/// During warm-up, rate(e) = base * (e + 1) / warmup_epochs, so the rate
/// climbs linearly and reaches the base rate at the last warm-up epoch.
struct LrSchedule {
  double base = 0.1;
  int warmup_epochs = 0;
  std::vector<std::pair<int, double>> decay_steps;  // (epoch, factor); factor applies from that epoch on

  double rate(int epoch) const;
};

/// SGD with momentum and coupled weight decay:
///   v     <- momentum * v + grad + weight_decay * param
///   param <- param - lr * v
/// Momentum buffers are sized on the first step and shape-checked afterwards.
class SgdMomentum {
 public:
  SgdMomentum(double momentum, double weight_decay)
      : momentum_(momentum), weight_decay_(weight_decay) {}

  void set_learning_rate(double lr) { lr_ = lr; }
  double learning_rate() const { return lr_; }
  double momentum() const { return momentum_; }
  double weight_decay() const { return weight_decay_; }

  void step(DenseNet& net, const Gradients& grads);

 private:
  double momentum_;
  double weight_decay_;
  double lr_ = 0.0;
  Gradients velocity_;
  bool initialized_ = false;
};

}  // namespace m2m
