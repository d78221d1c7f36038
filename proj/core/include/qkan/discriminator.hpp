#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace qkan {

/// Hidden width floor(2 sqrt(n_data)).
std::size_t discriminator_hidden_width(std::size_t n_data);

/**
 * Three-layer MLP discriminator [n_data, floor(2 sqrt(n_data)), 1] with ReLU
 * on the hidden layer and a sigmoid output.
 *
 * All parameters live in one flat buffer laid out as W1 (hidden x n_data,
 * row-major), b1, W2 (1 x hidden), b2; gradients use the same layout so the
 * optimisers can work on plain spans.
 */
class DiscriminatorMlp {
 public:
  /// W ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)) from a mt19937_64 seeded with `seed`; biases 0.
  DiscriminatorMlp(std::size_t n_data, std::uint64_t seed);

  std::array<std::size_t, 3> layer_dims() const { return {n_data_, hidden_, 1}; }
  std::size_t input_size() const { return n_data_; }
  std::size_t hidden_size() const { return hidden_; }
  std::uint64_t seed() const { return seed_; }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  std::size_t parameter_count() const { return params_.size(); }

  std::span<double> w1() { return std::span<double>(params_).subspan(0, hidden_ * n_data_); }
  std::span<double> b1() { return std::span<double>(params_).subspan(hidden_ * n_data_, hidden_); }
  std::span<double> w2() { return std::span<double>(params_).subspan(hidden_ * (n_data_ + 1), hidden_); }
  double& b2() { return params_.back(); }

  struct Forward {
    std::vector<double> pre_hidden;  // W1 x + b1
    std::vector<double> hidden;      // relu(pre_hidden)
    double logit = 0.0;
    double output = 0.0;             // sigmoid(logit)
  };

  /// Throws std::invalid_argument on input length mismatch.
  Forward forward(std::span<const double> x) const;
  double operator()(std::span<const double> x) const { return forward(x).output; }

  struct Gradients {
    std::vector<double> params;  // same layout as parameters()
    std::vector<double> input;   // dL/dx
  };

  /// Chain rule from dL/d(output); the ReLU derivative at 0 is taken as 0.
  Gradients backward(std::span<const double> x, const Forward& fwd, double dloss_doutput) const;

 private:
  std::size_t n_data_;
  std::size_t hidden_;
  std::uint64_t seed_;
  std::vector<double> params_;
};

/// p <- p - lr g. Throws std::invalid_argument on size mismatch.
void sgd_step(std::span<double> params, std::span<const double> grads, double lr);

/// Adam with bias correction. Moments are sized lazily on the first step.
class AdamState {
 public:
  AdamState(double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8)
      : beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {}

  void step(std::span<double> params, std::span<const double> grads, double lr);

  std::uint64_t steps() const { return t_; }

 private:
  double beta1_, beta2_, epsilon_;
  std::uint64_t t_ = 0;
  std::vector<double> m_, v_;
};

enum class OptimizerKind { Sgd, Adam };

/// SGD or Adam behind one call site; one instance per parameter buffer.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr) : kind_(kind), lr_(lr) {}

  void step(std::span<double> params, std::span<const double> grads) {
    if (kind_ == OptimizerKind::Sgd) {
      sgd_step(params, grads, lr_);
    } else {
      adam_.step(params, grads, lr_);
    }
  }

  OptimizerKind kind() const { return kind_; }
  double learning_rate() const { return lr_; }

 private:
  OptimizerKind kind_;
  double lr_;
  AdamState adam_;
};

}  // namespace qkan
