#include "qkan/discriminator.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace qkan {

std::size_t discriminator_hidden_width(std::size_t n_data) {
  const auto h = static_cast<std::size_t>(std::floor(2.0 * std::sqrt(static_cast<double>(n_data))));
  return std::max<std::size_t>(h, 1);
}

DiscriminatorMlp::DiscriminatorMlp(std::size_t n_data, std::uint64_t seed)
    : n_data_(n_data), hidden_(discriminator_hidden_width(n_data)), seed_(seed) {
  if (n_data < 1) throw std::invalid_argument("discriminator input size must be >= 1");
  params_.assign(hidden_ * n_data_ + hidden_ + hidden_ + 1, 0.0);

  std::mt19937_64 rng(seed);
  auto draw = [&rng](double bound) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return (2.0 * u - 1.0) * bound;
  };
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(n_data_));
  for (auto& w : w1()) w = draw(bound1);
  const double bound2 = 1.0 / std::sqrt(static_cast<double>(hidden_));
  for (auto& w : w2()) w = draw(bound2);
}

DiscriminatorMlp::Forward DiscriminatorMlp::forward(std::span<const double> x) const {
  if (x.size() != n_data_) {
    throw std::invalid_argument("discriminator expects " + std::to_string(n_data_) +
                                " inputs, got " + std::to_string(x.size()));
  }
  Forward f;
  f.pre_hidden.resize(hidden_);
  f.hidden.resize(hidden_);
  const double* w1p = params_.data();
  const double* b1p = w1p + hidden_ * n_data_;
  const double* w2p = b1p + hidden_;
  for (std::size_t h = 0; h < hidden_; ++h) {
    double acc = b1p[h];
    const double* row = w1p + h * n_data_;
    for (std::size_t i = 0; i < n_data_; ++i) acc += row[i] * x[i];
    f.pre_hidden[h] = acc;
    f.hidden[h] = acc > 0.0 ? acc : 0.0;
  }
  double logit = params_.back();
  for (std::size_t h = 0; h < hidden_; ++h) logit += w2p[h] * f.hidden[h];
  f.logit = logit;
  f.output = 1.0 / (1.0 + std::exp(-logit));
  return f;
}

DiscriminatorMlp::Gradients DiscriminatorMlp::backward(std::span<const double> x,
                                                       const Forward& fwd,
                                                       double dloss_doutput) const {
  Gradients g;
  g.params.assign(params_.size(), 0.0);
  g.input.assign(n_data_, 0.0);
  if (dloss_doutput == 0.0) return g;

  const double dlogit = dloss_doutput * fwd.output * (1.0 - fwd.output);
  double* gw1 = g.params.data();
  double* gb1 = gw1 + hidden_ * n_data_;
  double* gw2 = gb1 + hidden_;
  const double* w1p = params_.data();
  const double* w2p = w1p + hidden_ * n_data_ + hidden_;

  g.params.back() = dlogit;
  for (std::size_t h = 0; h < hidden_; ++h) {
    gw2[h] = dlogit * fwd.hidden[h];
    if (!(fwd.pre_hidden[h] > 0.0)) continue;
    const double dpre = dlogit * w2p[h];
    gb1[h] = dpre;
    const double* row = w1p + h * n_data_;
    double* grow = gw1 + h * n_data_;
    for (std::size_t i = 0; i < n_data_; ++i) {
      grow[i] = dpre * x[i];
      g.input[i] += dpre * row[i];
    }
  }
  return g;
}

void sgd_step(std::span<double> params, std::span<const double> grads, double lr) {
  if (params.size() != grads.size()) throw std::invalid_argument("sgd_step: shape mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grads[i];
}

void AdamState::step(std::span<double> params, std::span<const double> grads, double lr) {
  if (params.size() != grads.size()) throw std::invalid_argument("adam_step: shape mismatch");
  if (m_.empty()) {
    m_.assign(params.size(), 0.0);
    v_.assign(params.size(), 0.0);
  } else if (m_.size() != params.size()) {
    throw std::invalid_argument("adam_step: parameter count changed between steps");
  }
  ++t_;
  const double correction1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double correction2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
    const double m_hat = m_[i] / correction1;
    const double v_hat = v_[i] / correction2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + epsilon_);
  }
}

}  // namespace qkan
