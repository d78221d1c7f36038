#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "qkan/discriminator.hpp"

using namespace qkan;

namespace {

std::vector<double> random_input(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = u(rng);
  return x;
}

double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-6});
  return std::abs(a - b) / scale;
}

// L = output, so dL/doutput = 1.
double output_at(const DiscriminatorMlp& d, std::span<const double> x) { return d(x); }

}  // namespace

TEST(Discriminator, LayerDims) {
  EXPECT_EQ(DiscriminatorMlp(256, 0).layer_dims(), (std::array<std::size_t, 3>{256, 32, 1}));
  EXPECT_EQ(DiscriminatorMlp(64, 0).layer_dims(), (std::array<std::size_t, 3>{64, 16, 1}));
  EXPECT_EQ(discriminator_hidden_width(10), 6u);
  EXPECT_EQ(DiscriminatorMlp(64, 0).parameter_count(), 64u * 16 + 16 + 16 + 1);
  EXPECT_THROW(DiscriminatorMlp(0, 0), std::invalid_argument);
}

TEST(Discriminator, SeedDeterminesWeights) {
  DiscriminatorMlp a(64, 9), b(64, 9), c(64, 10);
  EXPECT_TRUE(std::ranges::equal(a.parameters(), b.parameters()));
  EXPECT_FALSE(std::ranges::equal(a.parameters(), c.parameters()));
}

TEST(Discriminator, InitialisationBounds) {
  DiscriminatorMlp d(64, 1);
  for (double w : d.w1()) EXPECT_LE(std::abs(w), 1.0 / 8.0);
  for (double w : d.w2()) EXPECT_LE(std::abs(w), 1.0 / 4.0);
  for (double b : d.b1()) EXPECT_EQ(b, 0.0);
  EXPECT_EQ(d.b2(), 0.0);
}

TEST(Discriminator, ZeroParametersGiveOneHalf) {
  DiscriminatorMlp d(16, 3);
  std::ranges::fill(d.parameters(), 0.0);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(d(random_input(16, rng)), 0.5);
}

TEST(Discriminator, OutputStrictlyInsideUnitInterval) {
  DiscriminatorMlp d(64, 4);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 1000; ++i) {
    const double y = d(random_input(64, rng));
    EXPECT_GT(y, 0.0);
    EXPECT_LT(y, 1.0);
  }
}

TEST(Discriminator, OutputBiasIsMonotone) {
  DiscriminatorMlp d(16, 5);
  std::mt19937_64 rng(3);
  const auto x = random_input(16, rng);
  const double before = d(x);
  d.b2() += 0.25;
  EXPECT_GT(d(x), before);
}

TEST(Discriminator, RejectsWrongInputSize) {
  DiscriminatorMlp d(16, 5);
  EXPECT_THROW(d(std::vector<double>(15)), std::invalid_argument);
}

TEST(Backward, MatchesFiniteDifferencesOnRandomNets) {
  std::mt19937_64 rng(6);
  const double h = 1e-5;
  for (int net = 0; net < 20; ++net) {
    const std::size_t n = 4 + rng() % 30;
    DiscriminatorMlp d(n, rng());
    std::normal_distribution<double> g(0.0, 0.1);
    for (auto& b : d.b1()) b = g(rng);
    d.b2() = g(rng);

    auto x = random_input(n, rng);
    auto fwd = d.forward(x);
    // Keep every hidden unit away from the ReLU kink so differences are smooth.
    while (std::ranges::any_of(fwd.pre_hidden, [&](double v) { return std::abs(v) < 1e-3; })) {
      x = random_input(n, rng);
      fwd = d.forward(x);
    }
    const auto grads = d.backward(x, fwd, 1.0);

    double worst = 0.0;
    auto params = d.parameters();
    for (std::size_t k = 0; k < params.size(); ++k) {
      const double saved = params[k];
      params[k] = saved + h;
      const double up = output_at(d, x);
      params[k] = saved - h;
      const double down = output_at(d, x);
      params[k] = saved;
      worst = std::max(worst, relative_error(grads.params[k], (up - down) / (2 * h)));
    }
    for (std::size_t i = 0; i < n; ++i) {
      auto xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      worst = std::max(worst, relative_error(grads.input[i], (d(xp) - d(xm)) / (2 * h)));
    }
    EXPECT_LT(worst, 1e-4) << "net " << net;
  }
}

TEST(Backward, ZeroUpstreamGivesZeroGradients) {
  DiscriminatorMlp d(16, 7);
  std::mt19937_64 rng(8);
  const auto x = random_input(16, rng);
  const auto grads = d.backward(x, d.forward(x), 0.0);
  for (double v : grads.params) EXPECT_EQ(v, 0.0);
  for (double v : grads.input) EXPECT_EQ(v, 0.0);
}

TEST(Backward, DeadReluUnitPassesNoGradient) {
  DiscriminatorMlp d(4, 9);
  const std::size_t hidden = d.hidden_size();
  // Unit 0 gets a large negative bias so its pre-activation is negative.
  d.b1()[0] = -100.0;
  const std::vector<double> x{0.2, 0.4, 0.6, 0.8};
  const auto fwd = d.forward(x);
  ASSERT_LT(fwd.pre_hidden[0], 0.0);
  const auto grads = d.backward(x, fwd, 1.0);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(grads.params[i], 0.0);  // W1 row 0
  EXPECT_EQ(grads.params[hidden * 4], 0.0);                             // b1[0]
  EXPECT_EQ(grads.params[hidden * 5], 0.0);                             // W2[0]
}

TEST(Sgd, Arithmetic) {
  std::vector<double> p{1.0};
  const std::vector<double> g{2.0};
  sgd_step(p, g, 0.1);
  EXPECT_DOUBLE_EQ(p[0], 0.8);
  sgd_step(p, g, 0.0);
  EXPECT_DOUBLE_EQ(p[0], 0.8);

  std::vector<double> twice{1.0}, once{1.0};
  sgd_step(twice, g, 0.1);
  sgd_step(twice, g, 0.1);
  sgd_step(once, g, 0.2);
  EXPECT_NEAR(twice[0], once[0], 1e-15);
  EXPECT_THROW(sgd_step(p, std::vector<double>{1.0, 2.0}, 0.1), std::invalid_argument);
}

TEST(Adam, FirstStepHasMagnitudeLearningRate) {
  for (double scale : {1e-3, 1.0, 1e3}) {
    AdamState adam;
    std::vector<double> p{0.5, -0.5};
    const std::vector<double> g{scale, -scale};
    adam.step(p, g, 0.01);
    EXPECT_NEAR(p[0], 0.5 - 0.01, 1e-6);
    EXPECT_NEAR(p[1], -0.5 + 0.01, 1e-6);
  }
}

TEST(Adam, ZeroGradientLeavesParameters) {
  AdamState adam;
  std::vector<double> p{0.3, 0.7};
  for (int i = 0; i < 5; ++i) adam.step(p, std::vector<double>{0.0, 0.0}, 0.1);
  EXPECT_EQ(p, (std::vector<double>{0.3, 0.7}));
  EXPECT_EQ(adam.steps(), 5u);
}

TEST(Adam, Deterministic) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> n;
  std::vector<std::vector<double>> grads(20, std::vector<double>(3));
  for (auto& g : grads)
    for (auto& v : g) v = n(rng);
  auto run = [&] {
    Optimizer opt(OptimizerKind::Adam, 0.05);
    std::vector<double> p{0.1, 0.2, 0.3};
    for (const auto& g : grads) opt.step(p, g);
    return p;
  };
  EXPECT_EQ(run(), run());
}
