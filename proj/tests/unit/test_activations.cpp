#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/special_functions/cardinal_b_spline.hpp>
#include <gtest/gtest.h>

#include "qkan/activations.hpp"

using namespace qkan;
using std::numbers::pi;

namespace {

BasisConfig bspline(std::size_t n) { return {BasisFamily::BSpline, n, 8}; }
BasisConfig rbf(std::size_t n) { return {BasisFamily::Rbf, n, 8}; }

double central_difference(const EncodedInput& enc, std::vector<double> c, std::size_t s, double h) {
  c[s] += h;
  const double up = phi_from_encoded(enc, c);
  c[s] -= 2 * h;
  const double down = phi_from_encoded(enc, c);
  return (up - down) / (2 * h);
}

}  // namespace

TEST(Fermi, Values) {
  EXPECT_EQ(fermi_activation(0.0), 0.0);
  EXPECT_DOUBLE_EQ(fermi_activation(10.0), 10.0 / (std::exp(-10.0) + 1.0));
  EXPECT_NEAR(fermi_activation(10.0), 9.999546, 1e-6);
}

TEST(Fermi, OddPartIsIdentity) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    EXPECT_NEAR(fermi_activation(x) - fermi_activation(-x), x, 1e-12) << x;
  }
}

TEST(BSpline, PartitionOfUnityAtHalf) {
  double sum = 0.0;
  for (std::size_t s = 0; s < 8; ++s) sum += basis_eval(bspline(8), s, 0.5);
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(BSpline, PartitionOfUnityOnGridForEveryBasisSize) {
  for (std::size_t n = 1; n <= 12; ++n) {
    std::vector<double> v(n);
    for (int k = 0; k <= 100; ++k) {
      basis_values(bspline(n), k / 100.0, v);
      double sum = 0.0;
      for (double b : v) sum += b;
      EXPECT_NEAR(sum, 1.0, 1e-10) << "n_basis " << n << " x " << k / 100.0;
    }
  }
}

TEST(BSpline, NonNegativeAndLocal) {
  const auto cfg = bspline(8);
  std::vector<double> v(8);
  for (int k = 0; k < 1000; ++k) {
    basis_values(cfg, k / 999.0, v);
    int nonzero = 0;
    for (double b : v) {
      EXPECT_GE(b, 0.0);
      nonzero += b > 0.0;
    }
    EXPECT_LE(nonzero, 4);
  }
}

TEST(BSpline, EndpointsInterpolate) {
  EXPECT_NEAR(basis_eval(bspline(8), 0, 0.0), 1.0, 1e-15);
  EXPECT_NEAR(basis_eval(bspline(8), 7, 1.0), 1.0, 1e-15);
}

TEST(BSpline, InteriorFunctionsMatchCardinalSplines) {
  // n_basis = 8, cubic: knots 0,0,0,0,.2,.4,.6,.8,1,1,1,1. B_3 and B_4 have
  // distinct knots, so they are shifted, scaled cardinal cubic B-splines.
  const double h = 0.2;
  for (int k = 0; k <= 200; ++k) {
    const double x = k / 200.0;
    EXPECT_NEAR(basis_eval(bspline(8), 3, x),
                boost::math::cardinal_b_spline<3>((x - 0.4) / h), 1e-12) << x;
    EXPECT_NEAR(basis_eval(bspline(8), 4, x),
                boost::math::cardinal_b_spline<3>((x - 0.6) / h), 1e-12) << x;
  }
}

TEST(BSpline, SmallBasisDegradesDegree) {
  EXPECT_EQ(bspline(1).spline_degree(), 0u);
  EXPECT_EQ(bspline(2).spline_degree(), 1u);
  EXPECT_EQ(bspline(8).spline_degree(), 3u);
  EXPECT_NEAR(basis_eval(bspline(2), 0, 0.25), 0.75, 1e-15);
  EXPECT_NEAR(basis_eval(bspline(2), 1, 0.25), 0.25, 1e-15);
}

TEST(Rbf, UnitAtCentres) {
  for (std::size_t n : {2u, 5u, 8u}) {
    for (std::size_t s = 0; s < n; ++s) {
      const double mu = static_cast<double>(s) / static_cast<double>(n - 1);
      EXPECT_NEAR(basis_eval(rbf(n), s, mu), 1.0, 1e-15);
    }
  }
}

TEST(Rbf, GaussianShape) {
  const double sigma = 1.0 / 7.0;
  const double x = 0.3;
  const double r = (x - 2.0 / 7.0) / sigma;
  EXPECT_NEAR(basis_eval(rbf(8), 2, x), std::exp(-r * r), 1e-15);
}

TEST(Basis, RejectsBadArguments) {
  EXPECT_THROW(basis_eval(bspline(8), 8, 0.5), std::out_of_range);
  EXPECT_THROW(basis_eval(bspline(0), 0, 0.5), std::out_of_range);
  std::vector<double> v(3);
  EXPECT_THROW(basis_values(bspline(8), 0.5, v), std::invalid_argument);
  EXPECT_THROW(basis_family_from_string("spline"), std::invalid_argument);
  EXPECT_EQ(basis_family_from_string(to_string(BasisFamily::Rbf)), BasisFamily::Rbf);
}

TEST(Basis, GridIntervalsForTrial) {
  EXPECT_EQ(BasisConfig::grid_intervals_for_trial(0), 8u);
  EXPECT_EQ(BasisConfig::grid_intervals_for_trial(3), 20u);
}

TEST(Phi, ZeroCoefficients) {
  KanActivationParams params(1, 1, 1, bspline(8));
  const std::vector<double> one{0.0}, two{0.0, 0.0};
  EXPECT_NEAR(phi_angle(params, 0, 0, 0, one), pi, 1e-15);
  EXPECT_NEAR(phi_angle(params, 0, 0, 0, two), 2 * pi, 1e-15);
}

TEST(Phi, ClampedComponentContributesZero) {
  // B_0(0) = 1 and E_f(0) = 0, so c_0 = 1.7 puts u = 1.7 at x = 0.
  std::vector<double> c(8, 0.0);
  c[0] = 1.7;
  KanActivationParams params(1, 1, 1, bspline(8), c);
  const std::vector<double> x{0.0};
  EXPECT_EQ(phi_angle(params, 0, 0, 0, x), 0.0);
  for (double g : phi_gradient(params, 0, 0, 0, x)) EXPECT_EQ(g, 0.0);

  c[0] = -1.7;
  KanActivationParams lower(1, 1, 1, bspline(8), c);
  EXPECT_NEAR(phi_angle(lower, 0, 0, 0, x), 2 * pi, 1e-15);
  for (double g : phi_gradient(lower, 0, 0, 0, x)) EXPECT_EQ(g, 0.0);
}

TEST(PhiGradient, AtZeroIsMinusTwoBasis) {
  for (const auto& cfg : {bspline(8), rbf(8)}) {
    KanActivationParams params(1, 1, 1, cfg);
    const std::vector<double> x{0.0};
    const auto g = phi_gradient(params, 0, 0, 0, x);
    for (std::size_t s = 0; s < 8; ++s) EXPECT_NEAR(g[s], -2.0 * basis_eval(cfg, s, 0.0), 1e-15);
  }
}

TEST(PhiGradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> coef(-0.3, 0.3);
  int checked = 0;
  for (int trial = 0; trial < 200 && checked < 50; ++trial) {
    const auto cfg = trial % 2 ? rbf(2 + trial % 7) : bspline(1 + trial % 9);
    std::vector<double> x(1 + trial % 4), c(cfg.n_basis);
    for (auto& v : x) v = unit(rng);
    for (auto& v : c) v = coef(rng);
    const auto enc = encode_input(cfg, x);
    bool near_plateau = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double u = enc.fermi[i];
      for (std::size_t s = 0; s < cfg.n_basis; ++s) u += c[s] * enc.basis_row(i)[s];
      near_plateau |= std::abs(u) > 0.99;
    }
    if (near_plateau) continue;
    std::vector<double> g(cfg.n_basis);
    phi_gradient_from_encoded(enc, c, g);
    for (std::size_t s = 0; s < cfg.n_basis; ++s) {
      EXPECT_NEAR(g[s], central_difference(enc, c, s, 1e-5), 1e-6);
    }
    ++checked;
  }
  EXPECT_EQ(checked, 50);
}

TEST(KanParams, LayoutAndShape) {
  KanActivationParams params(2, 3, 4, bspline(5));
  EXPECT_EQ(params.size(), 2u * 3 * 4 * 5);
  EXPECT_EQ(params.index(1, 2, 3, 4), params.size() - 1);
  EXPECT_EQ(params.index(0, 1, 0, 0), 4u * 5);
  EXPECT_THROW(KanActivationParams(1, 1, 1, bspline(8), std::vector<double>(7)),
               std::invalid_argument);
}
