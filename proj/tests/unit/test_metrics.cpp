#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qkan/metrics.hpp"

using namespace qkan;

namespace {

ImageSet random_set(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ImageSet s(n, std::vector<double>(d));
  for (auto& img : s)
    for (auto& v : img) v = u(rng);
  return s;
}

// Exact 1-D optimal matching by enumerating every permutation.
double w2_squared_bruteforce(std::vector<double> u, const std::vector<double>& v) {
  std::vector<std::size_t> perm(v.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) cost += (u[i] - v[perm[i]]) * (u[i] - v[perm[i]]);
    best = std::min(best, cost / static_cast<double>(u.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double swd_bruteforce(const ImageSet& a, const ImageSet& b, const std::vector<double>& dirs) {
  const std::size_t d = a.front().size();
  const std::size_t n_proj = dirs.size() / d;
  double total = 0.0;
  for (std::size_t p = 0; p < n_proj; ++p) {
    std::vector<double> pu, pv;
    for (const auto& x : a) pu.push_back(std::inner_product(x.begin(), x.end(), dirs.begin() + p * d, 0.0));
    for (const auto& y : b) pv.push_back(std::inner_product(y.begin(), y.end(), dirs.begin() + p * d, 0.0));
    total += w2_squared_bruteforce(pu, pv);
  }
  return std::sqrt(total / static_cast<double>(n_proj));
}

// Two-sided p value of Student's t by Simpson quadrature of the density.
double student_p_quadrature(double t, double dof) {
  const double norm = std::tgamma((dof + 1) / 2) / (std::sqrt(dof * M_PI) * std::tgamma(dof / 2));
  auto pdf = [&](double x) { return norm * std::pow(1 + x * x / dof, -(dof + 1) / 2); };
  const double a = 0.0, b = std::abs(t);
  const int n = 20000;
  const double h = (b - a) / n;
  double s = pdf(a) + pdf(b);
  for (int i = 1; i < n; ++i) s += pdf(a + i * h) * (i % 2 ? 4 : 2);
  return 1.0 - 2.0 * (s * h / 3);
}

}  // namespace

TEST(Mse, Examples) {
  std::mt19937_64 rng(51);
  const auto a = random_set(4, 9, rng);
  EXPECT_EQ(mse(a, a), 0.0);
  EXPECT_EQ(mse({std::vector<double>(9, 0.0)}, {std::vector<double>(9, 1.0)}), 1.0);
  EXPECT_NEAR(mse({{0.2}}, {{0.5}}), 0.09, 1e-15);
}

TEST(Mse, RejectsShapeMismatch) {
  EXPECT_THROW(mse({{0.1, 0.2}}, {{0.1}}), std::invalid_argument);
  EXPECT_THROW(mse({}, {}), std::invalid_argument);
  EXPECT_THROW(mse({{0.1}, {0.2}}, {{0.1}}), std::invalid_argument);
}

TEST(Swd, IdenticalSetsGiveZero) {
  std::mt19937_64 rng(52);
  const auto a = random_set(8, 16, rng);
  EXPECT_NEAR(sliced_wasserstein(a, a), 0.0, 1e-12);
}

TEST(Swd, DirectionsAreUnitVectors) {
  const auto dirs = random_directions(7, 20, 3);
  for (std::size_t p = 0; p < 20; ++p) {
    double n2 = 0.0;
    for (std::size_t k = 0; k < 7; ++k) n2 += dirs[p * 7 + k] * dirs[p * 7 + k];
    EXPECT_NEAR(n2, 1.0, 1e-14);
  }
  EXPECT_EQ(random_directions(7, 20, 3), dirs);
}

TEST(Swd, ConstantShiftOfPointMass) {
  for (double delta : {0.1, 0.37, -0.25}) {
    const ImageSet a{{0.3}}, b{{0.3 + delta}};
    EXPECT_NEAR(sliced_wasserstein(a, b, 10, 1), std::abs(delta), 1e-14);
    EXPECT_NEAR(swd_bruteforce(a, b, random_directions(1, 10, 1)), std::abs(delta), 1e-14);
  }
}

TEST(Swd, MatchesPermutationBruteForce) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + trial % 5;
    const auto a = random_set(n, 6, rng), b = random_set(n, 6, rng);
    const auto dirs = random_directions(6, 25, trial);
    EXPECT_NEAR(sliced_wasserstein(a, b, dirs), swd_bruteforce(a, b, dirs), 1e-12);
  }
}

TEST(Swd, InvariantUnderJointPermutation) {
  std::mt19937_64 rng(54);
  auto a = random_set(6, 5, rng), b = random_set(6, 5, rng);
  const double base = sliced_wasserstein(a, b, 30, 2);
  std::shuffle(a.begin(), a.end(), rng);
  std::shuffle(b.begin(), b.end(), rng);
  EXPECT_NEAR(sliced_wasserstein(a, b, 30, 2), base, 1e-14);
}

TEST(Swd, SeedChangesValue) {
  std::mt19937_64 rng(55);
  const auto a = random_set(8, 16, rng), b = random_set(8, 16, rng);
  EXPECT_NE(sliced_wasserstein(a, b, 50, 0), sliced_wasserstein(a, b, 50, 1));
}

TEST(Kid, OrthogonalUnitPixels) {
  const ImageSet a{{1, 0}, {1, 0}}, b{{0, 1}, {0, 1}};
  EXPECT_NEAR(kid(a, b), oracle::kid_bruteforce(a, b), 1e-12);
  // 1.5^3 within each set, 1 across: 3.375 + 3.375 - 2.
  EXPECT_NEAR(kid(a, b), 4.75, 1e-12);
}

TEST(Kid, MatchesBruteForceOnEightImageSets) {
  std::mt19937_64 rng(56);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_set(8, 64, rng), b = random_set(8, 64, rng);
    EXPECT_NEAR(kid(a, b), oracle::kid_bruteforce(a, b), 1e-12);
  }
}

TEST(Kid, IdenticalSetsNearZeroAndPermutationInvariant) {
  std::mt19937_64 rng(57);
  auto a = random_set(8, 16, rng);
  // With the full cross term, identical sets leave only the diagonal bias
  // -(2/m) (mean k(x,x) - mean_{i != j} k(x_i, x_j)), which is <= 0.
  double diag = 0.0, off = 0.0;
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) (i == j ? diag : off) += polynomial_kernel(a[i], a[j]);
  const double bias = -(2.0 / 8.0) * (diag / 8.0 - off / 56.0);
  EXPECT_LE(kid(a, a), 1e-9);
  EXPECT_NEAR(kid(a, a), bias, 1e-12);
  EXPECT_NEAR(kid(a, a), oracle::kid_bruteforce(a, a), 1e-12);

  ImageSet large(400, std::vector<double>(16, 0.0));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& img : large)
    for (auto& v : img) v = u(rng);
  EXPECT_LT(std::abs(kid(large, large)), std::abs(kid(a, a)));

  const auto b = random_set(8, 16, rng);
  const double base = kid(a, b);
  std::vector<std::size_t> perm(16);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  auto permute = [&](const ImageSet& s) {
    ImageSet out = s;
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t k = 0; k < 16; ++k) out[i][k] = s[i][perm[k]];
    return out;
  };
  EXPECT_NEAR(kid(permute(a), permute(b)), base, 1e-12);
}

TEST(Kid, NeedsTwoImagesPerSet) {
  EXPECT_THROW(kid({{0.1}}, {{0.2}, {0.3}}), std::invalid_argument);
}

TEST(Welch, IdenticalSamples) {
  const std::vector<double> x{0.3, 0.5, 0.4, 0.9};
  const auto r = welch_t(x, x);
  EXPECT_EQ(r.t, 0.0);
  EXPECT_EQ(r.p, 1.0);
}

TEST(Welch, Antisymmetric) {
  const std::vector<double> x{0.31, 0.35, 0.29, 0.40, 0.33}, y{0.36, 0.41, 0.38, 0.35};
  const auto xy = welch_t(x, y), yx = welch_t(y, x);
  EXPECT_EQ(xy.t, -yx.t);
  EXPECT_EQ(xy.p, yx.p);
}

TEST(Welch, ZeroVarianceConvention) {
  const std::vector<double> x{0, 0}, y{1, 1};
  const auto r = welch_t(x, y);
  EXPECT_EQ(r.p, 0.0);
  EXPECT_TRUE(std::isinf(r.t));
  EXPECT_LT(r.t, 0.0);
  const auto same = welch_t(x, x);
  EXPECT_EQ(same.t, 0.0);
  EXPECT_EQ(same.p, 1.0);
}

TEST(Welch, MatchesClosedFormAndQuadrature) {
  std::mt19937_64 rng(58);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> x(5 + trial), y(9);
    for (auto& v : x) v = g(rng);
    for (auto& v : y) v = 0.7 + 2.0 * g(rng);
    auto stats = [](const std::vector<double>& s) {
      const double m = std::accumulate(s.begin(), s.end(), 0.0) / s.size();
      double ss = 0.0;
      for (double v : s) ss += (v - m) * (v - m);
      return std::pair{m, ss / (s.size() - 1) / s.size()};
    };
    const auto [mx, sx] = stats(x);
    const auto [my, sy] = stats(y);
    const double t = (mx - my) / std::sqrt(sx + sy);
    const double dof = (sx + sy) * (sx + sy) / (sx * sx / (x.size() - 1) + sy * sy / (y.size() - 1));
    const auto r = welch_t(x, y);
    EXPECT_NEAR(r.t, t, 1e-12);
    EXPECT_NEAR(r.p, student_p_quadrature(t, dof), 1e-9);
  }
}

TEST(Bonferroni, SixteenGroupsHaveTableStructure) {
  std::mt19937_64 rng(59);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<SeedGroup> groups;
  const std::vector<std::int64_t> seeds{42, 2, 10, 13, 0, 3407, 7120, 10000, 11111, 16384,
                                        17171, 130000, 14480, 11668, 500001, 620000};
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    SeedGroup grp{seeds[i], std::vector<double>(100)};
    for (auto& v : grp.values) v = 0.35 + 0.02 * static_cast<double>(i % 4) + 0.05 * g(rng);
    groups.push_back(grp);
  }
  const auto m = bonferroni_matrix(groups);
  ASSERT_EQ(m.t.size(), 16u);
  EXPECT_EQ(m.seeds, seeds);
  for (std::size_t i = 0; i < 16; ++i) {
    ASSERT_EQ(m.t[i].size(), 16u);
    EXPECT_EQ(m.t[i][i], 0.0);
    EXPECT_EQ(m.p[i][i], 1.0);
    EXPECT_FALSE(m.significant[i][i]);
    for (std::size_t j = 0; j < 16; ++j) {
      EXPECT_EQ(m.t[i][j], -m.t[j][i]);
      EXPECT_EQ(m.p[i][j], m.p[j][i]);
      EXPECT_EQ(m.significant[i][j], m.p[i][j] < 0.05 / 240.0);
    }
  }
}

TEST(Bonferroni, IdenticalGroupsNotSignificant) {
  const std::vector<double> v{0.3, 0.4, 0.35};
  const auto m = bonferroni_matrix({{1, v}, {2, v}});
  EXPECT_FALSE(m.significant[0][1]);
  EXPECT_EQ(m.p[0][1], 1.0);
}

TEST(Bonferroni, DivisorOneIsUncorrected) {
  const std::vector<double> x{0.30, 0.31, 0.29, 0.30}, y{0.40, 0.42, 0.41, 0.39};
  const auto m = bonferroni_matrix({{1, x}, {2, y}}, 0.05, 1.0);
  const auto w = welch_t(x, y);
  EXPECT_EQ(m.t[0][1], w.t);
  EXPECT_EQ(m.p[0][1], w.p);
  EXPECT_EQ(m.significant[0][1], w.p < 0.05);
}

TEST(Bonferroni, FailedGroupGivesNaCells) {
  const std::vector<double> v{0.3, 0.4, 0.35};
  const auto m = bonferroni_matrix({{1, v}, {2, {}}, {3, v}});
  EXPECT_TRUE(std::isnan(m.t[0][1]));
  EXPECT_TRUE(std::isnan(m.p[1][1]));
  EXPECT_FALSE(m.significant[0][1]);
  EXPECT_EQ(m.p[0][2], 1.0);
  const auto csv = bonferroni_csv(m);
  EXPECT_NE(csv.find("2,NA,NA,NA\n"), std::string::npos);
}

TEST(Bonferroni, CsvLayout) {
  const std::vector<double> x{0.30, 0.31, 0.29, 0.30}, y{0.40, 0.42, 0.41, 0.39};
  const auto m = bonferroni_matrix({{42, x}, {2, y}});
  const auto csv = bonferroni_csv(m);
  EXPECT_EQ(csv.rfind("t value,42,2\n42,0.0000,", 0), 0u) << csv;
  EXPECT_NE(csv.find("p value,42,2\n"), std::string::npos);
  EXPECT_EQ(significance_csv(m), "significant,42,2\n42,0,1\n2,1,0\n");
  EXPECT_THROW(bonferroni_matrix({{1, x}}), std::invalid_argument);
}
