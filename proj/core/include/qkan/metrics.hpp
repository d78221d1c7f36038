#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qkan {

/// Equal-length pixel vectors; each image is one sample of the distribution.
using ImageSet = std::vector<std::vector<double>>;

/// Throws std::invalid_argument if empty or ragged.
void validate_image_set(const ImageSet& set, const char* what);

/// Mean squared pixel difference over all images and pixels.
double mse(const ImageSet& a, const ImageSet& b);

/// n random unit directions in R^dim (normalised standard Gaussians), row-major.
std::vector<double> random_directions(std::size_t dim, std::size_t n, std::uint64_t seed);

/// Squared 1-D Wasserstein-2 between equal-size empirical samples (sorted matching).
double wasserstein2_squared_1d(std::vector<double> u, std::vector<double> v);

/// Sliced W2 over explicit directions: sqrt(mean_theta W2^2(<a,theta>, <b,theta>)).
double sliced_wasserstein(const ImageSet& a, const ImageSet& b, std::span<const double> directions);

inline constexpr std::size_t kDefaultSwdProjections = 50;

double sliced_wasserstein(const ImageSet& a, const ImageSet& b,
                          std::size_t n_projections = kDefaultSwdProjections,
                          std::uint64_t seed = 0);

/// k(x, y) = (x.y / d + 1)^3.
double polynomial_kernel(std::span<const double> x, std::span<const double> y);

/**
 * Unbiased squared MMD under polynomial_kernel, computed on raw pixel
 * vectors (no learned feature extractor). Needs at least two images per set.
 */
double kid(const ImageSet& a, const ImageSet& b);

struct WelchResult {
  double t;
  double p;  // two-sided
};

/**
 * Welch's unequal-variance t test with Welch-Satterthwaite degrees of freedom.
 * Both variances zero: t = +-inf, p = 0 if the means differ; t = 0, p = 1 otherwise.
 */
WelchResult welch_t(std::span<const double> x, std::span<const double> y);

struct SeedGroup {
  std::int64_t seed;
  std::vector<double> values;
};

struct BonferroniMatrix {
  std::vector<std::int64_t> seeds;
  std::vector<std::vector<double>> t;
  std::vector<std::vector<double>> p;
  std::vector<std::vector<bool>> significant;  // p < alpha / correction_divisor
  double alpha;
  double correction_divisor;
};

/// Pairwise Welch tests. A group with fewer than two values (a failed run)
/// yields NaN cells, printed as NA.
BonferroniMatrix bonferroni_matrix(const std::vector<SeedGroup>& groups, double alpha = 0.05,
                                   double correction_divisor = 240.0);

/// Table layout: a "t value" block then a "p value" block, seed labels on both axes.
std::string bonferroni_csv(const BonferroniMatrix& m);
std::string significance_csv(const BonferroniMatrix& m);

}  // namespace qkan
