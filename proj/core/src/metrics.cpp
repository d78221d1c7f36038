#include "qkan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

namespace qkan {

void validate_image_set(const ImageSet& set, const char* what) {
  if (set.empty()) throw std::invalid_argument(std::string(what) + ": empty image set");
  const std::size_t len = set.front().size();
  for (const auto& img : set) {
    if (img.size() != len) throw std::invalid_argument(std::string(what) + ": ragged image set");
  }
}

namespace {

void check_same_shape(const ImageSet& a, const ImageSet& b, const char* what) {
  validate_image_set(a, what);
  validate_image_set(b, what);
  if (a.front().size() != b.front().size()) {
    throw std::invalid_argument(std::string(what) + ": image lengths differ");
  }
}

double dot(std::span<const double> x, std::span<const double> y) {
  return std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
}

}  // namespace

double mse(const ImageSet& a, const ImageSet& b) {
  check_same_shape(a, b, "mse");
  if (a.size() != b.size()) throw std::invalid_argument("mse: set sizes differ");
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = 0; k < a[i].size(); ++k) {
      const double d = a[i][k] - b[i][k];
      total += d * d;
    }
  }
  return total / static_cast<double>(a.size() * a.front().size());
}

std::vector<double> random_directions(std::size_t dim, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> dirs(dim * n);
  for (std::size_t p = 0; p < n; ++p) {
    auto row = std::span<double>(dirs).subspan(p * dim, dim);
    double norm = 0.0;
    do {
      for (auto& v : row) v = gauss(rng);
      norm = std::sqrt(dot(row, row));
    } while (norm == 0.0);
    for (auto& v : row) v /= norm;
  }
  return dirs;
}

double wasserstein2_squared_1d(std::vector<double> u, std::vector<double> v) {
  if (u.size() != v.size() || u.empty()) {
    throw std::invalid_argument("1-D Wasserstein needs equal, non-empty samples");
  }
  std::sort(u.begin(), u.end());
  std::sort(v.begin(), v.end());
  double total = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - v[i];
    total += d * d;
  }
  return total / static_cast<double>(u.size());
}

double sliced_wasserstein(const ImageSet& a, const ImageSet& b,
                          std::span<const double> directions) {
  check_same_shape(a, b, "sliced_wasserstein");
  if (a.size() != b.size()) throw std::invalid_argument("sliced_wasserstein: set sizes differ");
  const std::size_t dim = a.front().size();
  if (directions.empty() || directions.size() % dim != 0) {
    throw std::invalid_argument("sliced_wasserstein: direction table is not [n][dim]");
  }
  const std::size_t n_proj = directions.size() / dim;
  double total = 0.0;
  std::vector<double> pu(a.size()), pv(b.size());
  for (std::size_t p = 0; p < n_proj; ++p) {
    const auto theta = directions.subspan(p * dim, dim);
    for (std::size_t i = 0; i < a.size(); ++i) pu[i] = dot(a[i], theta);
    for (std::size_t i = 0; i < b.size(); ++i) pv[i] = dot(b[i], theta);
    total += wasserstein2_squared_1d(pu, pv);
  }
  return std::sqrt(total / static_cast<double>(n_proj));
}

double sliced_wasserstein(const ImageSet& a, const ImageSet& b, std::size_t n_projections,
                          std::uint64_t seed) {
  check_same_shape(a, b, "sliced_wasserstein");
  if (n_projections == 0) throw std::invalid_argument("sliced_wasserstein: zero projections");
  const auto dirs = random_directions(a.front().size(), n_projections, seed);
  return sliced_wasserstein(a, b, dirs);
}

double polynomial_kernel(std::span<const double> x, std::span<const double> y) {
  const double base = dot(x, y) / static_cast<double>(x.size()) + 1.0;
  return base * base * base;
}

double kid(const ImageSet& a, const ImageSet& b) {
  check_same_shape(a, b, "kid");
  const std::size_t m = a.size();
  const std::size_t n = b.size();
  if (m < 2 || n < 2) throw std::invalid_argument("kid: each set needs at least 2 images");

  double k_aa = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) k_aa += polynomial_kernel(a[i], a[j]);
  }
  double k_bb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) k_bb += polynomial_kernel(b[i], b[j]);
  }
  double k_ab = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) k_ab += polynomial_kernel(a[i], b[j]);
  }
  const auto md = static_cast<double>(m);
  const auto nd = static_cast<double>(n);
  return 2.0 * k_aa / (md * (md - 1.0)) + 2.0 * k_bb / (nd * (nd - 1.0)) -
         2.0 * k_ab / (md * nd);
}

WelchResult welch_t(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 2 || y.size() < 2) throw std::invalid_argument("welch_t: need >= 2 samples each");
  auto moments = [](std::span<const double> s) {
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    double ss = 0.0;
    for (double v : s) ss += (v - mean) * (v - mean);
    return std::pair{mean, ss / static_cast<double>(s.size() - 1)};
  };
  const auto [mx, vx] = moments(x);
  const auto [my, vy] = moments(y);
  const double sx = vx / static_cast<double>(x.size());
  const double sy = vy / static_cast<double>(y.size());
  const double se2 = sx + sy;
  const double diff = mx - my;

  if (se2 == 0.0) {
    if (diff == 0.0) return {0.0, 1.0};
    return {std::copysign(std::numeric_limits<double>::infinity(), diff), 0.0};
  }
  const double t = diff / std::sqrt(se2);
  if (t == 0.0) return {0.0, 1.0};
  const double dof = se2 * se2 / (sx * sx / static_cast<double>(x.size() - 1) +
                                  sy * sy / static_cast<double>(y.size() - 1));
  const boost::math::students_t dist(dof);
  const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  return {t, std::clamp(p, 0.0, 1.0)};
}

BonferroniMatrix bonferroni_matrix(const std::vector<SeedGroup>& groups, double alpha,
                                   double correction_divisor) {
  if (groups.size() < 2) throw std::invalid_argument("bonferroni_matrix: need >= 2 groups");
  if (!(correction_divisor > 0.0)) {
    throw std::invalid_argument("bonferroni_matrix: correction divisor must be positive");
  }
  const std::size_t n = groups.size();
  BonferroniMatrix out;
  out.alpha = alpha;
  out.correction_divisor = correction_divisor;
  out.t.assign(n, std::vector<double>(n, 0.0));
  out.p.assign(n, std::vector<double>(n, 1.0));
  out.significant.assign(n, std::vector<bool>(n, false));
  for (const auto& g : groups) out.seeds.push_back(g.seed);

  const double threshold = alpha / correction_divisor;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto usable = [&](std::size_t i) { return groups[i].values.size() >= 2; };
  for (std::size_t i = 0; i < n; ++i) {
    if (!usable(i)) out.t[i][i] = out.p[i][i] = nan;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!usable(i) || !usable(j)) {
        out.t[i][j] = out.t[j][i] = out.p[i][j] = out.p[j][i] = nan;
        continue;
      }
      const auto r = welch_t(groups[i].values, groups[j].values);
      out.t[i][j] = r.t;
      out.t[j][i] = -r.t;
      out.p[i][j] = out.p[j][i] = r.p;
      out.significant[i][j] = out.significant[j][i] = r.p < threshold;
    }
  }
  return out;
}

namespace {

std::string cell(double v) {
  if (std::isnan(v)) return ",NA";
  return fmt::format(",{:.4f}", v);
}

std::string header_row(const char* label, const std::vector<std::int64_t>& seeds) {
  std::string row = label;
  for (auto s : seeds) row += fmt::format(",{}", s);
  return row + "\n";
}

}  // namespace

std::string bonferroni_csv(const BonferroniMatrix& m) {
  std::string out = header_row("t value", m.seeds);
  for (std::size_t i = 0; i < m.seeds.size(); ++i) {
    out += fmt::format("{}", m.seeds[i]);
    for (double v : m.t[i]) out += cell(v);
    out += "\n";
  }
  out += header_row("p value", m.seeds);
  for (std::size_t i = 0; i < m.seeds.size(); ++i) {
    out += fmt::format("{}", m.seeds[i]);
    for (double v : m.p[i]) out += cell(v);
    out += "\n";
  }
  return out;
}

std::string significance_csv(const BonferroniMatrix& m) {
  std::string out = header_row("significant", m.seeds);
  for (std::size_t i = 0; i < m.seeds.size(); ++i) {
    out += fmt::format("{}", m.seeds[i]);
    for (bool v : m.significant[i]) out += v ? ",1" : ",0";
    out += "\n";
  }
  return out;
}

}  // namespace qkan
