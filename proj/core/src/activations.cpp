#include "qkan/activations.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qkan {

namespace {

// Components with |u| this close to 1 are treated as clamped: the acos
// derivative is singular there.
constexpr double kPlateauMargin = 1e-9;

std::vector<double> open_uniform_knots(std::size_t n_basis, std::size_t degree) {
  const std::size_t intervals = n_basis - degree;
  std::vector<double> knots;
  knots.reserve(n_basis + degree + 1);
  for (std::size_t i = 0; i < degree; ++i) knots.push_back(0.0);
  for (std::size_t i = 0; i <= intervals; ++i) {
    knots.push_back(static_cast<double>(i) / static_cast<double>(intervals));
  }
  for (std::size_t i = 0; i < degree; ++i) knots.push_back(1.0);
  return knots;
}

void bspline_values(std::size_t n_basis, std::size_t degree, double x, std::span<double> out) {
  const auto knots = open_uniform_knots(n_basis, degree);
  const std::size_t n_knots = knots.size();

  // Degree-0 indicators on half-open spans; x == 1 belongs to the last
  // non-empty span so the right boundary keeps partition of unity.
  std::vector<double> level(n_knots - 1, 0.0);
  for (std::size_t i = 0; i + 1 < n_knots; ++i) {
    const bool inside = knots[i] <= x && x < knots[i + 1];
    const bool right_edge = x >= 1.0 && knots[i] < knots[i + 1] && knots[i + 1] >= 1.0;
    level[i] = (inside || right_edge) ? 1.0 : 0.0;
  }

  // Cox-de Boor, with 0/0 := 0 for repeated knots.
  for (std::size_t k = 1; k <= degree; ++k) {
    for (std::size_t i = 0; i + k + 1 < n_knots; ++i) {
      double value = 0.0;
      const double left_span = knots[i + k] - knots[i];
      if (left_span > 0.0) value += (x - knots[i]) / left_span * level[i];
      const double right_span = knots[i + k + 1] - knots[i + 1];
      if (right_span > 0.0) value += (knots[i + k + 1] - x) / right_span * level[i + 1];
      level[i] = value;
    }
  }
  std::copy_n(level.begin(), n_basis, out.begin());
}

void rbf_values(std::size_t n_basis, double x, std::span<double> out) {
  if (n_basis == 1) {
    const double r = x - 0.5;
    out[0] = std::exp(-r * r);
    return;
  }
  const double width = 1.0 / static_cast<double>(n_basis - 1);
  for (std::size_t s = 0; s < n_basis; ++s) {
    const double r = (x - static_cast<double>(s) * width) / width;
    out[s] = std::exp(-r * r);
  }
}

}  // namespace

std::string to_string(BasisFamily family) {
  return family == BasisFamily::BSpline ? "bspline" : "rbf";
}

BasisFamily basis_family_from_string(const std::string& name) {
  if (name == "bspline") return BasisFamily::BSpline;
  if (name == "rbf") return BasisFamily::Rbf;
  throw std::invalid_argument("unknown basis family '" + name + "' (expected bspline or rbf)");
}

void BasisConfig::validate() const {
  if (n_basis < 1) throw std::invalid_argument("n_basis must be >= 1");
  if (n_grid_intervals < 1) throw std::invalid_argument("n_grid_intervals must be >= 1");
}

std::size_t BasisConfig::spline_degree() const { return std::min<std::size_t>(3, n_basis - 1); }

double fermi_activation(double x) { return x / (std::exp(-x) + 1.0); }

void basis_values(const BasisConfig& config, double x, std::span<double> out) {
  config.validate();
  if (out.size() != config.n_basis) throw std::invalid_argument("basis output size mismatch");
  x = std::clamp(x, 0.0, 1.0);
  if (config.family == BasisFamily::BSpline) {
    bspline_values(config.n_basis, config.spline_degree(), x, out);
  } else {
    rbf_values(config.n_basis, x, out);
  }
}

double basis_eval(const BasisConfig& config, std::size_t s, double x) {
  if (s >= config.n_basis) throw std::out_of_range("basis index out of range");
  std::vector<double> values(config.n_basis);
  basis_values(config, x, values);
  return values[s];
}

KanActivationParams::KanActivationParams(std::size_t n_layers, std::size_t n_qubits,
                                         std::size_t depth, BasisConfig basis)
    : n_layers_(n_layers), n_qubits_(n_qubits), depth_(depth), basis_(basis) {
  basis_.validate();
  coefficients_.assign(n_layers_ * n_qubits_ * depth_ * basis_.n_basis, 0.0);
}

KanActivationParams::KanActivationParams(std::size_t n_layers, std::size_t n_qubits,
                                         std::size_t depth, BasisConfig basis,
                                         std::vector<double> coefficients)
    : KanActivationParams(n_layers, n_qubits, depth, basis) {
  if (coefficients.size() != coefficients_.size()) {
    throw std::invalid_argument("coefficient count does not match layer/qubit/depth/basis shape");
  }
  coefficients_ = std::move(coefficients);
}

EncodedInput encode_input(const BasisConfig& config, std::span<const double> x) {
  EncodedInput enc;
  enc.n_basis = config.n_basis;
  enc.fermi.resize(x.size());
  enc.basis.resize(x.size() * config.n_basis);
  for (std::size_t i = 0; i < x.size(); ++i) {
    enc.fermi[i] = fermi_activation(x[i]);
    basis_values(config, x[i],
                 std::span<double>(enc.basis).subspan(i * config.n_basis, config.n_basis));
  }
  return enc;
}

namespace {

double acos_argument(const EncodedInput& input, std::size_t i,
                     std::span<const double> coefficients) {
  const auto row = input.basis_row(i);
  double u = input.fermi[i];
  for (std::size_t s = 0; s < input.n_basis; ++s) u += coefficients[s] * row[s];
  return u;
}

}  // namespace

double phi_from_encoded(const EncodedInput& input, std::span<const double> coefficients) {
  double phi = 0.0;
  for (std::size_t i = 0; i < input.components(); ++i) {
    const double u = std::clamp(acos_argument(input, i, coefficients), -1.0, 1.0);
    phi += 2.0 * std::acos(u);
  }
  return phi;
}

void phi_gradient_from_encoded(const EncodedInput& input, std::span<const double> coefficients,
                               std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < input.components(); ++i) {
    const double u = acos_argument(input, i, coefficients);
    if (std::abs(u) >= 1.0 - kPlateauMargin) continue;
    const double dphi_du = -2.0 / std::sqrt(1.0 - u * u);
    const auto row = input.basis_row(i);
    for (std::size_t s = 0; s < input.n_basis; ++s) out[s] += dphi_du * row[s];
  }
}

double phi_angle(const KanActivationParams& params, std::size_t layer, std::size_t qubit,
                 std::size_t d, std::span<const double> x) {
  const auto enc = encode_input(params.basis(), x);
  return phi_from_encoded(enc, params.angle_coefficients(layer, qubit, d));
}

std::vector<double> phi_gradient(const KanActivationParams& params, std::size_t layer,
                                 std::size_t qubit, std::size_t d, std::span<const double> x) {
  const auto enc = encode_input(params.basis(), x);
  std::vector<double> grad(params.basis().n_basis);
  phi_gradient_from_encoded(enc, params.angle_coefficients(layer, qubit, d), grad);
  return grad;
}

}  // namespace qkan
