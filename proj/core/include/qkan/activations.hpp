#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace qkan {

enum class BasisFamily { BSpline, Rbf };

std::string to_string(BasisFamily family);
BasisFamily basis_family_from_string(const std::string& name);

/// Learnable-activation basis over the fixed domain [0, 1].
struct BasisConfig {
  BasisFamily family = BasisFamily::BSpline;
  /// Trainable basis functions per angle (N_g).
  std::size_t n_basis = 8;
  /// Knot-interval count of the grid. See grid_intervals_for_trial().
  std::size_t n_grid_intervals = 8;

  /// Grid schedule: 4 * (trial + 2) intervals.
  static std::size_t grid_intervals_for_trial(std::size_t trial) { return 4 * (trial + 2); }

  void validate() const;
  /// Spline degree actually used: cubic, lowered when n_basis < 4 so the
  /// open knot vector still exists.
  std::size_t spline_degree() const;

  bool operator==(const BasisConfig&) const = default;
};

/// x / (exp(-x) + 1).
double fermi_activation(double x);

/// Writes B_0(x) .. B_{n_basis-1}(x) into `out` (size n_basis). x is clamped to [0, 1].
void basis_values(const BasisConfig& config, double x, std::span<double> out);

/// Single basis function s at x. Throws std::out_of_range for s >= n_basis.
double basis_eval(const BasisConfig& config, std::size_t s, double x);

/// Trainable coefficients c[n][j][d][s] of one angle-function family, zero-initialised.
class KanActivationParams {
 public:
  KanActivationParams(std::size_t n_layers, std::size_t n_qubits, std::size_t depth,
                      BasisConfig basis);
  /// Adopts existing coefficients; size must equal n_layers * n_qubits * depth * n_basis.
  KanActivationParams(std::size_t n_layers, std::size_t n_qubits, std::size_t depth,
                      BasisConfig basis, std::vector<double> coefficients);

  std::size_t n_layers() const { return n_layers_; }
  std::size_t n_qubits() const { return n_qubits_; }
  std::size_t depth() const { return depth_; }
  const BasisConfig& basis() const { return basis_; }

  std::size_t size() const { return coefficients_.size(); }
  std::size_t index(std::size_t layer, std::size_t qubit, std::size_t d, std::size_t s) const {
    return ((layer * n_qubits_ + qubit) * depth_ + d) * basis_.n_basis + s;
  }

  std::span<double> coefficients() { return coefficients_; }
  std::span<const double> coefficients() const { return coefficients_; }

  /// The N_g coefficients feeding angle (layer, qubit, d).
  std::span<const double> angle_coefficients(std::size_t layer, std::size_t qubit,
                                             std::size_t d) const {
    return std::span<const double>(coefficients_).subspan(index(layer, qubit, d, 0),
                                                          basis_.n_basis);
  }

 private:
  std::size_t n_layers_;
  std::size_t n_qubits_;
  std::size_t depth_;
  BasisConfig basis_;
  std::vector<double> coefficients_;
};

/// Input vector pre-evaluated through E_f and the basis, reusable across every
/// angle of a layer.
struct EncodedInput {
  std::size_t n_basis = 0;
  std::vector<double> fermi;  // E_f(x_i)
  std::vector<double> basis;  // B_s(x_i), row-major [i][s]

  std::size_t components() const { return fermi.size(); }
  std::span<const double> basis_row(std::size_t i) const {
    return std::span<const double>(basis).subspan(i * n_basis, n_basis);
  }
};

EncodedInput encode_input(const BasisConfig& config, std::span<const double> x);

/// phi = sum_i 2 acos(clamp(E_f(x_i) + sum_s c_s B_s(x_i), -1, 1)).
double phi_from_encoded(const EncodedInput& input, std::span<const double> coefficients);

/// d phi / d c_s, zero for components sitting on the clamp plateau.
void phi_gradient_from_encoded(const EncodedInput& input, std::span<const double> coefficients,
                               std::span<double> out);

double phi_angle(const KanActivationParams& params, std::size_t layer, std::size_t qubit,
                 std::size_t d, std::span<const double> x);

std::vector<double> phi_gradient(const KanActivationParams& params, std::size_t layer,
                                 std::size_t qubit, std::size_t d, std::span<const double> x);

}  // namespace qkan
