#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace qkan {

using Complex = std::complex<double>;

/// Upper bound on simulated register width; 2^24 amplitudes is 256 MiB.
inline constexpr std::size_t kMaxQubits = 24;

/// Branches whose probability falls at or below this are treated as empty.
inline constexpr double kPostselectEpsilon = 1e-24;

class PostselectionError : public std::runtime_error {
 public:
  PostselectionError(std::size_t qubit, int outcome);
};

/// Measurement distribution over computational-basis outcomes.
/// Index k has qubit q's value at bit q (little-endian).
struct ProbVector {
  std::vector<double> probs;

  std::size_t size() const { return probs.size(); }
  double operator[](std::size_t k) const { return probs[k]; }
};

/**
 * Dense state vector of an n-qubit register.
 *
 * Basis ordering is little-endian: qubit 0 is the least significant bit of
 * the amplitude index. Gates mutate the state in place.
 */
class StateVector {
 public:
  /// |0...0> on n_qubits. Throws std::invalid_argument outside [1, max_qubits].
  explicit StateVector(std::size_t n_qubits, std::size_t max_qubits = kMaxQubits);

  /// Adopts explicit amplitudes; size must be a power of two (>= 2).
  static StateVector from_amplitudes(std::vector<Complex> amplitudes);

  std::size_t n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return amplitudes_.size(); }
  std::span<const Complex> amplitudes() const { return amplitudes_; }
  std::span<Complex> amplitudes() { return amplitudes_; }

  /// Ry(theta) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]] on `qubit`.
  StateVector& apply_ry(std::size_t qubit, double theta);

  /// Negates amplitudes where both qubits are |1>.
  StateVector& apply_cz(std::size_t q1, std::size_t q2);

  double norm_squared() const;

 private:
  StateVector() = default;
  void check_qubit(std::size_t qubit) const;

  std::size_t n_qubits_ = 0;
  std::vector<Complex> amplitudes_;
};

StateVector zero_state(std::size_t n_qubits, std::size_t max_qubits = kMaxQubits);

/// Exact Born probabilities |a_k|^2.
ProbVector probabilities(const StateVector& state);

struct PostselectResult {
  StateVector state;
  double success_probability;
};

/**
 * Conditions on `qubit` reading `outcome` and removes that qubit.
 *
 * Remaining qubits keep their relative order (indices above `qubit` shift
 * down by one). Throws PostselectionError when the branch probability is
 * at most kPostselectEpsilon, and std::invalid_argument for a one-qubit
 * register, which has nothing left to return.
 */
PostselectResult postselect(const StateVector& state, std::size_t qubit, int outcome);

}  // namespace qkan
