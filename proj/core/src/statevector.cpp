#include "qkan/statevector.hpp"

#include <bit>
#include <cmath>
#include <string>

namespace qkan {

PostselectionError::PostselectionError(std::size_t qubit, int outcome)
    : std::runtime_error("post-selection of qubit " + std::to_string(qubit) + " on outcome " +
                         std::to_string(outcome) + " has zero probability") {}

StateVector::StateVector(std::size_t n_qubits, std::size_t max_qubits) {
  if (n_qubits < 1 || n_qubits > max_qubits) {
    throw std::invalid_argument("qubit count " + std::to_string(n_qubits) + " outside [1, " +
                                std::to_string(max_qubits) + "]");
  }
  n_qubits_ = n_qubits;
  amplitudes_.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
  amplitudes_[0] = Complex{1.0, 0.0};
}

StateVector StateVector::from_amplitudes(std::vector<Complex> amplitudes) {
  const std::size_t dim = amplitudes.size();
  if (dim < 2 || !std::has_single_bit(dim)) {
    throw std::invalid_argument("amplitude count must be a power of two >= 2");
  }
  StateVector s;
  s.n_qubits_ = static_cast<std::size_t>(std::countr_zero(dim));
  if (s.n_qubits_ > kMaxQubits) throw std::invalid_argument("too many qubits");
  s.amplitudes_ = std::move(amplitudes);
  return s;
}

void StateVector::check_qubit(std::size_t qubit) const {
  if (qubit >= n_qubits_) {
    throw std::out_of_range("qubit index " + std::to_string(qubit) + " out of range for " +
                            std::to_string(n_qubits_) + " qubits");
  }
}

StateVector& StateVector::apply_ry(std::size_t qubit, double theta) {
  check_qubit(qubit);
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  const std::size_t stride = std::size_t{1} << qubit;
  const std::size_t dim = amplitudes_.size();
  // Pairs (k, k | stride) with bit `qubit` clear in k.
  for (std::size_t block = 0; block < dim; block += 2 * stride) {
    for (std::size_t k = block; k < block + stride; ++k) {
      const Complex a0 = amplitudes_[k];
      const Complex a1 = amplitudes_[k + stride];
      amplitudes_[k] = c * a0 - s * a1;
      amplitudes_[k + stride] = s * a0 + c * a1;
    }
  }
  return *this;
}

StateVector& StateVector::apply_cz(std::size_t q1, std::size_t q2) {
  check_qubit(q1);
  check_qubit(q2);
  if (q1 == q2) throw std::invalid_argument("CZ requires two distinct qubits");
  const std::size_t mask = (std::size_t{1} << q1) | (std::size_t{1} << q2);
  for (std::size_t k = 0; k < amplitudes_.size(); ++k) {
    if ((k & mask) == mask) amplitudes_[k] = -amplitudes_[k];
  }
  return *this;
}

double StateVector::norm_squared() const {
  double total = 0.0;
  for (const auto& a : amplitudes_) total += std::norm(a);
  return total;
}

StateVector zero_state(std::size_t n_qubits, std::size_t max_qubits) {
  return StateVector(n_qubits, max_qubits);
}

ProbVector probabilities(const StateVector& state) {
  ProbVector out;
  out.probs.reserve(state.dim());
  for (const auto& a : state.amplitudes()) out.probs.push_back(std::norm(a));
  return out;
}

PostselectResult postselect(const StateVector& state, std::size_t qubit, int outcome) {
  if (qubit >= state.n_qubits()) throw std::out_of_range("post-selected qubit out of range");
  if (outcome != 0 && outcome != 1) throw std::invalid_argument("outcome must be 0 or 1");
  if (state.n_qubits() < 2) {
    throw std::invalid_argument("cannot post-select the only qubit of a register");
  }

  const std::size_t low_mask = (std::size_t{1} << qubit) - 1;
  const std::size_t half = state.dim() / 2;
  const auto amps = state.amplitudes();

  std::vector<Complex> kept(half);
  double p = 0.0;
  for (std::size_t r = 0; r < half; ++r) {
    // Re-insert the measured bit at position `qubit`.
    const std::size_t k = ((r & ~low_mask) << 1) | (static_cast<std::size_t>(outcome) << qubit) |
                          (r & low_mask);
    kept[r] = amps[k];
    p += std::norm(amps[k]);
  }
  if (!(p > kPostselectEpsilon)) throw PostselectionError(qubit, outcome);

  const double scale = 1.0 / std::sqrt(p);
  for (auto& a : kept) a *= scale;
  return {StateVector::from_amplitudes(std::move(kept)), p};
}

}  // namespace qkan
