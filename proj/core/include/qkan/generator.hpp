#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qkan/activations.hpp"
#include "qkan/statevector.hpp"

namespace qkan {

/// Rotation angles come from learnable KAN activations (Vqkan) or are trained
/// directly (Qgan baseline).
enum class Ansatz { Vqkan, Qgan };

/// How a probability vector longer than a patch becomes patch_len values.
enum class PatchReadout { Truncate, Marginalize };

std::string to_string(Ansatz ansatz);
Ansatz ansatz_from_string(const std::string& name);
std::string to_string(PatchReadout readout);
PatchReadout patch_readout_from_string(const std::string& name);

struct GeneratorConfig {
  Ansatz ansatz = Ansatz::Vqkan;
  std::size_t n_qubits = 8;   // N_q, ancilla included
  std::size_t n_ancilla = 0;  // 0 or 1; the ancilla is the highest-index qubit
  std::size_t depth = 1;      // N_d
  std::size_t n_layers = 1;   // N_l (ignored by Qgan)
  std::size_t n_patches = 4;
  std::size_t patch_len = 64;
  BasisConfig basis{};
  PatchReadout readout = PatchReadout::Truncate;

  std::size_t output_qubits() const { return n_qubits - n_ancilla; }
  std::size_t image_size() const { return n_patches * patch_len; }
  std::size_t effective_layers() const { return ansatz == Ansatz::Qgan ? 1 : n_layers; }
  /// N_l N_q N_d N_g for Vqkan, N_q N_d for Qgan.
  std::size_t patch_parameter_count() const;
  std::size_t parameter_count() const { return n_patches * patch_parameter_count(); }

  /// Throws std::invalid_argument naming the violated constraint.
  void validate() const;
};

/// Latent noise z, one angle per qubit, each in [0, pi/2).
struct LatentVector {
  std::vector<double> z;
};

LatentVector sample_latent(std::size_t n_qubits, std::mt19937_64& rng);

/// Maps latent angles onto the activation domain: x = z / (pi/2).
std::vector<double> latent_to_unit(const LatentVector& z);

/// Ry(z_j) on qubit j of |0...0>.
StateVector initial_state(const LatentVector& z);

/**
 * One entangling block per depth slot: Ry(angles[d][j]) on every qubit j,
 * then CZ on (0,1), (1,2), ..., (N_q-2, N_q-1). `angles` is row-major
 * [depth][n_qubits].
 */
void apply_ansatz_blocks(StateVector& state, std::span<const double> angles);

/// Angle table phi[d][j] of one KAN layer for input x_in.
std::vector<double> kan_layer_angles(const KanActivationParams& params, std::size_t layer,
                                     std::span<const double> x_in);

void apply_kan_layer(StateVector& state, const KanActivationParams& params, std::size_t layer,
                     std::span<const double> x_in);

/// Averages of n_segments contiguous, (floor-)equal slices of probs.
std::vector<double> segment_means(const ProbVector& probs, std::size_t n_segments);

/// Full VQKAN circuit: layer 1 reads z/(pi/2); each later layer reads the
/// segment means of the exact distribution after the previous layer.
ProbVector forward_probs(const KanActivationParams& params, const LatentVector& z);

/// Baseline ansatz with direct angles theta[d][j]; length must be N_q * depth.
ProbVector qgan_forward(std::span<const double> theta, std::size_t depth, const LatentVector& z);

/// Per-iteration condition flags, OR-ed into TrainingLog records.
enum PatchFlag : std::uint32_t {
  kFlagNone = 0,
  /// Ancilla branch probability at or below kPostselectEpsilon; the raw slice was used.
  kFlagPostselectFallback = 1u << 0,
  /// Nothing survived readout; the patch is all zeros.
  kFlagEmptyPatch = 1u << 1,
};

/// Intermediate values of a patch readout, kept for differentiation.
struct ReadoutTrace {
  std::size_t slice_len = 0;   // entries surviving post-selection
  double slice_sum = 1.0;      // branch probability S
  std::vector<double> binned;  // t: post-selected, truncated/marginalised values
  double max_value = 0.0;      // m = max(t)
  std::size_t argmax = 0;
};

struct PatchOutput {
  std::vector<double> pixels;  // in [0, 1]
  std::uint32_t flags = kFlagNone;
  ReadoutTrace trace;
};

/// Post-select (ancilla = 0), truncate or marginalise to patch_len, max-scale.
PatchOutput read_out_patch(const GeneratorConfig& config, const ProbVector& probs);

/// Directional derivative of the readout: pixel changes for a probability change dprobs.
std::vector<double> readout_derivative(const GeneratorConfig& config, const PatchOutput& out,
                                       std::span<const double> dprobs);

/// State entering the final entangling layer plus that layer's angle table.
/// Every angle of the final layer enters the circuit exactly once, so exact
/// derivatives follow from +/- pi/2 shifts of `angles`.
struct LastLayerTrace {
  StateVector pre_state;
  std::vector<double> angles;  // [depth][n_qubits]
  EncodedInput input;          // Vqkan: encoded layer input; empty for Qgan
};

/// Probabilities after running `angles` as entangling blocks on a copy of `pre_state`.
ProbVector run_blocks(const StateVector& pre_state, std::span<const double> angles);

struct ImageOutput {
  std::vector<double> pixels;
  std::uint32_t flags = kFlagNone;
};

/**
 * Patch-based Born-machine generator: n_patches independent parameter sets
 * evaluated on one shared latent vector, concatenated in patch order.
 */
class PatchGenerator {
 public:
  explicit PatchGenerator(GeneratorConfig config);

  const GeneratorConfig& config() const { return config_; }
  std::size_t n_patches() const { return params_.size(); }

  std::span<double> patch_parameters(std::size_t patch) { return params_.at(patch); }
  std::span<const double> patch_parameters(std::size_t patch) const { return params_.at(patch); }
  std::size_t parameter_count() const { return config_.parameter_count(); }

  /// Pre-readout distribution of a patch for an explicit parameter set.
  ProbVector patch_probabilities(std::span<const double> params, const LatentVector& z) const;
  ProbVector patch_probabilities(std::size_t patch, const LatentVector& z) const {
    return patch_probabilities(patch_parameters(patch), z);
  }

  PatchOutput generate_patch(std::span<const double> params, const LatentVector& z) const;
  PatchOutput generate_patch(std::size_t patch, const LatentVector& z) const {
    return generate_patch(patch_parameters(patch), z);
  }

  ImageOutput generate_image(const LatentVector& z) const;

  LastLayerTrace trace_last_layer(std::span<const double> params, const LatentVector& z) const;

  /// View of a flat parameter set as activation coefficients (Vqkan only).
  KanActivationParams as_kan_params(std::span<const double> params) const;

 private:
  GeneratorConfig config_;
  std::vector<std::vector<double>> params_;
};

}  // namespace qkan
