#include "qkan/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qkan {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

std::string str(std::size_t v) { return std::to_string(v); }

}  // namespace

std::string to_string(Ansatz ansatz) { return ansatz == Ansatz::Vqkan ? "vqkan" : "qgan"; }

Ansatz ansatz_from_string(const std::string& name) {
  if (name == "vqkan") return Ansatz::Vqkan;
  if (name == "qgan") return Ansatz::Qgan;
  throw std::invalid_argument("unknown generator '" + name + "' (expected vqkan or qgan)");
}

std::string to_string(PatchReadout readout) {
  return readout == PatchReadout::Truncate ? "truncate" : "marginalize";
}

PatchReadout patch_readout_from_string(const std::string& name) {
  if (name == "truncate") return PatchReadout::Truncate;
  if (name == "marginalize") return PatchReadout::Marginalize;
  throw std::invalid_argument("unknown readout '" + name + "' (expected truncate or marginalize)");
}

std::size_t GeneratorConfig::patch_parameter_count() const {
  if (ansatz == Ansatz::Qgan) return n_qubits * depth;
  return n_layers * n_qubits * depth * basis.n_basis;
}

void GeneratorConfig::validate() const {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw std::invalid_argument("n_qubits must be in [1, " + str(kMaxQubits) + "]");
  }
  if (n_ancilla > 1) throw std::invalid_argument("n_ancilla must be 0 or 1");
  if (n_ancilla >= n_qubits) throw std::invalid_argument("n_ancilla must leave an output qubit");
  if (n_layers < 1) throw std::invalid_argument("n_layers must be >= 1");
  if (n_patches < 1) throw std::invalid_argument("n_patches must be >= 1");
  const std::size_t available = std::size_t{1} << output_qubits();
  if (patch_len < 1 || patch_len > available) {
    throw std::invalid_argument("patch_len must be in [1, 2^(n_qubits - n_ancilla)] = [1, " +
                                str(available) + "]");
  }
  if (readout == PatchReadout::Marginalize && available % patch_len != 0) {
    throw std::invalid_argument("marginalize readout needs patch_len dividing " + str(available));
  }
  basis.validate();
}

LatentVector sample_latent(std::size_t n_qubits, std::mt19937_64& rng) {
  LatentVector out;
  out.z.reserve(n_qubits);
  for (std::size_t j = 0; j < n_qubits; ++j) {
    // 53 random mantissa bits: uniform on [0, 1), identical on every platform.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    out.z.push_back(u * kHalfPi);
  }
  return out;
}

std::vector<double> latent_to_unit(const LatentVector& z) {
  std::vector<double> x(z.z.size());
  std::transform(z.z.begin(), z.z.end(), x.begin(), [](double v) { return v / kHalfPi; });
  return x;
}

StateVector initial_state(const LatentVector& z) {
  StateVector state(z.z.size());
  for (std::size_t j = 0; j < z.z.size(); ++j) state.apply_ry(j, z.z[j]);
  return state;
}

void apply_ansatz_blocks(StateVector& state, std::span<const double> angles) {
  const std::size_t n = state.n_qubits();
  if (angles.size() % n != 0) throw std::invalid_argument("angle table is not [depth][n_qubits]");
  const std::size_t depth = angles.size() / n;
  for (std::size_t d = 0; d < depth; ++d) {
    for (std::size_t j = 0; j < n; ++j) state.apply_ry(j, angles[d * n + j]);
    for (std::size_t j = 0; j + 1 < n; ++j) state.apply_cz(j, j + 1);
  }
}

namespace {

std::vector<double> layer_angles(const BasisConfig& basis, std::span<const double> coefficients,
                                 std::size_t n_qubits, std::size_t depth, std::size_t layer,
                                 const EncodedInput& input) {
  const std::size_t n_basis = basis.n_basis;
  std::vector<double> angles(depth * n_qubits);
  for (std::size_t d = 0; d < depth; ++d) {
    for (std::size_t j = 0; j < n_qubits; ++j) {
      const std::size_t offset = ((layer * n_qubits + j) * depth + d) * n_basis;
      angles[d * n_qubits + j] = phi_from_encoded(input, coefficients.subspan(offset, n_basis));
    }
  }
  return angles;
}

StateVector vqkan_state(const BasisConfig& basis, std::span<const double> coefficients,
                        std::size_t n_layers, std::size_t depth, const LatentVector& z) {
  const std::size_t n_qubits = z.z.size();
  StateVector state = initial_state(z);
  std::vector<double> x_in = latent_to_unit(z);
  for (std::size_t layer = 0; layer < n_layers; ++layer) {
    if (layer > 0) x_in = segment_means(probabilities(state), n_qubits);
    const auto input = encode_input(basis, x_in);
    apply_ansatz_blocks(state, layer_angles(basis, coefficients, n_qubits, depth, layer, input));
  }
  return state;
}

}  // namespace

std::vector<double> kan_layer_angles(const KanActivationParams& params, std::size_t layer,
                                     std::span<const double> x_in) {
  if (layer >= params.n_layers()) throw std::out_of_range("layer index out of range");
  const auto input = encode_input(params.basis(), x_in);
  return layer_angles(params.basis(), params.coefficients(), params.n_qubits(), params.depth(),
                      layer, input);
}

void apply_kan_layer(StateVector& state, const KanActivationParams& params, std::size_t layer,
                     std::span<const double> x_in) {
  if (state.n_qubits() != params.n_qubits()) {
    throw std::invalid_argument("state and activation parameters disagree on qubit count");
  }
  apply_ansatz_blocks(state, kan_layer_angles(params, layer, x_in));
}

std::vector<double> segment_means(const ProbVector& probs, std::size_t n_segments) {
  if (n_segments == 0 || n_segments > probs.size()) {
    throw std::invalid_argument("segment count must be in [1, distribution length]");
  }
  const std::size_t len = probs.size();
  std::vector<double> means(n_segments);
  for (std::size_t k = 0; k < n_segments; ++k) {
    const std::size_t begin = k * len / n_segments;
    const std::size_t end = (k + 1) * len / n_segments;
    double total = 0.0;
    for (std::size_t i = begin; i < end; ++i) total += probs[i];
    means[k] = total / static_cast<double>(end - begin);
  }
  return means;
}

ProbVector forward_probs(const KanActivationParams& params, const LatentVector& z) {
  if (z.z.size() != params.n_qubits()) {
    throw std::invalid_argument("latent vector length must equal n_qubits");
  }
  return probabilities(
      vqkan_state(params.basis(), params.coefficients(), params.n_layers(), params.depth(), z));
}

ProbVector qgan_forward(std::span<const double> theta, std::size_t depth, const LatentVector& z) {
  if (theta.size() != z.z.size() * depth) {
    throw std::invalid_argument("theta length " + str(theta.size()) + " != n_qubits * depth = " +
                                str(z.z.size() * depth));
  }
  StateVector state = initial_state(z);
  apply_ansatz_blocks(state, theta);
  return probabilities(state);
}

PatchOutput read_out_patch(const GeneratorConfig& config, const ProbVector& probs) {
  PatchOutput out;
  ReadoutTrace& tr = out.trace;
  // Ancilla is the most significant qubit, so its |0> branch is the lower half.
  tr.slice_len = probs.size() >> config.n_ancilla;
  tr.slice_sum = 0.0;
  for (std::size_t k = 0; k < tr.slice_len; ++k) tr.slice_sum += probs[k];

  out.pixels.assign(config.patch_len, 0.0);
  if (config.n_ancilla > 0 && !(tr.slice_sum > kPostselectEpsilon)) {
    out.flags |= kFlagPostselectFallback;
  }
  if (!(tr.slice_sum > 0.0)) {
    out.flags |= kFlagEmptyPatch;
    tr.binned.assign(config.patch_len, 0.0);
    return out;
  }

  tr.binned.assign(config.patch_len, 0.0);
  if (config.readout == PatchReadout::Truncate) {
    for (std::size_t k = 0; k < config.patch_len; ++k) tr.binned[k] = probs[k] / tr.slice_sum;
  } else {
    const std::size_t width = tr.slice_len / config.patch_len;
    for (std::size_t k = 0; k < tr.slice_len; ++k) tr.binned[k / width] += probs[k];
    for (auto& v : tr.binned) v /= tr.slice_sum;
  }

  const auto it = std::max_element(tr.binned.begin(), tr.binned.end());
  tr.argmax = static_cast<std::size_t>(it - tr.binned.begin());
  tr.max_value = *it;
  if (!(tr.max_value > 0.0)) {
    out.flags |= kFlagEmptyPatch;
    return out;
  }
  for (std::size_t k = 0; k < config.patch_len; ++k) {
    out.pixels[k] = tr.binned[k] / tr.max_value;
  }
  return out;
}

std::vector<double> readout_derivative(const GeneratorConfig& config, const PatchOutput& out,
                                       std::span<const double> dprobs) {
  const ReadoutTrace& tr = out.trace;
  std::vector<double> dpix(config.patch_len, 0.0);
  if (out.flags & kFlagEmptyPatch) return dpix;

  double dsum = 0.0;
  for (std::size_t k = 0; k < tr.slice_len; ++k) dsum += dprobs[k];

  // t = R(P_slice) / S, with R linear (truncate or bin).
  std::vector<double> dbinned(config.patch_len, 0.0);
  if (config.readout == PatchReadout::Truncate) {
    for (std::size_t k = 0; k < config.patch_len; ++k) dbinned[k] = dprobs[k];
  } else {
    const std::size_t width = tr.slice_len / config.patch_len;
    for (std::size_t k = 0; k < tr.slice_len; ++k) dbinned[k / width] += dprobs[k];
  }
  for (std::size_t k = 0; k < config.patch_len; ++k) {
    dbinned[k] = (dbinned[k] - tr.binned[k] * dsum) / tr.slice_sum;
  }

  // pixel = t / max(t); the max follows its (first) argmax.
  const double m = tr.max_value;
  const double dm = dbinned[tr.argmax];
  for (std::size_t k = 0; k < config.patch_len; ++k) {
    dpix[k] = dbinned[k] / m - tr.binned[k] * dm / (m * m);
  }
  return dpix;
}

PatchGenerator::PatchGenerator(GeneratorConfig config) : config_(std::move(config)) {
  config_.validate();
  params_.assign(config_.n_patches, std::vector<double>(config_.patch_parameter_count(), 0.0));
}

ProbVector PatchGenerator::patch_probabilities(std::span<const double> params,
                                               const LatentVector& z) const {
  if (params.size() != config_.patch_parameter_count()) {
    throw std::invalid_argument("patch parameter count mismatch");
  }
  if (z.z.size() != config_.n_qubits) {
    throw std::invalid_argument("latent vector length must equal n_qubits");
  }
  if (config_.ansatz == Ansatz::Qgan) return qgan_forward(params, config_.depth, z);
  return probabilities(vqkan_state(config_.basis, params, config_.n_layers, config_.depth, z));
}

PatchOutput PatchGenerator::generate_patch(std::span<const double> params,
                                           const LatentVector& z) const {
  return read_out_patch(config_, patch_probabilities(params, z));
}

ImageOutput PatchGenerator::generate_image(const LatentVector& z) const {
  ImageOutput image;
  image.pixels.reserve(config_.image_size());
  for (std::size_t p = 0; p < params_.size(); ++p) {
    auto patch = generate_patch(p, z);
    image.flags |= patch.flags;
    image.pixels.insert(image.pixels.end(), patch.pixels.begin(), patch.pixels.end());
  }
  return image;
}

ProbVector run_blocks(const StateVector& pre_state, std::span<const double> angles) {
  StateVector state = pre_state;
  apply_ansatz_blocks(state, angles);
  return probabilities(state);
}

LastLayerTrace PatchGenerator::trace_last_layer(std::span<const double> params,
                                                const LatentVector& z) const {
  if (params.size() != config_.patch_parameter_count()) {
    throw std::invalid_argument("patch parameter count mismatch");
  }
  if (config_.ansatz == Ansatz::Qgan) {
    return {initial_state(z), std::vector<double>(params.begin(), params.end()), {}};
  }
  const std::size_t last = config_.n_layers - 1;
  StateVector pre = last == 0 ? initial_state(z)
                              : vqkan_state(config_.basis, params, last, config_.depth, z);
  std::vector<double> x_in = last == 0 ? latent_to_unit(z)
                                       : segment_means(probabilities(pre), config_.n_qubits);
  auto input = encode_input(config_.basis, x_in);
  auto angles = layer_angles(config_.basis, params, config_.n_qubits, config_.depth, last, input);
  return {std::move(pre), std::move(angles), std::move(input)};
}

KanActivationParams PatchGenerator::as_kan_params(std::span<const double> params) const {
  if (config_.ansatz != Ansatz::Vqkan) {
    throw std::logic_error("activation coefficients exist only for the vqkan ansatz");
  }
  return KanActivationParams(config_.n_layers, config_.n_qubits, config_.depth, config_.basis,
                             std::vector<double>(params.begin(), params.end()));
}

}  // namespace qkan
