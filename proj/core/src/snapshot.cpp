#include "qkan/snapshot.hpp"

#include <stdexcept>

namespace qkan {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json to_json(const GeneratorConfig& c) {
  return {{"kind", to_string(c.ansatz)},
          {"qubits", c.n_qubits},
          {"ancilla", c.n_ancilla},
          {"depth", c.depth},
          {"layers", c.n_layers},
          {"patches", c.n_patches},
          {"patch_len", c.patch_len},
          {"basis", to_string(c.basis.family)},
          {"n_basis", c.basis.n_basis},
          {"grid_intervals", c.basis.n_grid_intervals},
          {"readout", to_string(c.readout)}};
}

GeneratorConfig generator_config_from_json(const json& j) {
  GeneratorConfig c;
  c.ansatz = ansatz_from_string(j.at("kind").get<std::string>());
  c.n_qubits = j.at("qubits").get<std::size_t>();
  c.n_ancilla = j.at("ancilla").get<std::size_t>();
  c.depth = j.at("depth").get<std::size_t>();
  c.n_layers = j.at("layers").get<std::size_t>();
  c.n_patches = j.at("patches").get<std::size_t>();
  c.patch_len = j.at("patch_len").get<std::size_t>();
  c.basis.family = basis_family_from_string(j.at("basis").get<std::string>());
  c.basis.n_basis = j.at("n_basis").get<std::size_t>();
  c.basis.n_grid_intervals = j.at("grid_intervals").get<std::size_t>();
  c.readout = patch_readout_from_string(j.at("readout").get<std::string>());
  c.validate();
  return c;
}

Snapshot take_snapshot(const Trainer& trainer) {
  Snapshot s;
  s.iteration = trainer.iteration();
  const auto& gen = trainer.generator();
  s.generator = gen.config();
  for (std::size_t p = 0; p < gen.n_patches(); ++p) {
    const auto params = gen.patch_parameters(p);
    s.patches.emplace_back(params.begin(), params.end());
  }
  s.disc_inputs = trainer.discriminator().input_size();
  const auto dp = trainer.discriminator().parameters();
  s.disc_parameters.assign(dp.begin(), dp.end());
  return s;
}

ordered_json to_json(const Snapshot& s) {
  ordered_json j;
  j["format"] = "qkan-snapshot/1";
  j["iteration"] = s.iteration;
  j["generator"] = {{"config", to_json(s.generator)}, {"patches", s.patches}};
  j["discriminator"] = {{"inputs", s.disc_inputs}, {"parameters", s.disc_parameters}};
  return j;
}

Snapshot snapshot_from_json(const json& j) {
  if (j.value("format", std::string{}) != "qkan-snapshot/1") {
    throw std::invalid_argument("not a qkan-snapshot/1 document");
  }
  Snapshot s;
  s.iteration = j.at("iteration").get<std::size_t>();
  s.generator = generator_config_from_json(j.at("generator").at("config"));
  s.patches = j.at("generator").at("patches").get<std::vector<std::vector<double>>>();
  s.disc_inputs = j.at("discriminator").at("inputs").get<std::size_t>();
  s.disc_parameters = j.at("discriminator").at("parameters").get<std::vector<double>>();
  if (s.patches.size() != s.generator.n_patches) {
    throw std::invalid_argument("snapshot patch count disagrees with its config");
  }
  for (const auto& p : s.patches) {
    if (p.size() != s.generator.patch_parameter_count()) {
      throw std::invalid_argument("snapshot patch parameter count disagrees with its config");
    }
  }
  return s;
}

PatchGenerator restore_generator(const Snapshot& s) {
  PatchGenerator gen(s.generator);
  for (std::size_t p = 0; p < s.patches.size(); ++p) {
    auto dst = gen.patch_parameters(p);
    std::copy(s.patches[p].begin(), s.patches[p].end(), dst.begin());
  }
  return gen;
}

}  // namespace qkan
