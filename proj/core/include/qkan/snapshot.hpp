#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "qkan/generator.hpp"
#include "qkan/training.hpp"

namespace qkan {

nlohmann::ordered_json to_json(const GeneratorConfig& config);
GeneratorConfig generator_config_from_json(const nlohmann::json& j);

/// Parameters of a run at one iteration: generator config header, one
/// coefficient array per patch, and the discriminator's flat buffer.
struct Snapshot {
  std::size_t iteration = 0;
  GeneratorConfig generator{};
  std::vector<std::vector<double>> patches;
  std::size_t disc_inputs = 0;
  std::vector<double> disc_parameters;
};

Snapshot take_snapshot(const Trainer& trainer);

/// Same input gives the same bytes: fixed key order, shortest round-trip doubles.
nlohmann::ordered_json to_json(const Snapshot& snapshot);
Snapshot snapshot_from_json(const nlohmann::json& j);

PatchGenerator restore_generator(const Snapshot& snapshot);

}  // namespace qkan
