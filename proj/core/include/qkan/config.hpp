#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qkan/data.hpp"
#include "qkan/training.hpp"

namespace qkan {

/// Invalid configuration: unknown key, bad value, or violated constraint.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class DataFormat { MnistIdx, Cifar10 };

struct DataConfig {
  DataFormat format = DataFormat::MnistIdx;
  std::filesystem::path images;  // IDX images, or the CIFAR-10 batch file
  std::filesystem::path labels;  // IDX labels (unused for CIFAR-10)
  std::size_t width = 16;        // resize target
  std::size_t height = 16;
  std::size_t count = 1000;      // first `count` items after label filtering
  std::optional<int> label = 0;  // keep only this label; nullopt keeps all
};

/**
 * Everything a run needs. Serialised as
 *   {"data": {...}, "generator": {...}, "train": {...}}
 * Every leaf can be overridden as "section.key" or by its bare key.
 * The defaults are the headline setup: 16x16 digit-0 MNIST, N_l = 1,
 * N_q = 8, N_g = 8, four patches, SGD at 0.1 / 0.001.
 */
struct RunConfig {
  DataConfig data{};
  TrainConfig train{};
  std::size_t trial = 0;  // grid intervals = 4 * (trial + 2)

  /// Throws ConfigError.
  void validate() const;
};

/// Leaf keys in "section.key" form, in serialisation order.
const std::vector<std::string>& config_keys();

nlohmann::ordered_json to_json(const RunConfig& config);

/// Rejects unknown keys (naming them). Missing keys keep their defaults.
/// patch_len 0 means "image pixels / patches".
RunConfig run_config_from_json(const nlohmann::json& j);

/// Reads a config file, or the "config" member of a run manifest.
RunConfig load_run_config(const std::filesystem::path& path);

/// Applies "key" -> "value" overrides (bare or dotted keys, plus the aliases
/// generator -> generator.kind and basis -> generator.basis).
void apply_overrides(RunConfig& config, const std::vector<std::pair<std::string, std::string>>& overrides);

/// Loads, filters, truncates and resizes the configured dataset.
Dataset load_dataset(const DataConfig& config);

}  // namespace qkan
