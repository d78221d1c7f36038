#include "qkan/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace qkan {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string data_format_name(DataFormat f) { return f == DataFormat::MnistIdx ? "mnist-idx" : "cifar10"; }

DataFormat data_format_from_string(const std::string& s) {
  if (s == "mnist-idx" || s == "mnist") return DataFormat::MnistIdx;
  if (s == "cifar10") return DataFormat::Cifar10;
  throw ConfigError("unknown data.format '" + s + "' (expected mnist-idx or cifar10)");
}

template <typename T>
T get_as(const json& value, const std::string& key) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

std::size_t get_count(const json& value, const std::string& key) {
  if (!value.is_number_integer() || value.get<long long>() < 0) {
    throw ConfigError("config key '" + key + "' must be a non-negative integer");
  }
  return value.get<std::size_t>();
}

template <typename Parse>
auto parse_enum(const json& value, const std::string& key, Parse parse) {
  const auto name = get_as<std::string>(value, key);
  try {
    return parse(name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

// Single choke point for assigning one leaf from JSON.
void set_leaf(RunConfig& c, const std::string& key, const json& v) {
  auto& g = c.train.generator;
  auto& t = c.train;
  auto& d = c.data;
  if (key == "data.format") d.format = data_format_from_string(get_as<std::string>(v, key));
  else if (key == "data.images") d.images = get_as<std::string>(v, key);
  else if (key == "data.labels") d.labels = get_as<std::string>(v, key);
  else if (key == "data.width") d.width = get_count(v, key);
  else if (key == "data.height") d.height = get_count(v, key);
  else if (key == "data.count") d.count = get_count(v, key);
  else if (key == "data.label") {
    if (v.is_null()) {
      d.label.reset();
    } else {
      const int label = get_as<int>(v, key);
      if (label < 0) d.label.reset(); else d.label = label;
    }
  }
  else if (key == "generator.kind") g.ansatz = parse_enum(v, key, ansatz_from_string);
  else if (key == "generator.qubits") g.n_qubits = get_count(v, key);
  else if (key == "generator.ancilla") g.n_ancilla = get_count(v, key);
  else if (key == "generator.depth") g.depth = get_count(v, key);
  else if (key == "generator.layers") g.n_layers = get_count(v, key);
  else if (key == "generator.patches") g.n_patches = get_count(v, key);
  else if (key == "generator.patch_len") g.patch_len = get_count(v, key);
  else if (key == "generator.basis") g.basis.family = parse_enum(v, key, basis_family_from_string);
  else if (key == "generator.n_basis") g.basis.n_basis = get_count(v, key);
  else if (key == "generator.trial") c.trial = get_count(v, key);
  else if (key == "generator.readout") g.readout = parse_enum(v, key, patch_readout_from_string);
  else if (key == "train.iterations") t.iterations = get_count(v, key);
  else if (key == "train.lr_disc") t.lr_disc = get_as<double>(v, key);
  else if (key == "train.lr_gen") t.lr_gen = get_as<double>(v, key);
  else if (key == "train.optimizer") t.optimizer = parse_enum(v, key, optimizer_from_string);
  else if (key == "train.seed") t.seed = get_as<std::uint64_t>(v, key);
  else if (key == "train.gradient_mode") t.gradient_mode = parse_enum(v, key, gradient_mode_from_string);
  else if (key == "train.fd_step") t.fd_step = get_as<double>(v, key);
  else if (key == "train.eval_every") t.eval_every = get_count(v, key);
  else if (key == "train.eval_images") t.eval_images = get_count(v, key);
  else if (key == "train.swd_projections") t.swd_projections = get_count(v, key);
  else if (key == "train.metric_seed") t.metric_seed = get_as<std::uint64_t>(v, key);
  else if (key == "train.shuffle") t.shuffle = get_as<bool>(v, key);
  else throw ConfigError("unknown config key '" + key + "'");
}

void finalize(RunConfig& c) {
  c.train.generator.basis.n_grid_intervals = BasisConfig::grid_intervals_for_trial(c.trial);
  if (c.train.generator.patch_len == 0 && c.train.generator.n_patches > 0) {
    c.train.generator.patch_len = c.data.width * c.data.height / c.train.generator.n_patches;
  }
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "data.format",        "data.images",        "data.labels",        "data.width",
      "data.height",        "data.count",         "data.label",         "generator.kind",
      "generator.qubits",   "generator.ancilla",  "generator.depth",    "generator.layers",
      "generator.patches",  "generator.patch_len", "generator.basis",   "generator.n_basis",
      "generator.trial",    "generator.readout",  "train.iterations",   "train.lr_disc",
      "train.lr_gen",       "train.optimizer",    "train.seed",         "train.gradient_mode",
      "train.fd_step",      "train.eval_every",   "train.eval_images",  "train.swd_projections",
      "train.metric_seed",  "train.shuffle"};
  return keys;
}

void RunConfig::validate() const {
  try {
    train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (data.width == 0 || data.height == 0) throw ConfigError("data.width and data.height must be > 0");
  if (train.generator.image_size() != data.width * data.height) {
    throw ConfigError("generator.patches * generator.patch_len (" +
                      std::to_string(train.generator.image_size()) + ") must equal data.width * data.height (" +
                      std::to_string(data.width * data.height) + ")");
  }
  if (data.count < train.eval_images) throw ConfigError("data.count must be >= train.eval_images");
  if (data.images.empty()) throw ConfigError("data.images is required");
  if (data.format == DataFormat::MnistIdx && data.labels.empty()) {
    throw ConfigError("data.labels is required for mnist-idx");
  }
}

ordered_json to_json(const RunConfig& c) {
  const auto& g = c.train.generator;
  const auto& t = c.train;
  const auto& d = c.data;
  ordered_json j;
  j["data"] = {{"format", data_format_name(d.format)},
               {"images", d.images.string()},
               {"labels", d.labels.string()},
               {"width", d.width},
               {"height", d.height},
               {"count", d.count},
               {"label", d.label ? *d.label : -1}};
  j["generator"] = {{"kind", to_string(g.ansatz)},
                    {"qubits", g.n_qubits},
                    {"ancilla", g.n_ancilla},
                    {"depth", g.depth},
                    {"layers", g.n_layers},
                    {"patches", g.n_patches},
                    {"patch_len", g.patch_len},
                    {"basis", to_string(g.basis.family)},
                    {"n_basis", g.basis.n_basis},
                    {"trial", c.trial},
                    {"readout", to_string(g.readout)}};
  j["train"] = {{"iterations", t.iterations},
                {"lr_disc", t.lr_disc},
                {"lr_gen", t.lr_gen},
                {"optimizer", to_string(t.optimizer)},
                {"seed", t.seed},
                {"gradient_mode", to_string(t.gradient_mode)},
                {"fd_step", t.fd_step},
                {"eval_every", t.eval_every},
                {"eval_images", t.eval_images},
                {"swd_projections", t.swd_projections},
                {"metric_seed", t.metric_seed},
                {"shuffle", t.shuffle}};
  return j;
}

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config root must be an object");
  RunConfig c;
  c.train.generator.patch_len = 0;
  for (const auto& [section, body] : j.items()) {
    if (section != "data" && section != "generator" && section != "train") {
      throw ConfigError("unknown config key '" + section + "'");
    }
    if (!body.is_object()) throw ConfigError("config section '" + section + "' must be an object");
    for (const auto& [leaf, value] : body.items()) set_leaf(c, section + "." + leaf, value);
  }
  finalize(c);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  if (j.is_object() && j.contains("manifest_version")) {
    if (!j.contains("config")) throw ConfigError("manifest has no 'config' member");
    j = j.at("config");
  }
  RunConfig c = run_config_from_json(j);
  // Relative data paths are relative to the config file.
  const auto base = path.parent_path();
  for (auto* p : {&c.data.images, &c.data.labels}) {
    if (!p->empty() && p->is_relative()) *p = (base / *p).lexically_normal();
  }
  return c;
}

void apply_overrides(RunConfig& config,
                     const std::vector<std::pair<std::string, std::string>>& overrides) {
  const auto& keys = config_keys();
  auto resolve = [&](std::string key) {
    if (key == "generator") return std::string("generator.kind");
    if (std::find(keys.begin(), keys.end(), key) != keys.end()) return key;
    std::vector<std::string> hits;
    for (const auto& k : keys) {
      if (k.substr(k.find('.') + 1) == key) hits.push_back(k);
    }
    if (hits.size() == 1) return hits.front();
    if (hits.empty()) throw ConfigError("unknown config key '" + key + "'");
    throw ConfigError("ambiguous config key '" + key + "'");
  };

  const bool patch_len_given = std::any_of(overrides.begin(), overrides.end(), [&](const auto& kv) {
    return resolve(kv.first) == "generator.patch_len";
  });
  const bool geometry_changed = std::any_of(overrides.begin(), overrides.end(), [&](const auto& kv) {
    const auto k = resolve(kv.first);
    return k == "data.width" || k == "data.height" || k == "generator.patches";
  });

  for (const auto& [raw_key, raw_value] : overrides) {
    const std::string key = resolve(raw_key);
    // Values are JSON literals when they parse as such, strings otherwise.
    json value = json::parse(raw_value, nullptr, false);
    if (value.is_discarded() || value.is_object() || value.is_array()) value = raw_value;
    if (key == "data.images" || key == "data.labels" || key == "train.optimizer" ||
        key == "generator.kind" || key == "generator.basis" || key == "generator.readout" ||
        key == "train.gradient_mode" || key == "data.format") {
      value = raw_value;
    }
    set_leaf(config, key, value);
  }
  if (geometry_changed && !patch_len_given) config.train.generator.patch_len = 0;
  finalize(config);
}

Dataset load_dataset(const DataConfig& config) {
  Dataset raw = config.format == DataFormat::MnistIdx ? load_mnist_idx(config.images, config.labels)
                                                      : load_cifar10_gray(config.images);
  Dataset picked = take_prefix(raw, config.count, config.label);
  return resize_dataset(picked, config.width, config.height);
}

}  // namespace qkan
