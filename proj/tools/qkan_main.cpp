#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "qkan/config.hpp"
#include "qkan/data.hpp"
#include "qkan/experiment.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode : int { kOk = 0, kConfigFailure = 1, kDataFailure = 2, kRuntimeFailure = 3 };

using Overrides = std::vector<std::pair<std::string, std::string>>;

// Turns leftover "--key value" / "--key=value" tokens into override pairs.
Overrides parse_overrides(const std::vector<std::string>& extras) {
  Overrides out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& tok = extras[i];
    if (tok.rfind("--", 0) != 0 || tok.size() == 2) {
      throw qkan::ConfigError("unexpected argument '" + tok + "'");
    }
    std::string key = tok.substr(2);
    if (const auto eq = key.find('='); eq != std::string::npos) {
      out.emplace_back(key.substr(0, eq), key.substr(eq + 1));
      continue;
    }
    if (i + 1 >= extras.size()) throw qkan::ConfigError("missing value for '" + tok + "'");
    out.emplace_back(key, extras[++i]);
  }
  return out;
}

qkan::RunConfig resolve_config(const std::string& config_path, const std::vector<std::string>& extras) {
  qkan::RunConfig config = config_path.empty() ? qkan::RunConfig{} : qkan::load_run_config(config_path);
  qkan::apply_overrides(config, parse_overrides(extras));
  config.validate();
  return config;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    const auto dash = item.find('-');
    try {
      std::size_t used = 0;
      if (dash != std::string::npos && dash > 0) {
        const auto lo = std::stoull(item.substr(0, dash));
        const auto hi = std::stoull(item.substr(dash + 1), &used);
        if (used != item.size() - dash - 1 || hi < lo) throw std::invalid_argument(item);
        for (auto v = lo; v <= hi; ++v) out.push_back(static_cast<T>(v));
      } else {
        const auto v = std::stoull(item, &used);
        if (used != item.size()) throw std::invalid_argument(item);
        out.push_back(static_cast<T>(v));
      }
    } catch (const std::logic_error&) {
      throw qkan::ConfigError(fmt::format("bad {} list entry '{}'", what, item));
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> command(argv, argv + argc);

  CLI::App app{"Hybrid quantum-classical GAN with KAN-parameterised quantum generator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", qkan::kSoftwareVersion);

  std::string config_path;
  std::string out_dir = "run";
  auto* train = app.add_subcommand("train", "Train one configuration into a run directory");
  train->add_option("--config", config_path, "JSON config file or run manifest");
  train->add_option("--out", out_dir, "Run directory")->capture_default_str();
  train->allow_extras();
  train->footer("Any config key can be overridden with --key value, e.g. --seed 42 --depth 6 --basis rbf.");

  std::string run_dir;
  std::optional<std::uint64_t> metric_seed;
  std::string eval_images;
  std::string eval_labels;
  auto* evaluate = app.add_subcommand("evaluate", "Rescore a run's final snapshot");
  evaluate->add_option("--run", run_dir, "Run directory produced by train")->required();
  evaluate->add_option("--metric-seed", metric_seed, "Seed for the SWD projections");
  evaluate->add_option("--images", eval_images, "Alternative dataset images file");
  evaluate->add_option("--labels", eval_labels, "Alternative dataset labels file");

  std::string seeds_text;
  std::string metric = "swd";
  double alpha = 0.05;
  double divisor = 240.0;
  auto* study = app.add_subcommand("seed-study", "Train per seed and compare with Bonferroni-corrected Welch tests");
  study->add_option("--config", config_path, "JSON config file");
  study->add_option("--out", out_dir, "Study directory")->capture_default_str();
  study->add_option("--seeds", seeds_text, "Comma list or ranges (default: the 16 reference seeds)");
  study->add_option("--metric", metric, "swd, mse, kid, disc_loss or gen_loss")->capture_default_str();
  study->add_option("--alpha", alpha, "Family-wise significance level")->capture_default_str();
  study->add_option("--correction", divisor, "Bonferroni divisor")->capture_default_str();
  study->allow_extras();

  std::string depths_text = "1-8";
  auto* sweep = app.add_subcommand("sweep", "Train across circuit depths and aggregate metrics and timing");
  sweep->add_option("--config", config_path, "JSON config file");
  sweep->add_option("--out", out_dir, "Sweep directory")->capture_default_str();
  sweep->add_option("--depths", depths_text, "Comma list or ranges")->capture_default_str();
  sweep->add_option("--seeds", seeds_text, "Comma list or ranges (default: the config seed)");
  sweep->allow_extras();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigFailure;
  }

  try {
    if (*train) {
      const auto config = resolve_config(config_path, train->remaining());
      const auto result = qkan::run_training(config, out_dir, command);
      const auto series = result.log.eval_series();
      if (!series.empty()) {
        const auto& [it, e] = series.back();
        fmt::print("iteration {}: mse {:.6f} swd {:.6f} kid {:.6f}\n", it, e.mse, e.swd, e.kid);
      }
      fmt::print("wrote {}\n", fs::absolute(out_dir).string());
    } else if (*evaluate) {
      std::optional<qkan::DataConfig> data;
      if (!eval_images.empty() || !eval_labels.empty()) {
        data = qkan::load_run_config(fs::path(run_dir) / "manifest.json").data;
        if (!eval_images.empty()) data->images = eval_images;
        if (!eval_labels.empty()) data->labels = eval_labels;
      }
      const auto rec = qkan::evaluate_run(run_dir, metric_seed, data);
      fmt::print("mse {} swd {} kid {}\n", rec.mse, rec.swd, rec.kid);
    } else if (*study) {
      const auto config = resolve_config(config_path, study->remaining());
      const auto seeds = seeds_text.empty() ? qkan::default_study_seeds()
                                            : parse_list<std::uint64_t>(seeds_text, "seed");
      const auto result = qkan::run_seed_study(config, seeds, out_dir, command, metric, alpha, divisor);
      for (auto s : result.failed_seeds) fmt::print(stderr, "seed {} failed, see status.csv\n", s);
      fmt::print("wrote {}\n", fs::absolute(out_dir).string());
      if (!result.failed_seeds.empty()) return kRuntimeFailure;
    } else if (*sweep) {
      const auto config = resolve_config(config_path, sweep->remaining());
      const auto depths = parse_list<std::size_t>(depths_text, "depth");
      const auto seeds = seeds_text.empty() ? std::vector<std::uint64_t>{config.train.seed}
                                            : parse_list<std::uint64_t>(seeds_text, "seed");
      const auto rows = qkan::run_sweep(config, depths, seeds, out_dir, command);
      for (const auto& r : rows) {
        fmt::print("seed {} depth {}: swd {:.6f} kid {:.6f} {:.1f} ms\n", r.seed, r.depth,
                   r.final_metrics.swd, r.final_metrics.kid, r.total_ms);
      }
    }
  } catch (const qkan::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kConfigFailure;
  } catch (const qkan::DataError& e) {
    fmt::print(stderr, "data error: {}\n", e.what());
    return kDataFailure;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kRuntimeFailure;
  }
  return kOk;
}
