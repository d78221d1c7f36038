#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qkan/config.hpp"
#include "qkan/metrics.hpp"
#include "qkan/training.hpp"

namespace qkan {

inline constexpr const char* kSoftwareVersion = "0.1.0";

/// Seeds of the published seed study.
const std::vector<std::uint64_t>& default_study_seeds();

/// Worker cap from QKAN_WORKERS, else hardware concurrency (at least 1).
std::size_t worker_count();

/// SHA-256 (hex) of a dataset's IDX encoding.
std::string dataset_fingerprint(const Dataset& dataset);

struct RunResult {
  std::filesystem::path dir;
  TrainingLog log;
};

/**
 * Trains one configuration into `out_dir`:
 *   manifest.json          written before training starts
 *   training_log.csv       one row per iteration (flushed even on failure)
 *   timing.csv             wall-clock per iteration
 *   images/iter-NNNNNN.pgm fixed-latent samples at each evaluation point
 *   snapshots/iter-NNNNNN.json, snapshot.json
 */
RunResult run_training(const RunConfig& config, const std::filesystem::path& out_dir,
                       const std::vector<std::string>& command,
                       const Dataset* preloaded = nullptr);

/// Regenerates the fixed-latent images from snapshot.json and rescores them
/// against the first eval_images of the dataset; writes evaluation.csv.
EvalRecord evaluate_run(const std::filesystem::path& run_dir,
                        std::optional<std::uint64_t> metric_seed = std::nullopt,
                        const std::optional<DataConfig>& data_override = std::nullopt);

struct SeedStudyResult {
  BonferroniMatrix matrix;
  std::vector<std::uint64_t> failed_seeds;
};

/// One run per seed under out_dir/seed-<s>/, then bonferroni.csv,
/// significance.csv and status.csv comparing the per-seed `metric` series
/// ("swd", "mse", "kid", "disc_loss" or "gen_loss").
SeedStudyResult run_seed_study(const RunConfig& config, const std::vector<std::uint64_t>& seeds,
                               const std::filesystem::path& out_dir,
                               const std::vector<std::string>& command,
                               const std::string& metric = "swd", double alpha = 0.05,
                               double correction_divisor = 240.0);

struct SweepRow {
  std::uint64_t seed;
  std::size_t depth;
  EvalRecord final_metrics;
  double total_ms;
};

/// One run per (seed, depth) under out_dir/depth-<d>-seed-<s>/, aggregated
/// into sweep_summary.csv (one row per run) and sweep_curves.csv.
std::vector<SweepRow> run_sweep(const RunConfig& config, const std::vector<std::size_t>& depths,
                                const std::vector<std::uint64_t>& seeds,
                                const std::filesystem::path& out_dir,
                                const std::vector<std::string>& command);

}  // namespace qkan
