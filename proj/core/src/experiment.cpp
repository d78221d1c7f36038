#include "qkan/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "qkan/snapshot.hpp"

namespace qkan {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunConfig with_absolute_paths(RunConfig c) {
  if (!c.data.images.empty()) c.data.images = fs::absolute(c.data.images).lexically_normal();
  if (!c.data.labels.empty()) c.data.labels = fs::absolute(c.data.labels).lexically_normal();
  return c;
}

std::string iteration_tag(std::size_t iteration) { return fmt::format("iter-{:06d}", iteration); }

// Runs jobs[0..n) on up to worker_count() threads; job i writes only slot i.
template <typename Job>
void run_parallel(std::size_t n, Job job) {
  const std::size_t workers = std::min(worker_count(), n);
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t i = next++; i < n; i = next++) job(i);
  };
  std::vector<std::jthread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(loop);
  loop();
}

}  // namespace

const std::vector<std::uint64_t>& default_study_seeds() {
  static const std::vector<std::uint64_t> seeds = {42,    2,     10,     13,    0,     3407,
                                                   7120,  10000, 11111,  16384, 17171, 130000,
                                                   14480, 11668, 500001, 620000};
  return seeds;
}

std::size_t worker_count() {
  if (const char* env = std::getenv("QKAN_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

std::string dataset_fingerprint(const Dataset& dataset) {
  const auto images = encode_idx_images(dataset);
  const auto labels = encode_idx_labels(dataset);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx, images.data(), images.size());
  EVP_DigestUpdate(ctx, labels.data(), labels.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

RunResult run_training(const RunConfig& config_in, const fs::path& out_dir,
                       const std::vector<std::string>& command, const Dataset* preloaded) {
  const RunConfig config = with_absolute_paths(config_in);
  config.validate();
  const Dataset dataset = preloaded ? *preloaded : load_dataset(config.data);

  fs::create_directories(out_dir / "images");
  fs::create_directories(out_dir / "snapshots");

  ordered_json manifest;
  manifest["manifest_version"] = 1;
  manifest["command"] = command;
  manifest["config"] = to_json(config);
  manifest["seeds"] = {config.train.seed};
  manifest["dataset_sha256"] = dataset_fingerprint(dataset);
  manifest["dataset_items"] = dataset.size();
  manifest["software_version"] = kSoftwareVersion;
  manifest["started_at"] = utc_timestamp();
  manifest["notes"] = "KID uses a cubic polynomial kernel on raw pixels, not Inception features.";
  write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");

  RunResult result{out_dir, {}};
  const std::size_t width = config.data.width;
  const std::size_t height = config.data.height;
  auto observer = [&](std::size_t iteration, const Trainer& trainer, const ImageSet& generated) {
    const auto tag = iteration_tag(iteration);
    write_text(out_dir / "images" / (tag + ".pgm"), encode_pgm_strip(generated, width, height));
    write_text(out_dir / "snapshots" / (tag + ".json"), to_json(take_snapshot(trainer)).dump(1) + "\n");
  };

  try {
    const Trainer trainer = train(config.train, dataset, result.log, observer);
    write_text(out_dir / "snapshot.json", to_json(take_snapshot(trainer)).dump(1) + "\n");
  } catch (...) {
    write_text(out_dir / "training_log.csv", result.log.to_csv());
    write_text(out_dir / "timing.csv", result.log.timing_csv());
    throw;
  }
  write_text(out_dir / "training_log.csv", result.log.to_csv());
  write_text(out_dir / "timing.csv", result.log.timing_csv());
  return result;
}

EvalRecord evaluate_run(const fs::path& run_dir, std::optional<std::uint64_t> metric_seed,
                        const std::optional<DataConfig>& data_override) {
  if (!fs::is_directory(run_dir)) {
    throw std::runtime_error("run directory " + run_dir.string() + " does not exist");
  }
  const auto snapshot_path = run_dir / "snapshot.json";
  if (!fs::exists(snapshot_path)) {
    throw std::runtime_error("run directory has no snapshot.json: " + run_dir.string());
  }
  RunConfig config = load_run_config(run_dir / "manifest.json");
  if (data_override) config.data = *data_override;

  std::ifstream in(snapshot_path);
  const Snapshot snapshot = snapshot_from_json(json::parse(in));
  const PatchGenerator gen = restore_generator(snapshot);

  const Dataset dataset = load_dataset(config.data);
  if (dataset.pixels() != gen.config().image_size()) {
    throw ConfigError("evaluation dataset image size does not match the generator");
  }
  const auto& t = config.train;
  const ImageSet reals(dataset.images.begin(),
                       dataset.images.begin() + static_cast<long>(t.eval_images));
  const auto latents = eval_latents(t.seed, gen.config().n_qubits, t.eval_images);
  const EvalRecord rec = evaluate_generator(gen, latents, reals, t.swd_projections,
                                            metric_seed.value_or(t.metric_seed));

  write_text(run_dir / "evaluation.csv",
             fmt::format("iteration,mse,swd,kid\n{},{},{},{}\n", snapshot.iteration, rec.mse,
                         rec.swd, rec.kid));
  return rec;
}

namespace {

std::vector<double> metric_series(const TrainingLog& log, const std::string& metric) {
  std::vector<double> out;
  if (metric == "disc_loss" || metric == "gen_loss") {
    for (const auto& r : log.records) out.push_back(metric == "disc_loss" ? r.disc_loss : r.gen_loss);
    return out;
  }
  for (const auto& [it, e] : log.eval_series()) {
    if (metric == "swd") out.push_back(e.swd);
    else if (metric == "mse") out.push_back(e.mse);
    else out.push_back(e.kid);
  }
  return out;
}

void check_unique(const std::vector<std::uint64_t>& seeds) {
  std::set<std::uint64_t> seen;
  for (auto s : seeds) {
    if (!seen.insert(s).second) throw ConfigError("duplicate seed " + std::to_string(s));
  }
}

}  // namespace

SeedStudyResult run_seed_study(const RunConfig& config, const std::vector<std::uint64_t>& seeds,
                               const fs::path& out_dir, const std::vector<std::string>& command,
                               const std::string& metric, double alpha,
                               double correction_divisor) {
  if (seeds.size() < 2) throw ConfigError("a seed study needs at least 2 seeds");
  check_unique(seeds);
  static const std::set<std::string> metrics = {"swd", "mse", "kid", "disc_loss", "gen_loss"};
  if (!metrics.contains(metric)) throw ConfigError("unknown study metric '" + metric + "'");
  config.validate();

  const Dataset dataset = load_dataset(with_absolute_paths(config).data);
  fs::create_directories(out_dir);

  std::vector<SeedGroup> groups(seeds.size());
  std::vector<std::string> status(seeds.size());
  run_parallel(seeds.size(), [&](std::size_t i) {
    RunConfig c = config;
    c.train.seed = seeds[i];
    groups[i].seed = static_cast<std::int64_t>(seeds[i]);
    try {
      const auto run = run_training(c, out_dir / fmt::format("seed-{}", seeds[i]), command, &dataset);
      groups[i].values = metric_series(run.log, metric);
      status[i] = "ok";
    } catch (const std::exception& e) {
      groups[i].values.clear();
      status[i] = std::string("failed: ") + e.what();
    }
  });

  SeedStudyResult result;
  result.matrix = bonferroni_matrix(groups, alpha, correction_divisor);
  std::string status_csv = "seed,status\n";
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (status[i] != "ok") result.failed_seeds.push_back(seeds[i]);
    std::string msg = status[i];
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    status_csv += fmt::format("{},{}\n", seeds[i], msg);
  }
  write_text(out_dir / "bonferroni.csv", bonferroni_csv(result.matrix));
  write_text(out_dir / "significance.csv", significance_csv(result.matrix));
  write_text(out_dir / "status.csv", status_csv);
  return result;
}

std::vector<SweepRow> run_sweep(const RunConfig& config, const std::vector<std::size_t>& depths,
                                const std::vector<std::uint64_t>& seeds, const fs::path& out_dir,
                                const std::vector<std::string>& command) {
  if (depths.empty()) throw ConfigError("sweep needs at least one depth");
  if (seeds.empty()) throw ConfigError("sweep needs at least one seed");
  check_unique(seeds);
  for (auto d : depths) {
    if (d < 1) throw ConfigError("sweep depths must be >= 1");
  }
  config.validate();
  const Dataset dataset = load_dataset(with_absolute_paths(config).data);
  fs::create_directories(out_dir);

  struct Job {
    std::uint64_t seed;
    std::size_t depth;
  };
  std::vector<Job> jobs;
  for (auto s : seeds) {
    for (auto d : depths) jobs.push_back({s, d});
  }
  std::vector<TrainingLog> logs(jobs.size());
  std::vector<std::string> errors(jobs.size());
  run_parallel(jobs.size(), [&](std::size_t i) {
    RunConfig c = config;
    c.train.seed = jobs[i].seed;
    c.train.generator.depth = jobs[i].depth;
    try {
      logs[i] = run_training(c, out_dir / fmt::format("depth-{}-seed-{}", jobs[i].depth, jobs[i].seed),
                             command, &dataset).log;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!errors[i].empty()) {
      throw std::runtime_error(fmt::format("sweep run depth {} seed {} failed: {}", jobs[i].depth,
                                           jobs[i].seed, errors[i]));
    }
  }

  std::vector<SweepRow> rows;
  std::string summary = "seed,depth,final_iteration,mse,swd,kid,total_ms,mean_iteration_ms\n";
  std::string curves = "seed,depth,iteration,mse,swd,kid,cumulative_ms\n";
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& log = logs[i];
    std::vector<double> cumulative(log.wall_ms.size());
    double total = 0.0;
    for (std::size_t k = 0; k < log.wall_ms.size(); ++k) cumulative[k] = (total += log.wall_ms[k]);

    const auto series = log.eval_series();
    SweepRow row{jobs[i].seed, jobs[i].depth, series.empty() ? EvalRecord{} : series.back().second, total};
    rows.push_back(row);
    summary += fmt::format("{},{},{},{},{},{},{:.3f},{:.3f}\n", row.seed, row.depth,
                           series.empty() ? 0 : series.back().first, row.final_metrics.mse,
                           row.final_metrics.swd, row.final_metrics.kid, total,
                           total / static_cast<double>(std::max<std::size_t>(1, log.wall_ms.size())));
    for (const auto& [it, e] : series) {
      curves += fmt::format("{},{},{},{},{},{},{:.3f}\n", row.seed, row.depth, it, e.mse, e.swd,
                            e.kid, cumulative[it - 1]);
    }
  }
  write_text(out_dir / "sweep_summary.csv", summary);
  write_text(out_dir / "sweep_curves.csv", curves);
  return rows;
}

}  // namespace qkan
