#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qkan/data.hpp"
#include "qkan/discriminator.hpp"
#include "qkan/generator.hpp"
#include "qkan/metrics.hpp"

namespace qkan {

/// Probabilities are clamped to [kProbClamp, 1 - kProbClamp] before logarithms.
inline constexpr double kProbClamp = 1e-12;

/// -[log D(real) + log(1 - D(fake))].
double disc_loss(double d_real, double d_fake);

/// Non-saturating generator objective -log D(fake).
double gen_loss(double d_fake);

enum class GradientMode { FiniteDifference, ParameterShift };

std::string to_string(GradientMode mode);
GradientMode gradient_mode_from_string(const std::string& name);
std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_from_string(const std::string& name);

struct TrainConfig {
  GeneratorConfig generator{};
  std::size_t iterations = 1000;
  double lr_disc = 0.1;
  double lr_gen = 0.001;
  OptimizerKind optimizer = OptimizerKind::Sgd;
  std::uint64_t seed = 42;
  GradientMode gradient_mode = GradientMode::FiniteDifference;
  double fd_step = 1e-3;
  std::size_t eval_every = 10;
  std::size_t eval_images = 8;
  std::size_t swd_projections = kDefaultSwdProjections;
  std::uint64_t metric_seed = 0;
  bool shuffle = false;

  void validate() const;
};

struct GeneratorGradient {
  std::vector<std::vector<double>> patches;  // same shape as the generator's parameters
  double loss = 0.0;                         // gen_loss at the unperturbed point
  std::uint32_t flags = kFlagNone;
};

/**
 * d gen_loss / d parameters for one latent vector.
 *
 * FiniteDifference: central differences with step fd_step, one pair of patch
 * evaluations per parameter. ParameterShift: exact dP/dangle from +-pi/2
 * shifts of every final-layer angle, pushed through the patch readout and the
 * discriminator's input gradient, then chained with dphi/dc for the KAN
 * ansatz. Coefficients of earlier KAN layers feed later layers through the
 * segment-mean re-encoding, where the shift rule does not apply; those fall
 * back to central differences.
 */
GeneratorGradient gen_gradient(const PatchGenerator& gen, const DiscriminatorMlp& disc,
                               const LatentVector& z, GradientMode mode, double fd_step = 1e-3);

/// One discriminator update on a (real, fake) pair. Returns disc_loss before the update.
double discriminator_update(DiscriminatorMlp& disc, Optimizer& opt, std::span<const double> real,
                            std::span<const double> fake);

struct EvalRecord {
  double mse = 0.0;
  double swd = 0.0;
  double kid = 0.0;
};

struct IterationRecord {
  std::size_t iteration = 0;  // 1-based
  double disc_loss = 0.0;
  double gen_loss = 0.0;
  std::uint32_t flags = kFlagNone;
  std::optional<EvalRecord> eval;
};

/// Seeded streams derived from one run seed; each purpose gets its own engine.
enum class Stream : std::uint64_t { Latent = 1, EvalLatent = 2, Shuffle = 3, Discriminator = 4 };
std::mt19937_64 make_stream(std::uint64_t seed, Stream stream);

/// The fixed evaluation latents of a run.
std::vector<LatentVector> eval_latents(std::uint64_t seed, std::size_t n_qubits, std::size_t count);

/// Metrics of images generated from `latents` against `reals` (paired by index).
EvalRecord evaluate_generator(const PatchGenerator& gen, const std::vector<LatentVector>& latents,
                              const ImageSet& reals, std::size_t swd_projections,
                              std::uint64_t metric_seed, ImageSet* generated = nullptr);

/// Generator, discriminator and optimiser state of one run.
class Trainer {
 public:
  Trainer(TrainConfig config, std::size_t n_data);

  /// Generate, update D on (real, fake), then update G against the updated D.
  IterationRecord step(std::span<const double> real, const LatentVector& z);

  const TrainConfig& config() const { return config_; }
  PatchGenerator& generator() { return gen_; }
  const PatchGenerator& generator() const { return gen_; }
  DiscriminatorMlp& discriminator() { return disc_; }
  const DiscriminatorMlp& discriminator() const { return disc_; }
  std::size_t iteration() const { return iteration_; }

 private:
  TrainConfig config_;
  PatchGenerator gen_;
  DiscriminatorMlp disc_;
  Optimizer disc_opt_;
  std::vector<Optimizer> gen_opts_;
  std::size_t iteration_ = 0;
};

struct TrainingLog {
  std::uint64_t seed = 0;
  std::vector<IterationRecord> records;
  std::vector<double> wall_ms;  // per iteration, kept out of the CSV

  /// iteration,disc_loss,gen_loss,flags,mse,swd,kid; metric cells empty off eval points.
  std::string to_csv() const;
  /// iteration,wall_ms,cumulative_ms.
  std::string timing_csv() const;
  std::vector<std::pair<std::size_t, EvalRecord>> eval_series() const;
};

/// Called at each evaluation point with the images generated from the fixed latents.
using EvalObserver =
    std::function<void(std::size_t iteration, const Trainer& trainer, const ImageSet& generated)>;

/**
 * Full adversarial run: config.iterations single-image steps cycling the
 * dataset in index order (or a seeded per-epoch shuffle), a fresh latent per
 * iteration, and metrics on the first eval_images items every eval_every
 * iterations. Records are appended to `log` as they are produced, so it
 * holds the partial run if an observer throws. Returns the final state.
 */
Trainer train(const TrainConfig& config, const Dataset& dataset, TrainingLog& log,
              const EvalObserver& observer = {});

}  // namespace qkan
