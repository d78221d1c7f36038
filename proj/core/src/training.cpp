#include "qkan/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace qkan {

double disc_loss(double d_real, double d_fake) {
  const double r = std::clamp(d_real, kProbClamp, 1.0 - kProbClamp);
  const double f = std::clamp(d_fake, kProbClamp, 1.0 - kProbClamp);
  return -(std::log(r) + std::log(1.0 - f));
}

double gen_loss(double d_fake) { return -std::log(std::clamp(d_fake, kProbClamp, 1.0 - kProbClamp)); }

std::string to_string(GradientMode mode) {
  return mode == GradientMode::FiniteDifference ? "finite-difference" : "parameter-shift";
}

GradientMode gradient_mode_from_string(const std::string& name) {
  if (name == "finite-difference" || name == "fd") return GradientMode::FiniteDifference;
  if (name == "parameter-shift" || name == "ps") return GradientMode::ParameterShift;
  throw std::invalid_argument("unknown gradient mode '" + name +
                              "' (expected finite-difference or parameter-shift)");
}

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::Sgd ? "sgd" : "adam"; }

OptimizerKind optimizer_from_string(const std::string& name) {
  if (name == "sgd") return OptimizerKind::Sgd;
  if (name == "adam") return OptimizerKind::Adam;
  throw std::invalid_argument("unknown optimizer '" + name + "' (expected sgd or adam)");
}

void TrainConfig::validate() const {
  generator.validate();
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (!(lr_disc >= 0.0) || !(lr_gen >= 0.0)) {
    throw std::invalid_argument("learning rates must be >= 0");
  }
  if (!(fd_step > 0.0)) throw std::invalid_argument("fd_step must be > 0");
  if (eval_every < 1) throw std::invalid_argument("eval_every must be >= 1");
  if (eval_images < 2) throw std::invalid_argument("eval_images must be >= 2 (KID needs pairs)");
  if (swd_projections < 1) throw std::invalid_argument("swd_projections must be >= 1");
}

namespace {

// d gen_loss / d D; zero on the clamp plateau where the clamped loss is flat.
double gen_loss_slope(double d_fake) {
  if (d_fake <= kProbClamp || d_fake >= 1.0 - kProbClamp) return 0.0;
  return -1.0 / d_fake;
}

double image_loss(const DiscriminatorMlp& disc, std::span<const double> image) {
  return gen_loss(disc(image));
}

void finite_difference_patch(const PatchGenerator& gen, const DiscriminatorMlp& disc,
                             const LatentVector& z, std::size_t patch,
                             const std::vector<double>& image, double h, std::size_t begin,
                             std::size_t end, std::vector<double>& grad) {
  const std::size_t len = gen.config().patch_len;
  const std::size_t offset = patch * len;
  std::vector<double> params(gen.patch_parameters(patch).begin(),
                             gen.patch_parameters(patch).end());
  std::vector<double> work = image;

  auto loss_with = [&](std::size_t idx, double value) {
    const double saved = params[idx];
    params[idx] = value;
    const auto out = gen.generate_patch(params, z);
    params[idx] = saved;
    std::copy(out.pixels.begin(), out.pixels.end(), work.begin() + static_cast<long>(offset));
    return image_loss(disc, work);
  };

  for (std::size_t idx = begin; idx < end; ++idx) {
    const double c = params[idx];
    const double up = loss_with(idx, c + h);
    const double down = loss_with(idx, c - h);
    grad[idx] = (up - down) / (2.0 * h);
  }
}

void parameter_shift_patch(const PatchGenerator& gen, const LatentVector& z, std::size_t patch,
                           std::span<const double> dloss_dpixels, std::vector<double>& grad) {
  const auto& cfg = gen.config();
  const auto params = gen.patch_parameters(patch);
  const auto trace = gen.trace_last_layer(params, z);
  const auto base = read_out_patch(cfg, run_blocks(trace.pre_state, trace.angles));
  const auto patch_grad = dloss_dpixels.subspan(patch * cfg.patch_len, cfg.patch_len);

  std::vector<double> dloss_dangle(trace.angles.size(), 0.0);
  if (!(base.flags & kFlagEmptyPatch)) {
    std::vector<double> shifted = trace.angles;
    std::vector<double> dprobs;
    constexpr double shift = std::numbers::pi / 2.0;
    for (std::size_t a = 0; a < shifted.size(); ++a) {
      shifted[a] = trace.angles[a] + shift;
      const auto plus = run_blocks(trace.pre_state, shifted);
      shifted[a] = trace.angles[a] - shift;
      const auto minus = run_blocks(trace.pre_state, shifted);
      shifted[a] = trace.angles[a];

      dprobs.resize(plus.size());
      for (std::size_t k = 0; k < plus.size(); ++k) dprobs[k] = 0.5 * (plus[k] - minus[k]);
      const auto dpix = readout_derivative(cfg, base, dprobs);
      dloss_dangle[a] = std::inner_product(dpix.begin(), dpix.end(), patch_grad.begin(), 0.0);
    }
  }

  if (cfg.ansatz == Ansatz::Qgan) {
    std::copy(dloss_dangle.begin(), dloss_dangle.end(), grad.begin());
    return;
  }

  const std::size_t n_q = cfg.n_qubits;
  const std::size_t n_basis = cfg.basis.n_basis;
  const std::size_t last = cfg.n_layers - 1;
  std::vector<double> dphi(n_basis);
  for (std::size_t d = 0; d < cfg.depth; ++d) {
    for (std::size_t j = 0; j < n_q; ++j) {
      const std::size_t offset = ((last * n_q + j) * cfg.depth + d) * n_basis;
      phi_gradient_from_encoded(trace.input, params.subspan(offset, n_basis), dphi);
      const double upstream = dloss_dangle[d * n_q + j];
      for (std::size_t s = 0; s < n_basis; ++s) grad[offset + s] = upstream * dphi[s];
    }
  }
}

}  // namespace

GeneratorGradient gen_gradient(const PatchGenerator& gen, const DiscriminatorMlp& disc,
                               const LatentVector& z, GradientMode mode, double fd_step) {
  const auto& cfg = gen.config();
  const auto image = gen.generate_image(z);
  const auto fwd = disc.forward(image.pixels);

  GeneratorGradient out;
  out.loss = gen_loss(fwd.output);
  out.flags = image.flags;
  out.patches.assign(gen.n_patches(), std::vector<double>(cfg.patch_parameter_count(), 0.0));

  if (mode == GradientMode::FiniteDifference) {
    for (std::size_t p = 0; p < gen.n_patches(); ++p) {
      finite_difference_patch(gen, disc, z, p, image.pixels, fd_step, 0,
                              cfg.patch_parameter_count(), out.patches[p]);
    }
    return out;
  }

  const auto back = disc.backward(image.pixels, fwd, gen_loss_slope(fwd.output));
  // Coefficients of KAN layers before the last one.
  const std::size_t early = cfg.ansatz == Ansatz::Vqkan
                                ? (cfg.n_layers - 1) * cfg.n_qubits * cfg.depth * cfg.basis.n_basis
                                : 0;
  for (std::size_t p = 0; p < gen.n_patches(); ++p) {
    parameter_shift_patch(gen, z, p, back.input, out.patches[p]);
    if (early > 0) finite_difference_patch(gen, disc, z, p, image.pixels, fd_step, 0, early, out.patches[p]);
  }
  return out;
}

double discriminator_update(DiscriminatorMlp& disc, Optimizer& opt, std::span<const double> real,
                            std::span<const double> fake) {
  const auto f_real = disc.forward(real);
  const auto f_fake = disc.forward(fake);
  const double loss = disc_loss(f_real.output, f_fake.output);

  // d/dD of the clamped logs; flat (zero) where the clamp is active.
  const double r = f_real.output;
  const double f = f_fake.output;
  const double slope_real = (r <= kProbClamp || r >= 1.0 - kProbClamp) ? 0.0 : -1.0 / r;
  const double slope_fake = (f <= kProbClamp || f >= 1.0 - kProbClamp) ? 0.0 : 1.0 / (1.0 - f);

  auto g = disc.backward(real, f_real, slope_real);
  const auto g_fake = disc.backward(fake, f_fake, slope_fake);
  for (std::size_t i = 0; i < g.params.size(); ++i) g.params[i] += g_fake.params[i];
  opt.step(disc.parameters(), g.params);
  return loss;
}

std::mt19937_64 make_stream(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

std::vector<LatentVector> eval_latents(std::uint64_t seed, std::size_t n_qubits,
                                       std::size_t count) {
  auto rng = make_stream(seed, Stream::EvalLatent);
  std::vector<LatentVector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample_latent(n_qubits, rng));
  return out;
}

EvalRecord evaluate_generator(const PatchGenerator& gen, const std::vector<LatentVector>& latents,
                              const ImageSet& reals, std::size_t swd_projections,
                              std::uint64_t metric_seed, ImageSet* generated) {
  ImageSet fakes;
  fakes.reserve(latents.size());
  for (const auto& z : latents) fakes.push_back(gen.generate_image(z).pixels);
  EvalRecord rec;
  rec.mse = mse(fakes, reals);
  rec.swd = sliced_wasserstein(fakes, reals, swd_projections, metric_seed);
  rec.kid = kid(fakes, reals);
  if (generated) *generated = std::move(fakes);
  return rec;
}

Trainer::Trainer(TrainConfig config, std::size_t n_data)
    : config_(std::move(config)),
      gen_(config_.generator),
      disc_(n_data, make_stream(config_.seed, Stream::Discriminator)()),
      disc_opt_(config_.optimizer, config_.lr_disc) {
  config_.validate();
  if (n_data != config_.generator.image_size()) {
    throw std::invalid_argument("image size " + std::to_string(n_data) +
                                " != n_patches * patch_len = " +
                                std::to_string(config_.generator.image_size()));
  }
  gen_opts_.assign(gen_.n_patches(), Optimizer(config_.optimizer, config_.lr_gen));
}

IterationRecord Trainer::step(std::span<const double> real, const LatentVector& z) {
  IterationRecord rec;
  rec.iteration = ++iteration_;

  const auto fake = gen_.generate_image(z);
  rec.flags = fake.flags;
  rec.disc_loss = discriminator_update(disc_, disc_opt_, real, fake.pixels);

  const auto grad = gen_gradient(gen_, disc_, z, config_.gradient_mode, config_.fd_step);
  rec.gen_loss = grad.loss;
  rec.flags |= grad.flags;
  for (std::size_t p = 0; p < gen_.n_patches(); ++p) {
    gen_opts_[p].step(gen_.patch_parameters(p), grad.patches[p]);
  }
  return rec;
}

namespace {

std::string num(double v) { return fmt::format("{}", v); }

}  // namespace

std::string TrainingLog::to_csv() const {
  std::string out = "iteration,disc_loss,gen_loss,flags,mse,swd,kid\n";
  for (const auto& r : records) {
    out += fmt::format("{},{},{},{}", r.iteration, num(r.disc_loss), num(r.gen_loss), r.flags);
    if (r.eval) {
      out += fmt::format(",{},{},{}\n", num(r.eval->mse), num(r.eval->swd), num(r.eval->kid));
    } else {
      out += ",,,\n";
    }
  }
  return out;
}

std::string TrainingLog::timing_csv() const {
  std::string out = "iteration,wall_ms,cumulative_ms\n";
  double total = 0.0;
  for (std::size_t i = 0; i < wall_ms.size() && i < records.size(); ++i) {
    total += wall_ms[i];
    out += fmt::format("{},{:.3f},{:.3f}\n", records[i].iteration, wall_ms[i], total);
  }
  return out;
}

std::vector<std::pair<std::size_t, EvalRecord>> TrainingLog::eval_series() const {
  std::vector<std::pair<std::size_t, EvalRecord>> out;
  for (const auto& r : records) {
    if (r.eval) out.emplace_back(r.iteration, *r.eval);
  }
  return out;
}

Trainer train(const TrainConfig& config, const Dataset& dataset, TrainingLog& log,
              const EvalObserver& observer) {
  if (dataset.size() == 0) throw std::invalid_argument("training dataset is empty");
  if (dataset.size() < config.eval_images) {
    throw std::invalid_argument("dataset smaller than the evaluation set");
  }
  Trainer trainer(config, dataset.pixels());
  log.seed = config.seed;
  log.records.clear();
  log.wall_ms.clear();

  auto latent_rng = make_stream(config.seed, Stream::Latent);
  auto shuffle_rng = make_stream(config.seed, Stream::Shuffle);
  const auto fixed_latents = eval_latents(config.seed, config.generator.n_qubits, config.eval_images);
  const ImageSet eval_reals(dataset.images.begin(),
                            dataset.images.begin() + static_cast<long>(config.eval_images));

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t it = 0; it < config.iterations; ++it) {
    const std::size_t pos = it % dataset.size();
    if (config.shuffle && pos == 0) std::shuffle(order.begin(), order.end(), shuffle_rng);

    const auto t0 = std::chrono::steady_clock::now();
    const auto z = sample_latent(config.generator.n_qubits, latent_rng);
    auto rec = trainer.step(dataset.images[order[pos]], z);
    const auto t1 = std::chrono::steady_clock::now();

    if (rec.iteration % config.eval_every == 0) {
      ImageSet generated;
      rec.eval = evaluate_generator(trainer.generator(), fixed_latents, eval_reals,
                                    config.swd_projections, config.metric_seed, &generated);
      log.records.push_back(rec);
      log.wall_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
      if (observer) observer(rec.iteration, trainer, generated);
      continue;
    }
    log.records.push_back(rec);
    log.wall_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return trainer;
}

}  // namespace qkan
