#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "actgen/checkpoint.hpp"
#include "actgen/data.hpp"
#include "actgen/model.hpp"

namespace actgen {

struct TrainConfig {
  ModelConfig model;
  std::size_t epochs = 50;
  // Published rate is 1e-5; desk-scale runs pass something larger so the
  // budgeted step count actually converges.
  double lr = 1e-5;
  int d_steps_per_g = 1;
  std::uint64_t seed = 0;
  std::size_t checkpoint_every = 0;        // epochs between checkpoints, 0 = final only
  std::filesystem::path out_dir;           // empty = nothing written to disk
  std::size_t holdout_every = 5;           // every k-th sequence held out; 0 = none
};

struct TrainMetrics {
  std::size_t step = 0;
  double recon = 0.0;
  double d_loss = 0.0;
  double g_adv = 0.0;
  double consistency = 0.0;
  double d_real_mean = 0.0;
  double d_fake_mean = 0.0;

  bool finite() const;
};

std::string to_json_line(const TrainMetrics& m);

// i.i.d. standard normal draws, [count x z_dim].
Tensor sample_z(std::size_t count, std::size_t z_dim, Rng& rng);

// ---- per-step updates -------------------------------------------------------
// The three sub-updates run in order inside train_step. Each touches only its
// own optimizer's parameters; conditioning codes and real sequence codes are
// detached so discriminator/generator losses never reach the autoencoder.

// Reconstruction descent over every frame of the batch. frames2d is [B*N x d].
double ae_update(const ModelBundle& b, Adam& ae_opt, const Tensor& frames2d);

struct DUpdateStats {
  double loss = 0.0;
  double d_real_mean = 0.0;
  double d_fake_mean = 0.0;
};
// One discriminator descent on (real, fake) pairs with fresh fakes.
DUpdateStats d_update(const ModelBundle& b, Adam& d_opt, const Tensor& real_flat,
                      const Tensor& c, const Tensor& labels, Rng& rng);

struct GUpdateStats {
  double adv = 0.0;
  double consistency = 0.0;
};
// One generator descent on the adversarial + windowed consistency objective;
// the window start is drawn fresh here, shared across the batch.
GUpdateStats g_update(const ModelBundle& b, Adam& g_opt, const Tensor& c,
                      const Tensor& labels, const ModelConfig& cfg, Rng& rng);

// Full step: autoencoder, then d_steps_per_g discriminator updates, then one
// generator update. Throws on non-finite losses.
TrainMetrics train_step(const ModelBundle& b, Adam& ae_opt, Adam& d_opt, Adam& g_opt,
                        const Batch& batch, const ModelConfig& cfg, int d_steps_per_g,
                        Rng& rng);

// ---- full runs ------------------------------------------------------------------

struct TrainResult {
  Checkpoint checkpoint;               // final bundle + stats + optimizer state
  std::vector<TrainMetrics> history;   // one entry per step
  Dataset train_split, holdout_split;  // prepared (normalized + resampled)
};

using StepCallback = std::function<void(const TrainMetrics&)>;

// Deterministic in (raw dataset, config). Writes metrics.jsonl and
// checkpoint files under cfg.out_dir when set.
TrainResult train(const Dataset& raw, const TrainConfig& cfg, const StepCallback& on_step = {});

}  // namespace actgen
