#include "actgen/training.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace actgen {

bool TrainMetrics::finite() const {
  return std::isfinite(recon) && std::isfinite(d_loss) && std::isfinite(g_adv) &&
         std::isfinite(consistency) && std::isfinite(d_real_mean) &&
         std::isfinite(d_fake_mean);
}

std::string to_json_line(const TrainMetrics& m) {
  nlohmann::json j{{"step", m.step},          {"recon", m.recon},
                   {"d_loss", m.d_loss},      {"g_adv", m.g_adv},
                   {"consistency", m.consistency}, {"d_real", m.d_real_mean},
                   {"d_fake", m.d_fake_mean}};
  return j.dump();
}

Tensor sample_z(std::size_t count, std::size_t z_dim, Rng& rng) {
  std::vector<double> values(count * z_dim);
  for (double& v : values) v = rng.normal();
  return Tensor::from_data({count, z_dim}, std::move(values));
}

// ---- per-step updates ---------------------------------------------------------

double ae_update(const ModelBundle& b, Adam& ae_opt, const Tensor& frames2d) {
  ae_opt.zero_grad();
  Tensor loss = recon_loss(b, frames2d);
  loss.backward();
  ae_opt.step();
  return loss.value();
}

DUpdateStats d_update(const ModelBundle& b, Adam& d_opt, const Tensor& real_flat,
                      const Tensor& c, const Tensor& labels, Rng& rng) {
  const std::size_t batch = real_flat.extent(0);
  const std::size_t z_dim = b.generator.in_dim() - c.extent(1) - labels.extent(1);
  Tensor z = sample_z(batch, z_dim, rng);
  // Fakes are constants for the discriminator update.
  Tensor fake_flat = generator_forward_flat(b, z, c, labels).detach();
  d_opt.zero_grad();
  Tensor real_logits = discriminator_logits(b, real_flat, c, labels);
  Tensor fake_logits = discriminator_logits(b, fake_flat, c, labels);
  Tensor loss = d_loss_logits(real_logits, fake_logits);
  loss.backward();
  d_opt.step();
  DUpdateStats stats;
  stats.loss = loss.value();
  stats.d_real_mean = mean(sigmoid(real_logits.detach())).value();
  stats.d_fake_mean = mean(sigmoid(fake_logits.detach())).value();
  return stats;
}

GUpdateStats g_update(const ModelBundle& b, Adam& g_opt, const Tensor& c,
                      const Tensor& labels, const ModelConfig& cfg, Rng& rng) {
  const std::size_t batch = c.extent(0);
  Tensor z = sample_z(batch, cfg.z_dim, rng);
  const std::size_t start =
      static_cast<std::size_t>(rng.integer(cfg.seq_len - cfg.window_len + 1));
  g_opt.zero_grad();
  Tensor fake_flat = generator_forward_flat(b, z, c, labels);
  Tensor fake_logits = discriminator_logits(b, fake_flat, c, labels);
  Tensor adv = g_adv_loss_logits(fake_logits);
  Tensor cons = consistency_loss_windowed(fake_flat, cfg.latent_dim, start, cfg.window_len);
  Tensor loss = add(adv, scale(cons, cfg.consistency_weight));
  loss.backward();
  g_opt.step();
  return GUpdateStats{adv.value(), cons.value()};
}

TrainMetrics train_step(const ModelBundle& b, Adam& ae_opt, Adam& d_opt, Adam& g_opt,
                        const Batch& batch, const ModelConfig& cfg, int d_steps_per_g,
                        Rng& rng) {
  const std::size_t B = batch.size;
  const std::size_t N = batch.frames.extent(1);
  const std::size_t d = batch.frames.extent(2);
  Tensor frames2d = reshape(batch.frames, {B * N, d});

  TrainMetrics m;
  m.recon = ae_update(b, ae_opt, frames2d);

  // Real codes and per-sample initial-pose codes, both gradient-stopped:
  // the encoder trains on reconstruction only.
  Tensor real_flat = reshape(encode_frames(b, frames2d), {B, N * cfg.latent_dim}).detach();
  std::vector<std::vector<double>> first_rows(B);
  for (std::size_t i = 0; i < B; ++i) {
    const auto src = frames2d.data();
    first_rows[i].assign(src.begin() + static_cast<std::ptrdiff_t>(i * N * d),
                         src.begin() + static_cast<std::ptrdiff_t>(i * N * d + d));
  }
  Tensor c = encode_frames(b, Tensor::from_rows(first_rows)).detach();

  DUpdateStats ds;
  for (int k = 0; k < d_steps_per_g; ++k) {
    ds = d_update(b, d_opt, real_flat, c, batch.labels, rng);
  }
  m.d_loss = ds.loss;
  m.d_real_mean = ds.d_real_mean;
  m.d_fake_mean = ds.d_fake_mean;

  const GUpdateStats gs = g_update(b, g_opt, c, batch.labels, cfg, rng);
  m.g_adv = gs.adv;
  m.consistency = gs.consistency;

  if (!m.finite()) {
    throw std::runtime_error("train_step: non-finite loss at step (recon=" +
                             std::to_string(m.recon) + ", d=" + std::to_string(m.d_loss) +
                             ", g=" + std::to_string(m.g_adv) + ")");
  }
  return m;
}

// ---- full runs --------------------------------------------------------------------

TrainResult train(const Dataset& raw, const TrainConfig& cfg, const StepCallback& on_step) {
  cfg.model.validate();
  if (raw.sequences.empty()) throw std::invalid_argument("train: empty dataset");
  if (raw.frame_dim() != cfg.model.frame_dim) {
    throw std::invalid_argument("train: dataset frame dim " + std::to_string(raw.frame_dim()) +
                                " does not match config " +
                                std::to_string(cfg.model.frame_dim));
  }
  if (raw.classes != cfg.model.classes) {
    throw std::invalid_argument("train: dataset classes " + std::to_string(raw.classes) +
                                " does not match config " + std::to_string(cfg.model.classes));
  }

  auto [train_raw, holdout_raw] = split_dataset(raw, cfg.holdout_every);
  const NormStats stats = compute_norm_stats(train_raw);
  TrainResult result;
  result.train_split = prepare(train_raw, cfg.model.seq_len, stats);
  result.holdout_split = holdout_raw.sequences.empty()
                             ? holdout_raw
                             : prepare(holdout_raw, cfg.model.seq_len, stats);

  ModelBundle bundle = ModelBundle::init(cfg.model, Rng(cfg.seed).derive(100).base_seed());
  const AdamConfig adam_cfg{cfg.lr, 0.9, 0.999, 1e-8};
  Adam ae_opt(bundle.autoencoder_params(), adam_cfg);
  Adam d_opt(bundle.discriminator_params(), adam_cfg);
  Adam g_opt(bundle.generator_params(), adam_cfg);

  Rng root(cfg.seed);
  Rng step_rng = root.derive(1);

  std::ofstream metrics_file;
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    metrics_file.open(cfg.out_dir / "metrics.jsonl", std::ios::binary);
    if (!metrics_file) {
      throw std::runtime_error("train: cannot write metrics under " + cfg.out_dir.string());
    }
  }

  auto snapshot = [&](void) {
    Checkpoint ckpt;
    ckpt.config = cfg.model;
    ckpt.norm = stats;
    ckpt.bundle = bundle;
    ckpt.autoencoder_opt =
        Checkpoint::OptimState{ae_opt.step_count(), adam_cfg, ae_opt.first_moments(),
                               ae_opt.second_moments()};
    ckpt.discriminator_opt =
        Checkpoint::OptimState{d_opt.step_count(), adam_cfg, d_opt.first_moments(),
                               d_opt.second_moments()};
    ckpt.generator_opt =
        Checkpoint::OptimState{g_opt.step_count(), adam_cfg, g_opt.first_moments(),
                               g_opt.second_moments()};
    return ckpt;
  };

  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    BatchStream batches(result.train_split, std::min(cfg.model.batch_size,
                                                     result.train_split.sequences.size()),
                        root.derive(1000 + epoch).base_seed());
    while (auto batch = batches.next()) {
      TrainMetrics m;
      try {
        m = train_step(bundle, ae_opt, d_opt, g_opt, *batch, cfg.model, cfg.d_steps_per_g,
                       step_rng);
      } catch (const std::runtime_error&) {
        // Leave a diagnostic snapshot behind before aborting.
        if (!cfg.out_dir.empty()) save_checkpoint(cfg.out_dir / "diagnostic.json", snapshot());
        throw;
      }
      m.step = ++step;
      if (metrics_file.is_open()) metrics_file << to_json_line(m) << "\n";
      if (on_step) on_step(m);
      result.history.push_back(m);
    }
    if (!cfg.out_dir.empty() && cfg.checkpoint_every > 0 &&
        (epoch + 1) % cfg.checkpoint_every == 0 && epoch + 1 < cfg.epochs) {
      save_checkpoint(cfg.out_dir / ("checkpoint-epoch" + std::to_string(epoch + 1) + ".json"),
                      snapshot());
    }
  }

  result.checkpoint = snapshot();
  if (!cfg.out_dir.empty()) {
    save_checkpoint(cfg.out_dir / "checkpoint.json", result.checkpoint);
  }
  return result;
}

}  // namespace actgen
