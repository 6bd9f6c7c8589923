#include "actgen/model.hpp"

#include <cmath>
#include <stdexcept>

namespace actgen {

void ModelConfig::validate() const {
  if (frame_dim == 0 || latent_dim == 0 || seq_len == 0 || classes == 0 || z_dim == 0 ||
      batch_size == 0) {
    throw std::invalid_argument("ModelConfig: all dimensions must be positive");
  }
  if (consistency_weight < 0.0 || consistency_weight > 1.0) {
    throw std::invalid_argument("ModelConfig: consistency weight must be in [0, 1]");
  }
  if (window_len < 2 || window_len > seq_len) {
    throw std::invalid_argument("ModelConfig: window length must satisfy 2 <= L <= N");
  }
}

// ---- LatentSequence -------------------------------------------------------------

LatentSequence LatentSequence::from_flat(const Tensor& flat, std::size_t latent_dim,
                                         std::size_t seq_len) {
  if (flat.numel() != latent_dim * seq_len) {
    throw std::invalid_argument("LatentSequence::from_flat: size mismatch");
  }
  std::vector<double> values(latent_dim * seq_len);
  const auto src = flat.data();
  for (std::size_t j = 0; j < seq_len; ++j) {
    for (std::size_t r = 0; r < latent_dim; ++r) {
      values[r * seq_len + j] = src[j * latent_dim + r];
    }
  }
  return LatentSequence{Tensor::from_data({latent_dim, seq_len}, std::move(values))};
}

Tensor LatentSequence::to_flat() const {
  const std::size_t n = latent_dim(), N = seq_len();
  std::vector<double> flat(n * N);
  const auto src = values.data();
  for (std::size_t j = 0; j < N; ++j) {
    for (std::size_t r = 0; r < n; ++r) flat[j * n + r] = src[r * N + j];
  }
  return Tensor::from_data({n * N}, std::move(flat));
}

std::vector<double> LatentSequence::frame(std::size_t j) const {
  const std::size_t n = latent_dim(), N = seq_len();
  if (j >= N) throw std::out_of_range("LatentSequence::frame: index out of range");
  std::vector<double> out(n);
  const auto src = values.data();
  for (std::size_t r = 0; r < n; ++r) out[r] = src[r * N + j];
  return out;
}

// ---- ModelBundle ----------------------------------------------------------------

namespace {

std::vector<std::size_t> stack_dims(std::size_t in, const std::vector<std::size_t>& hidden,
                                    std::size_t out) {
  std::vector<std::size_t> dims;
  dims.push_back(in);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  return dims;
}

std::vector<Activation> relu_stack(std::size_t layers, Activation last) {
  std::vector<Activation> acts(layers, Activation::kRelu);
  acts.back() = last;
  return acts;
}

void check_one_hot(const std::vector<double>& label) {
  double sum = 0.0;
  for (double v : label) {
    if (v != 0.0 && v != 1.0) {
      throw std::invalid_argument("label must be one-hot (entries 0 or 1)");
    }
    sum += v;
  }
  if (sum != 1.0) throw std::invalid_argument("label must be one-hot (exactly one 1)");
}

}  // namespace

ModelBundle ModelBundle::init(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng root(seed);
  Rng enc_rng = root.derive(1), dec_rng = root.derive(2), gen_rng = root.derive(3),
      dis_rng = root.derive(4);
  ModelBundle b;
  const auto enc_dims = stack_dims(cfg.frame_dim, cfg.encoder_hidden, cfg.latent_dim);
  b.encoder = Mlp::init(enc_dims, relu_stack(enc_dims.size() - 1, Activation::kTanh), enc_rng);
  const auto dec_dims = stack_dims(cfg.latent_dim, cfg.decoder_hidden, cfg.frame_dim);
  b.decoder = Mlp::init(dec_dims, relu_stack(dec_dims.size() - 1, Activation::kLinear), dec_rng);
  const auto gen_dims = stack_dims(cfg.z_dim + cfg.latent_dim + cfg.classes,
                                   cfg.generator_hidden, cfg.seq_code_dim());
  b.generator =
      Mlp::init(gen_dims, relu_stack(gen_dims.size() - 1, Activation::kLinear), gen_rng);
  const auto dis_dims = stack_dims(cfg.seq_code_dim() + cfg.latent_dim + cfg.classes,
                                   cfg.discriminator_hidden, 1);
  b.discriminator =
      Mlp::init(dis_dims, relu_stack(dis_dims.size() - 1, Activation::kSigmoid), dis_rng);
  return b;
}

std::vector<Tensor> ModelBundle::autoencoder_params() const {
  std::vector<Tensor> out = encoder.parameters();
  auto dec = decoder.parameters();
  out.insert(out.end(), dec.begin(), dec.end());
  return out;
}

std::vector<Tensor> ModelBundle::generator_params() const { return generator.parameters(); }

std::vector<Tensor> ModelBundle::discriminator_params() const {
  return discriminator.parameters();
}

std::vector<Tensor> ModelBundle::all_params() const {
  std::vector<Tensor> out = autoencoder_params();
  auto g = generator_params();
  auto d = discriminator_params();
  out.insert(out.end(), g.begin(), g.end());
  out.insert(out.end(), d.begin(), d.end());
  return out;
}

bool ModelBundle::finite() const {
  for (const auto& p : all_params()) {
    for (double v : p.data()) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

// ---- forward paths ----------------------------------------------------------------

Tensor encode_frames(const ModelBundle& b, const Tensor& frames) {
  return b.encoder.forward(frames);
}

Tensor decode_latents(const ModelBundle& b, const Tensor& codes) {
  return b.decoder.forward(codes);
}

std::vector<double> encode_frame(const ModelBundle& b, const FrameVec& frame) {
  return encode_frames(b, Tensor::from_vector(frame)).to_vector();
}

FrameVec decode_latent(const ModelBundle& b, const std::vector<double>& code) {
  return decode_latents(b, Tensor::from_vector(code)).to_vector();
}

LatentSequence encode_sequence(const ModelBundle& b, const std::vector<FrameVec>& frames) {
  if (frames.empty()) throw std::invalid_argument("encode_sequence: empty sequence");
  Tensor codes = encode_frames(b, Tensor::from_rows(frames));  // [N x n]
  const std::size_t N = codes.extent(0), n = codes.extent(1);
  // [N x n] row-major is exactly the frame-major flat layout.
  return LatentSequence::from_flat(reshape(codes, {N * n}), n, N);
}

Tensor generator_forward_flat(const ModelBundle& b, const Tensor& z, const Tensor& c,
                              const Tensor& labels) {
  return b.generator.forward(concat({z, c, labels}, 1));
}

Tensor discriminator_logits(const ModelBundle& b, const Tensor& h_flat, const Tensor& c,
                            const Tensor& labels) {
  return b.discriminator.forward_preact(concat({h_flat, c, labels}, 1));
}

Tensor discriminator_prob(const ModelBundle& b, const Tensor& h_flat, const Tensor& c,
                          const Tensor& labels) {
  return sigmoid(discriminator_logits(b, h_flat, c, labels));
}

LatentSequence generator_forward(const ModelBundle& b, const std::vector<double>& z,
                                 const std::vector<double>& c,
                                 const std::vector<double>& label) {
  check_one_hot(label);
  std::vector<double> input;
  input.reserve(z.size() + c.size() + label.size());
  input.insert(input.end(), z.begin(), z.end());
  input.insert(input.end(), c.begin(), c.end());
  input.insert(input.end(), label.begin(), label.end());
  Tensor flat = b.generator.forward(Tensor::from_vector(std::move(input)));
  const std::size_t n = c.size();
  return LatentSequence::from_flat(flat, n, flat.numel() / n);
}

double discriminator_forward(const ModelBundle& b, const LatentSequence& h,
                             const std::vector<double>& c, const std::vector<double>& label) {
  check_one_hot(label);
  std::vector<double> input = h.to_flat().to_vector();
  input.insert(input.end(), c.begin(), c.end());
  input.insert(input.end(), label.begin(), label.end());
  return sigmoid(b.discriminator.forward_preact(Tensor::from_vector(std::move(input)))).value();
}

// ---- losses -------------------------------------------------------------------------

Tensor recon_loss(const ModelBundle& b, const Tensor& frames) {
  if (frames.numel() == 0) throw std::invalid_argument("recon_loss: empty batch");
  const Tensor recon = decode_latents(b, encode_frames(b, frames));
  const Tensor sq = square(sub(recon, frames));
  const std::size_t d = frames.rank() == 2 ? frames.extent(1) : frames.numel();
  const std::size_t batch = frames.rank() == 2 ? frames.extent(0) : 1;
  return scale(sum(sq), 1.0 / (static_cast<double>(d) * static_cast<double>(batch)));
}

Tensor d_loss(const Tensor& p_real, const Tensor& p_fake) {
  return neg(mean(add(safe_log(p_real), safe_log(rsub_scalar(1.0, p_fake)))));
}

Tensor d_loss_logits(const Tensor& real_logits, const Tensor& fake_logits) {
  return neg(mean(add(log_sigmoid(real_logits), log_sigmoid(neg(fake_logits)))));
}

Tensor g_adv_loss(const Tensor& p_fake) { return neg(mean(safe_log(p_fake))); }

Tensor g_adv_loss_logits(const Tensor& fake_logits) {
  return neg(mean(log_sigmoid(fake_logits)));
}

Tensor consistency_loss_windowed(const Tensor& h_flat, std::size_t latent_dim,
                                 std::size_t start, std::size_t window_len) {
  if (h_flat.rank() != 2) {
    throw std::invalid_argument("consistency loss: expected [M x n*N] tensor");
  }
  const std::size_t batch = h_flat.extent(0);
  const std::size_t total = h_flat.extent(1);
  if (latent_dim == 0 || total % latent_dim != 0) {
    throw std::invalid_argument("consistency loss: flat width not a multiple of latent dim");
  }
  const std::size_t seq_len = total / latent_dim;
  if (window_len < 2) {
    throw std::invalid_argument("consistency loss: window must span at least 2 frames");
  }
  if (start + window_len > seq_len) {
    throw std::invalid_argument("consistency loss: window [" + std::to_string(start) + ", " +
                                std::to_string(start + window_len) + ") exceeds sequence length " +
                                std::to_string(seq_len));
  }
  Tensor prev = slice(h_flat, 1, start * latent_dim, latent_dim);
  Tensor acc;
  for (std::size_t j = 1; j < window_len; ++j) {
    Tensor cur = slice(h_flat, 1, (start + j) * latent_dim, latent_dim);
    Tensor pair = sum(square(sub(prev, cur)));
    acc = (j == 1) ? pair : add(acc, pair);
    prev = cur;
  }
  const double denom = static_cast<double>(batch) * static_cast<double>(window_len - 1);
  return scale(acc, 1.0 / denom);
}

Tensor consistency_loss_full(const Tensor& h_flat, std::size_t latent_dim) {
  if (h_flat.rank() != 2 || latent_dim == 0 || h_flat.extent(1) % latent_dim != 0) {
    throw std::invalid_argument("consistency loss: expected [M x n*N] tensor");
  }
  const std::size_t seq_len = h_flat.extent(1) / latent_dim;
  if (seq_len < 2) {
    throw std::invalid_argument("consistency loss: sequence must have at least 2 frames");
  }
  return consistency_loss_windowed(h_flat, latent_dim, 0, seq_len);
}

Tensor g_total_loss(const Tensor& fake_logits, const Tensor& h_flat, std::size_t latent_dim,
                    std::size_t start, std::size_t window_len, double weight) {
  return add(g_adv_loss_logits(fake_logits),
             scale(consistency_loss_windowed(h_flat, latent_dim, start, window_len), weight));
}

}  // namespace actgen
