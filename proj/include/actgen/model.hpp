#pragma once

#include <cstdint>
#include <vector>

#include "actgen/data.hpp"
#include "actgen/nn.hpp"

namespace actgen {

// Architecture and loss constants shared by training, generation and eval.
struct ModelConfig {
  std::size_t frame_dim = 10;   // d: joints * coords per frame
  std::size_t latent_dim = 8;   // n: per-frame code width
  std::size_t seq_len = 32;     // N: frames per sequence
  std::size_t classes = 3;      // K
  std::size_t z_dim = 16;
  double consistency_weight = 0.01;  // lambda in the generator objective
  std::size_t window_len = 8;        // L: consistency window, 2 <= L <= N
  std::size_t batch_size = 64;       // M

  std::vector<std::size_t> encoder_hidden = {128, 64};
  std::vector<std::size_t> decoder_hidden = {64, 128};
  std::vector<std::size_t> generator_hidden = {256, 256};
  std::vector<std::size_t> discriminator_hidden = {256, 128};

  std::size_t seq_code_dim() const { return latent_dim * seq_len; }
  void validate() const;
};

// Per-frame latent codes of one sequence, column j = code of frame j.
// The flat layout used everywhere in training is frame-major: frame j
// occupies elements [j*n, (j+1)*n).
struct LatentSequence {
  Tensor values;  // [n x N]

  static LatentSequence from_flat(const Tensor& flat, std::size_t latent_dim,
                                  std::size_t seq_len);
  Tensor to_flat() const;
  std::vector<double> frame(std::size_t j) const;
  std::size_t latent_dim() const { return values.extent(0); }
  std::size_t seq_len() const { return values.extent(1); }
};

// The four networks: frame autoencoder plus conditional generator and
// discriminator over latent sequences.
//   encoder        d -> ... -> n        (tanh output, codes bounded)
//   decoder        n -> ... -> d        (linear output)
//   generator      z+n+K -> ... -> n*N  (linear output)
//   discriminator  n*N+n+K -> ... -> 1  (sigmoid output)
struct ModelBundle {
  Mlp encoder, decoder, generator, discriminator;

  static ModelBundle init(const ModelConfig& cfg, std::uint64_t seed);

  std::vector<Tensor> autoencoder_params() const;
  std::vector<Tensor> generator_params() const;
  std::vector<Tensor> discriminator_params() const;
  std::vector<Tensor> all_params() const;
  bool finite() const;
};

// ---- forward paths ------------------------------------------------------------

// frames: [B x d] or rank-1 [d]; codes come back with matching rank.
Tensor encode_frames(const ModelBundle& b, const Tensor& frames);
Tensor decode_latents(const ModelBundle& b, const Tensor& codes);

std::vector<double> encode_frame(const ModelBundle& b, const FrameVec& frame);
FrameVec decode_latent(const ModelBundle& b, const std::vector<double>& code);
LatentSequence encode_sequence(const ModelBundle& b, const std::vector<FrameVec>& frames);

// Batched generator: z [M x z_dim], c [M x n], labels [M x K] one-hot rows;
// returns the frame-major flat latent sequences [M x n*N].
Tensor generator_forward_flat(const ModelBundle& b, const Tensor& z, const Tensor& c,
                              const Tensor& labels);

// Discriminator on flat latent sequences; logits or sigmoid probabilities.
Tensor discriminator_logits(const ModelBundle& b, const Tensor& h_flat, const Tensor& c,
                            const Tensor& labels);
Tensor discriminator_prob(const ModelBundle& b, const Tensor& h_flat, const Tensor& c,
                          const Tensor& labels);

// Single-sequence views of the same paths. The label must be one-hot.
LatentSequence generator_forward(const ModelBundle& b, const std::vector<double>& z,
                                 const std::vector<double>& c,
                                 const std::vector<double>& label);
double discriminator_forward(const ModelBundle& b, const LatentSequence& h,
                             const std::vector<double>& c, const std::vector<double>& label);

// ---- losses ----------------------------------------------------------------------

// Mean over the batch of |x - Dec(Enc(x))|^2 / d.
Tensor recon_loss(const ModelBundle& b, const Tensor& frames);

// Discriminator descends -[log p_real + log(1 - p_fake)]; probability inputs
// go through the clamped log, logits through the fused stable form.
Tensor d_loss(const Tensor& p_real, const Tensor& p_fake);
Tensor d_loss_logits(const Tensor& real_logits, const Tensor& fake_logits);

// Non-saturating generator loss -log p_fake (same fixed points as the
// log(1-D) form, usable gradients early on).
Tensor g_adv_loss(const Tensor& p_fake);
Tensor g_adv_loss_logits(const Tensor& fake_logits);

// Mean squared displacement between adjacent latent frames:
//   full:     1/(M(N-1)) sum_i sum_j |s_ij - s_i(j+1)|^2
//   windowed: the L-1 adjacent pairs starting at frame S, 1/(M(L-1)) scaling.
// h_flat is [M x n*N] frame-major. The full form is the windowed form at
// (S=0, L=N), bit-exactly.
Tensor consistency_loss_full(const Tensor& h_flat, std::size_t latent_dim);
Tensor consistency_loss_windowed(const Tensor& h_flat, std::size_t latent_dim,
                                 std::size_t start, std::size_t window_len);

// g_adv + weight * consistency over the given window.
Tensor g_total_loss(const Tensor& fake_logits, const Tensor& h_flat, std::size_t latent_dim,
                    std::size_t start, std::size_t window_len, double weight);

}  // namespace actgen
