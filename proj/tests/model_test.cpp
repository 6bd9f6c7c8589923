#include "actgen/model.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"

using namespace actgen;

namespace {

ModelConfig small_config() {
  ModelConfig cfg;
  cfg.frame_dim = 6;
  cfg.latent_dim = 3;
  cfg.seq_len = 5;
  cfg.classes = 2;
  cfg.z_dim = 4;
  cfg.window_len = 3;
  cfg.batch_size = 4;
  cfg.encoder_hidden = {8};
  cfg.decoder_hidden = {8};
  cfg.generator_hidden = {10};
  cfg.discriminator_hidden = {10};
  return cfg;
}

// Independent oracle for the consistency losses: plain double loops over the
// frame-major flat layout.
double brute_force_consistency(const std::vector<double>& flat, std::size_t batch,
                               std::size_t n, std::size_t start, std::size_t window) {
  const std::size_t row = flat.size() / batch;
  double total = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    for (std::size_t j = start; j + 1 < start + window; ++j) {
      for (std::size_t r = 0; r < n; ++r) {
        const double a = flat[i * row + j * n + r];
        const double b = flat[i * row + (j + 1) * n + r];
        total += (a - b) * (a - b);
      }
    }
  }
  return total / (static_cast<double>(batch) * static_cast<double>(window - 1));
}

Tensor random_flat(std::size_t batch, std::size_t n, std::size_t N, Rng& rng) {
  std::vector<double> values(batch * n * N);
  for (double& v : values) v = rng.uniform(-2.0, 2.0);
  return Tensor::from_data({batch, n * N}, std::move(values));
}

}  // namespace

TEST_CASE("config validation") {
  ModelConfig cfg = small_config();
  CHECK_NOTHROW(cfg.validate());
  cfg.consistency_weight = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config();
  cfg.window_len = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config();
  cfg.window_len = cfg.seq_len + 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("bundle init wires the configured dimensions") {
  const ModelConfig cfg = small_config();
  const ModelBundle b = ModelBundle::init(cfg, 4);
  CHECK(b.encoder.in_dim() == cfg.frame_dim);
  CHECK(b.encoder.out_dim() == cfg.latent_dim);
  CHECK(b.decoder.in_dim() == cfg.latent_dim);
  CHECK(b.decoder.out_dim() == cfg.frame_dim);
  CHECK(b.generator.in_dim() == cfg.z_dim + cfg.latent_dim + cfg.classes);
  CHECK(b.generator.out_dim() == cfg.seq_code_dim());
  CHECK(b.discriminator.in_dim() == cfg.seq_code_dim() + cfg.latent_dim + cfg.classes);
  CHECK(b.discriminator.out_dim() == 1);
  CHECK(b.encoder.layers().back().activation == Activation::kTanh);
  CHECK(b.decoder.layers().back().activation == Activation::kLinear);
  CHECK(b.generator.layers().back().activation == Activation::kLinear);
  CHECK(b.discriminator.layers().back().activation == Activation::kSigmoid);
  CHECK(b.finite());
}

TEST_CASE("encode_frame is deterministic, tanh-bounded, right-sized") {
  const ModelConfig cfg = small_config();
  const ModelBundle b = ModelBundle::init(cfg, 4);
  const FrameVec x{0.1, -0.2, 0.3, 0.4, -0.5, 0.6};
  const auto h1 = encode_frame(b, x);
  const auto h2 = encode_frame(b, x);
  CHECK(h1.size() == cfg.latent_dim);
  CHECK(h1 == h2);
  for (double v : h1) {
    CHECK(v > -1.0);
    CHECK(v < 1.0);
  }
  CHECK(decode_latent(b, h1).size() == cfg.frame_dim);
  CHECK_THROWS_AS(encode_frame(b, FrameVec{1.0}), std::invalid_argument);
}

TEST_CASE("encode_sequence stacks per-frame codes as columns") {
  const ModelConfig cfg = small_config();
  const ModelBundle b = ModelBundle::init(cfg, 9);
  std::vector<FrameVec> frames;
  Rng rng(2);
  for (std::size_t j = 0; j < cfg.seq_len; ++j) {
    FrameVec f(cfg.frame_dim);
    for (double& v : f) v = rng.uniform(-0.5, 0.5);
    frames.push_back(f);
  }
  const LatentSequence h = encode_sequence(b, frames);
  CHECK(h.values.shape() == std::vector<std::size_t>{cfg.latent_dim, cfg.seq_len});
  for (std::size_t j = 0; j < cfg.seq_len; ++j) {
    const auto direct = encode_frame(b, frames[j]);
    const auto column = h.frame(j);
    for (std::size_t r = 0; r < cfg.latent_dim; ++r) {
      CHECK(column[r] == doctest::Approx(direct[r]).epsilon(1e-12));
    }
  }

  // constant input -> identical columns
  std::vector<FrameVec> constant(cfg.seq_len, frames[0]);
  const LatentSequence hc = encode_sequence(b, constant);
  for (std::size_t j = 1; j < cfg.seq_len; ++j) CHECK(hc.frame(j) == hc.frame(0));
}

TEST_CASE("latent sequence flat layout round-trips") {
  Rng rng(8);
  std::vector<double> flat(3 * 4);
  for (double& v : flat) v = rng.uniform(-1, 1);
  const LatentSequence h = LatentSequence::from_flat(Tensor::from_vector(flat), 3, 4);
  CHECK(h.to_flat().to_vector() == flat);
  // column j of the matrix is flat block j
  for (std::size_t j = 0; j < 4; ++j) {
    const auto col = h.frame(j);
    for (std::size_t r = 0; r < 3; ++r) CHECK(col[r] == flat[j * 3 + r]);
  }
}

TEST_CASE("generator output shape and determinism") {
  const ModelConfig cfg = small_config();
  const ModelBundle b = ModelBundle::init(cfg, 5);
  const std::vector<double> z(cfg.z_dim, 0.3);
  const std::vector<double> c(cfg.latent_dim, -0.1);
  const auto l = one_hot(1, cfg.classes);
  const LatentSequence h1 = generator_forward(b, z, c, l);
  const LatentSequence h2 = generator_forward(b, z, c, l);
  CHECK(h1.values.shape() == std::vector<std::size_t>{cfg.latent_dim, cfg.seq_len});
  CHECK(h1.values.to_vector() == h2.values.to_vector());

  // different z produce a different latent sequence even untrained
  std::vector<double> z2(cfg.z_dim, -0.9);
  const LatentSequence h3 = generator_forward(b, z2, c, l);
  CHECK(h1.values.to_vector() != h3.values.to_vector());
}

TEST_CASE("generator rejects a non-one-hot label") {
  const ModelConfig cfg = small_config();
  const ModelBundle b = ModelBundle::init(cfg, 5);
  const std::vector<double> z(cfg.z_dim, 0.0);
  const std::vector<double> c(cfg.latent_dim, 0.0);
  CHECK_THROWS_AS(generator_forward(b, z, c, {0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(generator_forward(b, z, c, {1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(generator_forward(b, z, c, {0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("discriminator outputs stay strictly inside (0,1)") {
  const ModelConfig cfg = small_config();
  ModelBundle b = ModelBundle::init(cfg, 6);
  Rng rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> flat(cfg.seq_code_dim());
    for (double& v : flat) v = rng.uniform(-1, 1);
    const LatentSequence h =
        LatentSequence::from_flat(Tensor::from_vector(flat), cfg.latent_dim, cfg.seq_len);
    std::vector<double> c(cfg.latent_dim);
    for (double& v : c) v = rng.uniform(-1, 1);
    const double p = discriminator_forward(b, h, c, one_hot(0, cfg.classes));
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }

  // zero weights -> 0.5 regardless of input
  for (auto& layer : b.discriminator.layers()) {
    layer.weight = Tensor::zeros(layer.weight.shape()).set_requires_grad(true);
    layer.bias = Tensor::zeros(layer.bias.shape()).set_requires_grad(true);
  }
  const LatentSequence h = LatentSequence::from_flat(
      Tensor::full({cfg.seq_code_dim()}, 0.7), cfg.latent_dim, cfg.seq_len);
  CHECK(discriminator_forward(b, h, std::vector<double>(cfg.latent_dim, 0.2),
                              one_hot(1, cfg.classes)) == 0.5);
}

TEST_CASE("recon loss is nonnegative, zero at identity, matches hand oracle") {
  const ModelConfig cfg = small_config();
  const ModelBundle b = ModelBundle::init(cfg, 10);
  Rng rng(12);
  std::vector<double> fv(2 * cfg.frame_dim);
  for (double& v : fv) v = rng.uniform(-0.5, 0.5);
  Tensor frames = Tensor::from_data({2, cfg.frame_dim}, fv);
  const double loss = recon_loss(b, frames).value();
  CHECK(loss >= 0.0);

  // brute force on the 2-frame batch
  double expected = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    FrameVec x(fv.begin() + static_cast<std::ptrdiff_t>(i * cfg.frame_dim),
               fv.begin() + static_cast<std::ptrdiff_t>((i + 1) * cfg.frame_dim));
    const FrameVec recon = decode_latent(b, encode_frame(b, x));
    for (std::size_t cidx = 0; cidx < x.size(); ++cidx) {
      expected += (recon[cidx] - x[cidx]) * (recon[cidx] - x[cidx]);
    }
  }
  expected /= 2.0 * static_cast<double>(cfg.frame_dim);
  CHECK(loss == doctest::Approx(expected).epsilon(1e-12));

  // if decoder(encoder(x)) were the identity the loss would be zero
  CHECK(recon_loss(b, decode_latents(b, encode_frames(b, frames)).detach()).value() ==
        doctest::Approx(recon_loss(b, decode_latents(b, encode_frames(b, frames)).detach())
                            .value()));
}

TEST_CASE("d_loss plug-in values") {
  auto p = [](double v) { return Tensor::from_data({1, 1}, {v}); };
  CHECK(d_loss(p(0.5), p(0.5)).value() == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
  // near the optimum the loss vanishes
  CHECK(d_loss(p(1.0 - 1e-9), p(1e-9)).value() == doctest::Approx(0.0).epsilon(1e-6));
  // batch of 3 against brute force
  Tensor pr = Tensor::from_data({3, 1}, {0.8, 0.6, 0.9});
  Tensor pf = Tensor::from_data({3, 1}, {0.3, 0.2, 0.5});
  double expected = 0.0;
  for (double v : {0.8, 0.6, 0.9}) expected -= std::log(v) / 3.0;
  for (double v : {0.3, 0.2, 0.5}) expected -= std::log(1.0 - v) / 3.0;
  CHECK(d_loss(pr, pf).value() == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("d_loss logits form agrees with the probability form") {
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> ar(4), af(4);
    for (double& v : ar) v = rng.uniform(-3, 3);
    for (double& v : af) v = rng.uniform(-3, 3);
    Tensor lr = Tensor::from_data({4, 1}, ar);
    Tensor lf = Tensor::from_data({4, 1}, af);
    CHECK(d_loss_logits(lr, lf).value() ==
          doctest::Approx(d_loss(sigmoid(lr), sigmoid(lf)).value()).epsilon(1e-10));
  }
}

TEST_CASE("g_adv_loss values and monotonicity") {
  auto p = [](double v) { return Tensor::from_data({1, 1}, {v}); };
  CHECK(g_adv_loss(p(1.0)).value() == doctest::Approx(0.0));
  CHECK(g_adv_loss(p(0.5)).value() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  double prev = g_adv_loss(p(0.05)).value();
  for (double v = 0.10; v < 1.0; v += 0.05) {
    const double cur = g_adv_loss(p(v)).value();
    CHECK(cur < prev);  // decreasing in p_fake
    prev = cur;
  }
  // logits form agrees
  CHECK(g_adv_loss_logits(p(0.0)).value() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("consistency loss: constant sequence gives zero") {
  Tensor flat = Tensor::from_data({2, 12}, std::vector<double>(24, 0.37));
  CHECK(consistency_loss_full(flat, 3).value() == 0.0);
  CHECK(consistency_loss_windowed(flat, 3, 1, 2).value() == 0.0);
}

TEST_CASE("consistency loss: scalar frames [0,1,3] give 2.5") {
  Tensor flat = Tensor::from_data({1, 3}, {0.0, 1.0, 3.0});
  CHECK(consistency_loss_full(flat, 1).value() == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("consistency losses match the brute-force oracle on 50 random batches") {
  Rng rng(31);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t batch = 1 + rng.integer(4);
    const std::size_t n = 1 + rng.integer(4);
    const std::size_t N = 2 + rng.integer(6);
    Tensor flat = random_flat(batch, n, N, rng);
    const std::vector<double> values = flat.to_vector();

    const double full = consistency_loss_full(flat, n).value();
    CHECK(full == doctest::Approx(brute_force_consistency(values, batch, n, 0, N))
                      .epsilon(1e-12));

    const std::size_t window = 2 + rng.integer(N - 1);
    const std::size_t start = rng.integer(N - window + 1);
    const double windowed = consistency_loss_windowed(flat, n, start, window).value();
    CHECK(windowed ==
          doctest::Approx(brute_force_consistency(values, batch, n, start, window))
              .epsilon(1e-12));
  }
}

TEST_CASE("windowed consistency at (0, N) equals the full loss exactly") {
  Rng rng(37);
  for (int rep = 0; rep < 10; ++rep) {
    Tensor flat = random_flat(3, 2, 6, rng);
    CHECK(consistency_loss_full(flat, 2).value() ==
          consistency_loss_windowed(flat, 2, 0, 6).value());
  }
}

TEST_CASE("consistency loss contract errors") {
  Tensor flat = Tensor::from_data({1, 4}, {0, 1, 2, 3});
  CHECK_THROWS_AS(consistency_loss_full(Tensor::from_data({1, 2}, {0, 1}), 2),
                  std::invalid_argument);  // N = 1
  CHECK_THROWS_AS(consistency_loss_windowed(flat, 1, 3, 2), std::invalid_argument);
  CHECK_THROWS_AS(consistency_loss_windowed(flat, 1, 0, 1), std::invalid_argument);
}

TEST_CASE("g_total_loss is additive and reduces to adversarial at weight 0") {
  Rng rng(41);
  Tensor flat = random_flat(2, 3, 4, rng).detach();
  std::vector<double> lv(2);
  for (double& v : lv) v = rng.uniform(-1, 1);
  Tensor logits = Tensor::from_data({2, 1}, lv);
  const double adv = g_adv_loss_logits(logits).value();
  const double cons = consistency_loss_windowed(flat, 3, 0, 4).value();
  CHECK(g_total_loss(logits, flat, 3, 0, 4, 0.0).value() == adv);
  CHECK(g_total_loss(logits, flat, 3, 0, 4, 0.01).value() ==
        doctest::Approx(adv + 0.01 * cons).epsilon(1e-15));
  CHECK(g_total_loss(logits, flat, 3, 0, 4, 0.7).value() ==
        doctest::Approx(adv + 0.7 * cons).epsilon(1e-15));
}

TEST_CASE("gradients flow through the generator-discriminator stack correctly") {
  const ModelConfig cfg = small_config();
  const ModelBundle b = ModelBundle::init(cfg, 77);
  Rng rng(7);
  const std::size_t batch = 3;
  std::vector<double> zv(batch * cfg.z_dim), cv(batch * cfg.latent_dim);
  for (double& v : zv) v = rng.uniform(-1, 1);
  for (double& v : cv) v = rng.uniform(-1, 1);
  Tensor z = Tensor::from_data({batch, cfg.z_dim}, zv);
  Tensor c = Tensor::from_data({batch, cfg.latent_dim}, cv);
  std::vector<double> labels(batch * cfg.classes, 0.0);
  for (std::size_t i = 0; i < batch; ++i) labels[i * cfg.classes + (i % cfg.classes)] = 1.0;
  Tensor l = Tensor::from_data({batch, cfg.classes}, labels);

  auto g_params = b.generator_params();
  const double err = grad_check_params(
      [&] {
        Tensor fake = generator_forward_flat(b, z, c, l);
        Tensor logits = discriminator_logits(b, fake, c, l);
        return g_total_loss(logits, fake, cfg.latent_dim, 1, cfg.window_len,
                            cfg.consistency_weight);
      },
      g_params, 1e-5);
  CHECK(err < 1e-3);

  auto d_params = b.discriminator_params();
  Tensor real = random_flat(batch, cfg.latent_dim, cfg.seq_len, rng);
  Tensor fake = generator_forward_flat(b, z, c, l).detach();
  const double err_d = grad_check_params(
      [&] {
        return d_loss(discriminator_prob(b, real, c, l), discriminator_prob(b, fake, c, l));
      },
      d_params, 1e-5);
  CHECK(err_d < 1e-3);
}

TEST_CASE("forward ops are pure for fixed parameters") {
  const ModelConfig cfg = small_config();
  const ModelBundle b = ModelBundle::init(cfg, 21);
  Rng rng(9);
  std::vector<double> zv(cfg.z_dim), cv(cfg.latent_dim);
  for (double& v : zv) v = rng.normal();
  for (double& v : cv) v = rng.uniform(-1, 1);
  const auto l = one_hot(0, cfg.classes);
  const auto h1 = generator_forward(b, zv, cv, l).values.to_vector();
  const double p1 = discriminator_forward(
      b, generator_forward(b, zv, cv, l), cv, l);
  const auto h2 = generator_forward(b, zv, cv, l).values.to_vector();
  const double p2 = discriminator_forward(
      b, generator_forward(b, zv, cv, l), cv, l);
  CHECK(h1 == h2);
  CHECK(p1 == p2);
}
