#include "actgen/generation.hpp"

#include <stdexcept>
#include <string>

namespace actgen {

namespace {

std::vector<double> noise_for_segment(const std::optional<std::vector<double>>& explicit_z,
                                      std::size_t z_dim, Rng& rng) {
  if (explicit_z) {
    if (explicit_z->size() != z_dim) {
      throw std::invalid_argument("generate: z has " + std::to_string(explicit_z->size()) +
                                  " entries, expected " + std::to_string(z_dim));
    }
    return *explicit_z;
  }
  std::vector<double> z(z_dim);
  for (double& v : z) v = rng.normal();
  return z;
}

ActionSequence run_generator(const ModelBundle& b, const ModelConfig& cfg,
                             const FrameVec& initial, int label,
                             const std::vector<double>& z) {
  const std::vector<double> c = encode_frame(b, initial);
  const LatentSequence h = generator_forward(b, z, c, one_hot(label, cfg.classes));
  ActionSequence out;
  out.label = label;
  out.frames.reserve(cfg.seq_len);
  for (std::size_t j = 0; j < cfg.seq_len; ++j) {
    out.frames.push_back(decode_latent(b, h.frame(j)));
  }
  return out;
}

void check_request(const ModelBundle& b, const ModelConfig& cfg, const FrameVec& initial,
                   int label) {
  if (initial.size() != cfg.frame_dim) {
    throw std::invalid_argument("generate: initial frame has " +
                                std::to_string(initial.size()) + " coordinates, expected " +
                                std::to_string(cfg.frame_dim));
  }
  if (label < 0 || static_cast<std::size_t>(label) >= cfg.classes) {
    throw std::out_of_range("generate: label " + std::to_string(label) + " outside [0, " +
                            std::to_string(cfg.classes) + ")");
  }
  if (!b.finite()) {
    throw std::invalid_argument("generate: bundle holds non-finite parameters");
  }
}

}  // namespace

ActionSequence generate(const ModelBundle& b, const ModelConfig& cfg,
                        const GenerationRequest& req) {
  check_request(b, cfg, req.initial_frame, req.label);
  Rng rng(req.seed);
  const std::vector<double> z = noise_for_segment(req.z, cfg.z_dim, rng);
  ActionSequence out = run_generator(b, cfg, req.initial_frame, req.label, z);
  out.meta = "generated:label" + std::to_string(req.label);
  return out;
}

std::vector<ActionSequence> chain(const ModelBundle& b, const ModelConfig& cfg,
                                  const ChainRequest& req) {
  if (req.labels.empty()) throw std::invalid_argument("chain: label list is empty");
  if (!req.z_per_segment.empty() && req.z_per_segment.size() != req.labels.size()) {
    throw std::invalid_argument("chain: z list length must match label list");
  }
  Rng rng(req.seed);
  std::vector<ActionSequence> segments;
  segments.reserve(req.labels.size());
  FrameVec initial = req.initial_frame;
  for (std::size_t k = 0; k < req.labels.size(); ++k) {
    check_request(b, cfg, initial, req.labels[k]);
    const std::vector<double> z = noise_for_segment(
        req.z_per_segment.empty() ? std::nullopt : req.z_per_segment[k], cfg.z_dim, rng);
    ActionSequence seg = run_generator(b, cfg, initial, req.labels[k], z);
    seg.meta = "generated:segment" + std::to_string(k) + ":label" +
               std::to_string(req.labels[k]);
    initial = seg.frames.back();  // next segment starts where this one ended
    segments.push_back(std::move(seg));
  }
  return segments;
}

}  // namespace actgen
