#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "actgen/data.hpp"
#include "actgen/model.hpp"

namespace actgen {

// Inputs are in the model's normalized coordinate space (the space the
// decoder emits). Thread-safe against a read-only bundle.

struct GenerationRequest {
  FrameVec initial_frame;
  int label = 0;
  std::optional<std::vector<double>> z;  // sampled from the seed when absent
  std::uint64_t seed = 0;
};

struct ChainRequest {
  FrameVec initial_frame;
  std::vector<int> labels;  // one action class per segment, applied in order
  // Optional explicit noise per segment; missing entries are sampled.
  std::vector<std::optional<std::vector<double>>> z_per_segment;
  std::uint64_t seed = 0;
};

// Encode the initial frame, run the generator on (z, c, one-hot label),
// decode every latent frame. Output has exactly cfg.seq_len frames.
ActionSequence generate(const ModelBundle& b, const ModelConfig& cfg,
                        const GenerationRequest& req);

// Consecutive actions: segment k > 1 re-encodes the last decoded frame of
// segment k-1 as its initial condition. No junction smoothing is applied;
// continuity comes from the conditioning alone.
std::vector<ActionSequence> chain(const ModelBundle& b, const ModelConfig& cfg,
                                  const ChainRequest& req);

}  // namespace actgen
