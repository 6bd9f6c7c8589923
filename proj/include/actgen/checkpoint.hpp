#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "actgen/data.hpp"
#include "actgen/model.hpp"
#include "actgen/nn.hpp"

namespace actgen {

// Versioned JSON checkpoint: model configuration, normalization statistics,
// every network layer (name -> shape + row-major values) and, when present,
// Adam state per optimizer. Serialization is canonical (sorted keys, shortest
// round-trip doubles), so identical training runs produce identical bytes.
struct Checkpoint {
  static constexpr int kFormatVersion = 1;

  ModelConfig config;
  NormStats norm;
  ModelBundle bundle;

  struct OptimState {
    std::size_t step_count = 0;
    AdamConfig adam;
    std::vector<std::vector<double>> m, v;
  };
  std::optional<OptimState> autoencoder_opt, discriminator_opt, generator_opt;
};

std::string checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const std::string& text);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace actgen
