#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "actgen/random.hpp"
#include "actgen/tensor.hpp"

namespace actgen {

// One pose: joints * dims coordinates, joint-major.
using FrameVec = std::vector<double>;

struct ActionSequence {
  std::vector<FrameVec> frames;
  int label = -1;
  std::string meta;  // source id
};

struct Dataset {
  std::size_t joints = 0;
  std::size_t dims = 0;  // coordinates per joint
  std::size_t classes = 0;
  std::vector<ActionSequence> sequences;

  std::size_t frame_dim() const { return joints * dims; }
  // Checks labels < classes, consistent frame widths, finite coordinates.
  void validate() const;
};

// ---- canonical JSON interchange -------------------------------------------
// {"classes": K, "joints": J, "dims": D,
//  "sequences": [{"label": int, "frames": [[coord, ...], ...]}, ...]}
// Serialization is canonical (sorted keys, shortest round-trip doubles), so
// write -> read -> write is byte-identical.

std::string to_canonical_json(const Dataset& ds);
Dataset dataset_from_json(const std::string& text);
void save_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& path);

// CSV export, one row per frame: seq_id, frame_idx, label, coords...
void export_csv(std::ostream& os, const Dataset& ds);

// ---- NTU .skeleton text format ---------------------------------------------
// Layout: frame count line; per frame a body count line; per body one
// metadata line, a joint count line (must be 25), then 25 joint lines whose
// first three fields are x y z (the remaining 9 fields are parsed and
// discarded). Only the first tracked body is kept.

inline constexpr std::size_t kNtuJoints = 25;
inline constexpr std::size_t kNtuCoordDims = 3;
inline constexpr std::size_t kNtuJointFields = 12;
inline constexpr std::size_t kNtuBodyMetaFields = 10;

class NtuParseError : public std::runtime_error {
 public:
  NtuParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Frames of the first body, flattened to 75 coordinates each.
std::vector<FrameVec> parse_ntu_skeleton(std::istream& in);
void write_ntu_skeleton(std::ostream& os, const std::vector<FrameVec>& frames);

// "S001C002P003R002A045" -> 44; nullopt when no Annn token is present.
std::optional<int> ntu_label_from_filename(std::string_view name);

// ---- preprocessing -----------------------------------------------------------

struct NormStats {
  double scale = 1.0;  // multiplier applied after root-centering
};

// Root-centering: subtract joint 0 of frame 0 from every joint of every frame.
ActionSequence center_sequence(const ActionSequence& seq, std::size_t dims);

// Scale chosen so the max per-coordinate magnitude of the centered training
// set lands at 0.9 (inside the tanh encoder's range).
NormStats compute_norm_stats(const Dataset& train);

// Center then scale. A degenerate all-zero sequence is returned unchanged
// and flagged.
ActionSequence normalize(const ActionSequence& seq, std::size_t dims,
                         const NormStats& stats, bool* degenerate = nullptr);

// Frame treated as the start of its own sequence: centered on its root joint.
FrameVec normalize_frame(const FrameVec& frame, std::size_t dims, const NormStats& stats);

// Linear interpolation at target_len uniform time points; endpoints exact.
ActionSequence resample(const ActionSequence& seq, std::size_t target_len);

std::vector<double> one_hot(int label, std::size_t classes);

// normalize + resample every sequence.
Dataset prepare(const Dataset& raw, std::size_t seq_len, const NormStats& stats);

// Deterministic stratification: every holdout_every-th sequence (by index)
// goes to the holdout split. Returns (train, holdout).
std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, std::size_t holdout_every = 5);

// ---- synthetic action families --------------------------------------------------
// Desk-scale stand-in for motion capture data: each class is a parametric
// trajectory family (offset + ramp + sinusoid per coordinate channel), each
// sample adds a smooth low-frequency style perturbation.

struct SyntheticActionSpec {
  int class_id = 0;
  std::string name;
  struct Channel {
    double offset = 0.0;
    double ramp = 0.0;
    double amplitude = 0.0;
    double frequency = 0.0;  // cycles over the unit interval
    double phase = 0.0;
  };
  std::vector<Channel> channels;  // joints * dims entries
  double style_scale = 0.08;
};

// Built-in 3-class set over 5 joints x 2 coords: "raise", "squat", "wave".
std::vector<SyntheticActionSpec> default_action_specs();

// Noise-free class trajectory at seq_len uniform time points.
std::vector<FrameVec> mean_trajectory(const SyntheticActionSpec& spec, std::size_t seq_len);

// Deterministic per seed. Throws if any two class means sit closer than the
// largest style scale (classes must stay distinguishable).
Dataset synth_generate(const std::vector<SyntheticActionSpec>& specs, std::size_t joints,
                       std::size_t dims, std::size_t per_class, std::size_t seq_len,
                       std::uint64_t seed);

// ---- batching ---------------------------------------------------------------------

struct Batch {
  Tensor frames;  // [B, N, d]
  Tensor labels;  // [B, K] one-hot rows
  std::vector<int> label_ids;
  std::size_t size = 0;
};

// One epoch: shuffled without replacement, deterministic per seed. The final
// batch may be short when the dataset size is not a multiple of batch_size.
class BatchStream {
 public:
  BatchStream(const Dataset& prepared, std::size_t batch_size, std::uint64_t seed);
  std::optional<Batch> next();
  std::size_t batches_per_epoch() const;

 private:
  const Dataset* ds_;
  std::size_t batch_size_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

}  // namespace actgen
