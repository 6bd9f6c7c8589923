#include "actgen/data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace actgen {

namespace {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double frame_l2(const FrameVec& a, const FrameVec& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace

void Dataset::validate() const {
  const std::size_t d = frame_dim();
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    const auto& seq = sequences[s];
    if (seq.label < 0 || static_cast<std::size_t>(seq.label) >= classes) {
      throw std::invalid_argument("dataset: sequence " + std::to_string(s) +
                                  " has label " + std::to_string(seq.label) +
                                  " outside [0, " + std::to_string(classes) + ")");
    }
    for (const auto& f : seq.frames) {
      if (f.size() != d) {
        throw std::invalid_argument("dataset: sequence " + std::to_string(s) +
                                    " has a frame of width " + std::to_string(f.size()) +
                                    ", expected " + std::to_string(d));
      }
      for (double v : f) {
        if (!std::isfinite(v)) {
          throw std::invalid_argument("dataset: sequence " + std::to_string(s) +
                                      " contains a non-finite coordinate");
        }
      }
    }
  }
}

// ---- canonical JSON ----------------------------------------------------------

std::string to_canonical_json(const Dataset& ds) {
  nlohmann::json j;
  j["classes"] = ds.classes;
  j["joints"] = ds.joints;
  j["dims"] = ds.dims;
  nlohmann::json seqs = nlohmann::json::array();
  for (const auto& seq : ds.sequences) {
    nlohmann::json s;
    s["label"] = seq.label;
    nlohmann::json frames = nlohmann::json::array();
    for (const auto& f : seq.frames) frames.push_back(f);
    s["frames"] = std::move(frames);
    seqs.push_back(std::move(s));
  }
  j["sequences"] = std::move(seqs);
  return j.dump();
}

Dataset dataset_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  Dataset ds;
  ds.classes = j.at("classes").get<std::size_t>();
  ds.joints = j.at("joints").get<std::size_t>();
  ds.dims = j.at("dims").get<std::size_t>();
  for (const auto& s : j.at("sequences")) {
    ActionSequence seq;
    seq.label = s.at("label").get<int>();
    for (const auto& f : s.at("frames")) {
      seq.frames.push_back(f.get<FrameVec>());
    }
    ds.sequences.push_back(std::move(seq));
  }
  ds.validate();
  return ds;
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  os << to_canonical_json(ds);
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  return dataset_from_json(buf.str());
}

void export_csv(std::ostream& os, const Dataset& ds) {
  os << "seq_id,frame_idx,label";
  for (std::size_t c = 0; c < ds.frame_dim(); ++c) os << ",c" << c;
  os << "\n";
  for (std::size_t s = 0; s < ds.sequences.size(); ++s) {
    const auto& seq = ds.sequences[s];
    for (std::size_t f = 0; f < seq.frames.size(); ++f) {
      os << s << "," << f << "," << seq.label;
      for (double v : seq.frames[f]) os << "," << format_double(v);
      os << "\n";
    }
  }
}

// ---- NTU .skeleton ------------------------------------------------------------

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-empty line; throws on EOF naming the line it expected.
  std::string next(const char* what) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.find_first_not_of(" \t\r\n") != std::string::npos) return line;
    }
    throw NtuParseError(line_no_ + 1, std::string("unexpected end of file, expected ") + what);
  }

  std::size_t line_no() const { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

std::vector<double> parse_fields(const std::string& line, std::size_t line_no) {
  std::vector<double> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) {
    double v = 0.0;
    const char* begin = tok.data();
    const char* end = begin + tok.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end) {
      throw NtuParseError(line_no, "expected number, got '" + tok + "'");
    }
    out.push_back(v);
  }
  return out;
}

long parse_count(LineReader& reader, const char* what) {
  const std::string line = reader.next(what);
  const auto fields = parse_fields(line, reader.line_no());
  if (fields.size() != 1 || fields[0] != std::floor(fields[0]) || fields[0] < 0) {
    throw NtuParseError(reader.line_no(), std::string("expected ") + what);
  }
  return static_cast<long>(fields[0]);
}

}  // namespace

std::vector<FrameVec> parse_ntu_skeleton(std::istream& in) {
  LineReader reader(in);
  const long frame_count = parse_count(reader, "frame count");
  std::vector<FrameVec> frames;
  frames.reserve(static_cast<std::size_t>(frame_count));
  for (long f = 0; f < frame_count; ++f) {
    const long body_count = parse_count(reader, "body count");
    for (long b = 0; b < body_count; ++b) {
      const std::string meta = reader.next("body metadata");
      parse_fields(meta, reader.line_no());  // discarded
      const long joint_count = parse_count(reader, "joint count");
      if (joint_count != static_cast<long>(kNtuJoints)) {
        throw NtuParseError(reader.line_no(), "joint count " + std::to_string(joint_count) +
                                                  ", expected " + std::to_string(kNtuJoints));
      }
      FrameVec frame;
      frame.reserve(kNtuJoints * kNtuCoordDims);
      for (long jt = 0; jt < joint_count; ++jt) {
        const std::string jline = reader.next("joint line");
        const auto fields = parse_fields(jline, reader.line_no());
        if (fields.size() != kNtuJointFields) {
          throw NtuParseError(reader.line_no(),
                              "joint line has " + std::to_string(fields.size()) +
                                  " fields, expected " + std::to_string(kNtuJointFields));
        }
        frame.push_back(fields[0]);
        frame.push_back(fields[1]);
        frame.push_back(fields[2]);
      }
      if (b == 0) frames.push_back(std::move(frame));  // first tracked body only
    }
  }
  return frames;
}

void write_ntu_skeleton(std::ostream& os, const std::vector<FrameVec>& frames) {
  for (const auto& f : frames) {
    if (f.size() != kNtuJoints * kNtuCoordDims) {
      throw std::invalid_argument("write_ntu_skeleton: frame width " +
                                  std::to_string(f.size()) + ", expected " +
                                  std::to_string(kNtuJoints * kNtuCoordDims));
    }
  }
  os << frames.size() << "\n";
  char buf[64];
  for (const auto& frame : frames) {
    os << "1\n";
    os << "0 0 0 0 0 0 0 0 0 2\n";
    os << kNtuJoints << "\n";
    for (std::size_t j = 0; j < kNtuJoints; ++j) {
      std::snprintf(buf, sizeof(buf), "%.6f %.6f %.6f",
                    frame[j * kNtuCoordDims + 0], frame[j * kNtuCoordDims + 1],
                    frame[j * kNtuCoordDims + 2]);
      os << buf << " 0 0 0 0 0 0 0 0 2\n";
    }
  }
}

std::optional<int> ntu_label_from_filename(std::string_view name) {
  // last 'A' followed by digits
  for (std::size_t i = name.size(); i-- > 0;) {
    if (name[i] != 'A') continue;
    std::size_t j = i + 1;
    int value = 0;
    bool any = false;
    while (j < name.size() && name[j] >= '0' && name[j] <= '9') {
      value = value * 10 + (name[j] - '0');
      any = true;
      ++j;
    }
    if (any) return value - 1;
  }
  return std::nullopt;
}

// ---- preprocessing --------------------------------------------------------------

ActionSequence center_sequence(const ActionSequence& seq, std::size_t dims) {
  if (seq.frames.empty()) throw std::invalid_argument("center_sequence: empty sequence");
  ActionSequence out = seq;
  const FrameVec& first = seq.frames.front();
  if (first.size() < dims) throw std::invalid_argument("center_sequence: frame too short");
  for (auto& frame : out.frames) {
    for (std::size_t i = 0; i < frame.size(); ++i) frame[i] -= first[i % dims];
  }
  return out;
}

NormStats compute_norm_stats(const Dataset& train) {
  double max_abs = 0.0;
  for (const auto& seq : train.sequences) {
    const ActionSequence centered = center_sequence(seq, train.dims);
    for (const auto& frame : centered.frames) {
      for (double v : frame) max_abs = std::max(max_abs, std::abs(v));
    }
  }
  NormStats stats;
  stats.scale = max_abs > 0.0 ? 0.9 / max_abs : 1.0;
  return stats;
}

ActionSequence normalize(const ActionSequence& seq, std::size_t dims,
                         const NormStats& stats, bool* degenerate) {
  if (degenerate) *degenerate = false;
  bool all_zero = true;
  for (const auto& frame : seq.frames) {
    for (double v : frame) {
      if (v != 0.0) {
        all_zero = false;
        break;
      }
    }
    if (!all_zero) break;
  }
  if (all_zero) {
    if (degenerate) *degenerate = true;
    return seq;
  }
  ActionSequence out = center_sequence(seq, dims);
  for (auto& frame : out.frames) {
    for (double& v : frame) v *= stats.scale;
  }
  return out;
}

FrameVec normalize_frame(const FrameVec& frame, std::size_t dims, const NormStats& stats) {
  if (frame.size() < dims) throw std::invalid_argument("normalize_frame: frame too short");
  FrameVec out = frame;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (out[i] - frame[i % dims]) * stats.scale;
  return out;
}

ActionSequence resample(const ActionSequence& seq, std::size_t target_len) {
  if (seq.frames.size() < 2) {
    throw std::invalid_argument("resample: need at least 2 frames, got " +
                                std::to_string(seq.frames.size()));
  }
  if (target_len < 2) throw std::invalid_argument("resample: target length must be >= 2");
  if (seq.frames.size() == target_len) return seq;

  ActionSequence out;
  out.label = seq.label;
  out.meta = seq.meta;
  const std::size_t src_len = seq.frames.size();
  const std::size_t width = seq.frames.front().size();
  out.frames.reserve(target_len);
  for (std::size_t k = 0; k < target_len; ++k) {
    const double t = static_cast<double>(k) * static_cast<double>(src_len - 1) /
                     static_cast<double>(target_len - 1);
    std::size_t i0 = static_cast<std::size_t>(t);
    if (i0 >= src_len - 1) i0 = src_len - 2;
    const double frac = t - static_cast<double>(i0);
    FrameVec frame(width);
    const FrameVec& a = seq.frames[i0];
    const FrameVec& b = seq.frames[i0 + 1];
    for (std::size_t c = 0; c < width; ++c) frame[c] = a[c] + frac * (b[c] - a[c]);
    out.frames.push_back(std::move(frame));
  }
  return out;
}

std::vector<double> one_hot(int label, std::size_t classes) {
  if (label < 0 || static_cast<std::size_t>(label) >= classes) {
    throw std::out_of_range("one_hot: label " + std::to_string(label) +
                            " outside [0, " + std::to_string(classes) + ")");
  }
  std::vector<double> v(classes, 0.0);
  v[static_cast<std::size_t>(label)] = 1.0;
  return v;
}

Dataset prepare(const Dataset& raw, std::size_t seq_len, const NormStats& stats) {
  Dataset out;
  out.joints = raw.joints;
  out.dims = raw.dims;
  out.classes = raw.classes;
  out.sequences.reserve(raw.sequences.size());
  for (const auto& seq : raw.sequences) {
    out.sequences.push_back(resample(normalize(seq, raw.dims, stats), seq_len));
  }
  return out;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, std::size_t holdout_every) {
  Dataset train, holdout;
  train.joints = holdout.joints = ds.joints;
  train.dims = holdout.dims = ds.dims;
  train.classes = holdout.classes = ds.classes;
  for (std::size_t i = 0; i < ds.sequences.size(); ++i) {
    if (holdout_every > 0 && i % holdout_every == holdout_every - 1) {
      holdout.sequences.push_back(ds.sequences[i]);
    } else {
      train.sequences.push_back(ds.sequences[i]);
    }
  }
  return {std::move(train), std::move(holdout)};
}

// ---- synthetic actions -----------------------------------------------------------

namespace {

// 5-joint stick figure: hip, torso, head, left hand, right hand; (x, y) each.
constexpr std::size_t kSynthJoints = 5;
constexpr std::size_t kSynthDims = 2;

std::size_t ch(std::size_t joint, std::size_t coord) { return joint * kSynthDims + coord; }

double channel_value(const SyntheticActionSpec::Channel& c, double t) {
  return c.offset + c.ramp * t +
         c.amplitude * std::sin(2.0 * std::numbers::pi * c.frequency * t + c.phase);
}

}  // namespace

std::vector<SyntheticActionSpec> default_action_specs() {
  const double base[kSynthJoints][kSynthDims] = {
      {0.0, 0.0},     // hip
      {0.0, 0.45},    // torso
      {0.0, 0.9},     // head
      {-0.45, 0.65},  // left hand
      {0.45, 0.65},   // right hand
  };
  auto make_base = [&] {
    SyntheticActionSpec spec;
    spec.channels.resize(kSynthJoints * kSynthDims);
    for (std::size_t j = 0; j < kSynthJoints; ++j) {
      spec.channels[ch(j, 0)].offset = base[j][0];
      spec.channels[ch(j, 1)].offset = base[j][1];
    }
    return spec;
  };

  SyntheticActionSpec raise = make_base();
  raise.class_id = 0;
  raise.name = "raise";
  raise.channels[ch(3, 1)].ramp = 0.7;
  raise.channels[ch(4, 1)].ramp = 0.7;
  raise.channels[ch(3, 0)].ramp = 0.2;
  raise.channels[ch(4, 0)].ramp = -0.2;
  raise.channels[ch(1, 1)].ramp = 0.05;

  SyntheticActionSpec squat = make_base();
  squat.class_id = 1;
  squat.name = "squat";
  for (std::size_t j = 0; j < kSynthJoints; ++j) {
    auto& c = squat.channels[ch(j, 1)];
    c.amplitude = (j < 3) ? -0.4 : -0.3;  // body dips, hands follow
    c.frequency = 0.5;                    // one dip over the clip
  }
  squat.channels[ch(3, 0)].amplitude = 0.12;
  squat.channels[ch(3, 0)].frequency = 0.5;
  squat.channels[ch(4, 0)].amplitude = -0.12;
  squat.channels[ch(4, 0)].frequency = 0.5;

  SyntheticActionSpec wave = make_base();
  wave.class_id = 2;
  wave.name = "wave";
  wave.channels[ch(4, 1)].ramp = 0.45;
  wave.channels[ch(4, 0)].amplitude = 0.35;
  wave.channels[ch(4, 0)].frequency = 1.5;
  wave.channels[ch(2, 0)].amplitude = 0.05;
  wave.channels[ch(2, 0)].frequency = 1.5;

  return {raise, squat, wave};
}

std::vector<FrameVec> mean_trajectory(const SyntheticActionSpec& spec, std::size_t seq_len) {
  std::vector<FrameVec> out;
  out.reserve(seq_len);
  for (std::size_t k = 0; k < seq_len; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(seq_len - 1);
    FrameVec frame(spec.channels.size());
    for (std::size_t c = 0; c < spec.channels.size(); ++c) {
      frame[c] = channel_value(spec.channels[c], t);
    }
    out.push_back(std::move(frame));
  }
  return out;
}

Dataset synth_generate(const std::vector<SyntheticActionSpec>& specs, std::size_t joints,
                       std::size_t dims, std::size_t per_class, std::size_t seq_len,
                       std::uint64_t seed) {
  if (specs.size() < 2) throw std::invalid_argument("synth_generate: need at least 2 classes");
  if (seq_len < 2) throw std::invalid_argument("synth_generate: seq_len must be >= 2");
  const std::size_t width = joints * dims;
  double max_style = 0.0;
  for (const auto& spec : specs) {
    if (spec.channels.size() != width) {
      throw std::invalid_argument("synth_generate: spec '" + spec.name + "' has " +
                                  std::to_string(spec.channels.size()) + " channels, expected " +
                                  std::to_string(width));
    }
    max_style = std::max(max_style, spec.style_scale);
  }
  // Classes must stay distinguishable against the style noise.
  std::vector<std::vector<FrameVec>> means;
  means.reserve(specs.size());
  for (const auto& spec : specs) means.push_back(mean_trajectory(spec, seq_len));
  for (std::size_t a = 0; a < specs.size(); ++a) {
    for (std::size_t b = a + 1; b < specs.size(); ++b) {
      double dist = 0.0;
      for (std::size_t k = 0; k < seq_len; ++k) dist += frame_l2(means[a][k], means[b][k]);
      dist /= static_cast<double>(seq_len);
      if (dist <= max_style) {
        throw std::invalid_argument("synth_generate: classes '" + specs[a].name + "' and '" +
                                    specs[b].name + "' have mean distance " +
                                    std::to_string(dist) + " <= style scale " +
                                    std::to_string(max_style));
      }
    }
  }

  Dataset ds;
  ds.joints = joints;
  ds.dims = dims;
  ds.classes = specs.size();
  Rng rng(seed);
  for (const auto& spec : specs) {
    for (std::size_t s = 0; s < per_class; ++s) {
      // Smooth per-sample style: constant shift + low-order basis functions.
      std::vector<std::array<double, 4>> coef(width);
      for (auto& c : coef) {
        for (double& v : c) v = rng.normal();
      }
      ActionSequence seq;
      seq.label = spec.class_id;
      seq.meta = "synth:" + spec.name + ":" + std::to_string(s);
      seq.frames.reserve(seq_len);
      for (std::size_t k = 0; k < seq_len; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(seq_len - 1);
        FrameVec frame(width);
        for (std::size_t c = 0; c < width; ++c) {
          const double style =
              0.6 * coef[c][0] + 0.5 * coef[c][1] * std::sin(std::numbers::pi * t) +
              0.35 * coef[c][2] * std::sin(2.0 * std::numbers::pi * t) + 0.4 * coef[c][3] * t;
          frame[c] = channel_value(spec.channels[c], t) + spec.style_scale * style;
        }
        seq.frames.push_back(std::move(frame));
      }
      ds.sequences.push_back(std::move(seq));
    }
  }
  ds.validate();
  return ds;
}

// ---- batching ----------------------------------------------------------------------

BatchStream::BatchStream(const Dataset& prepared, std::size_t batch_size, std::uint64_t seed)
    : ds_(&prepared), batch_size_(batch_size) {
  if (batch_size == 0 || batch_size > prepared.sequences.size()) {
    throw std::invalid_argument("BatchStream: batch size " + std::to_string(batch_size) +
                                " not in [1, " + std::to_string(prepared.sequences.size()) + "]");
  }
  order_.resize(prepared.sequences.size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  Rng rng(seed);
  rng.shuffle(order_);
}

std::size_t BatchStream::batches_per_epoch() const {
  return (order_.size() + batch_size_ - 1) / batch_size_;
}

std::optional<Batch> BatchStream::next() {
  if (pos_ >= order_.size()) return std::nullopt;
  const std::size_t count = std::min(batch_size_, order_.size() - pos_);
  const std::size_t n = ds_->sequences[order_[pos_]].frames.size();
  const std::size_t d = ds_->frame_dim();
  std::vector<double> frames;
  frames.reserve(count * n * d);
  std::vector<double> labels(count * ds_->classes, 0.0);
  Batch batch;
  batch.size = count;
  for (std::size_t b = 0; b < count; ++b) {
    const auto& seq = ds_->sequences[order_[pos_ + b]];
    if (seq.frames.size() != n) {
      throw std::invalid_argument("BatchStream: sequences must share one length");
    }
    for (const auto& f : seq.frames) frames.insert(frames.end(), f.begin(), f.end());
    labels[b * ds_->classes + static_cast<std::size_t>(seq.label)] = 1.0;
    batch.label_ids.push_back(seq.label);
  }
  pos_ += count;
  batch.frames = Tensor::from_data({count, n, d}, std::move(frames));
  batch.labels = Tensor::from_data({count, ds_->classes}, std::move(labels));
  return batch;
}

}  // namespace actgen
