#include "actgen/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "actgen/generation.hpp"

namespace actgen {

namespace {

double frame_l2(const FrameVec& a, const FrameVec& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

// ---- eigensolver ---------------------------------------------------------------

void eigen_symmetric(const std::vector<double>& matrix, std::size_t n,
                     std::vector<double>& values, std::vector<double>& vectors) {
  if (matrix.size() != n * n) throw std::invalid_argument("eigen_symmetric: size mismatch");
  std::vector<double> a = matrix;
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  auto off_diag = [&] {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) s += a[p * n + q] * a[p * n + q];
    }
    return s;
  };

  const double tol = 1e-30;
  for (int sweep = 0; sweep < 100 && off_diag() > tol; ++sweep) {
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (std::abs(apq) < 1e-300) continue;
        const double tau = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p], vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return a[x * n + x] > a[y * n + y];
  });
  values.resize(n);
  vectors.assign(n * n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    values[k] = a[order[k] * n + order[k]];
    for (std::size_t i = 0; i < n; ++i) vectors[k * n + i] = v[i * n + order[k]];
  }
}

// ---- PCA ------------------------------------------------------------------------

PcaModel pca_fit(const std::vector<std::vector<double>>& points) {
  if (points.size() < 3) throw std::invalid_argument("pca_fit: need at least 3 points");
  const std::size_t n = points[0].size();
  if (n < 2) throw std::invalid_argument("pca_fit: need dimension >= 2");
  for (const auto& p : points) {
    if (p.size() != n) throw std::invalid_argument("pca_fit: inconsistent point dims");
  }

  PcaModel model;
  model.mean.assign(n, 0.0);
  for (const auto& p : points) {
    for (std::size_t i = 0; i < n; ++i) model.mean[i] += p[i];
  }
  for (double& m : model.mean) m /= static_cast<double>(points.size());

  std::vector<double> cov(n * n, 0.0);
  for (const auto& p : points) {
    for (std::size_t i = 0; i < n; ++i) {
      const double di = p[i] - model.mean[i];
      for (std::size_t j = i; j < n; ++j) {
        cov[i * n + j] += di * (p[j] - model.mean[j]);
      }
    }
  }
  const double denom = static_cast<double>(points.size() - 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      cov[i * n + j] /= denom;
      cov[j * n + i] = cov[i * n + j];
    }
  }

  std::vector<double> values, vectors;
  eigen_symmetric(cov, n, values, vectors);
  if (values[0] <= 1e-300) {
    throw std::invalid_argument("pca_fit: degenerate data (zero variance)");
  }

  auto take_axis = [&](std::size_t k) {
    std::vector<double> axis(vectors.begin() + static_cast<std::ptrdiff_t>(k * n),
                             vectors.begin() + static_cast<std::ptrdiff_t>((k + 1) * n));
    // sign convention: largest-magnitude component positive
    std::size_t arg = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (std::abs(axis[i]) > std::abs(axis[arg])) arg = i;
    }
    if (axis[arg] < 0.0) {
      for (double& x : axis) x = -x;
    }
    return axis;
  };
  model.axis0 = take_axis(0);
  model.axis1 = take_axis(1);
  return model;
}

std::array<double, 2> pca_project_point(const PcaModel& model, const std::vector<double>& p) {
  if (p.size() != model.dim()) throw std::invalid_argument("pca_project_point: dim mismatch");
  double x = 0.0, y = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - model.mean[i];
    x += d * model.axis0[i];
    y += d * model.axis1[i];
  }
  return {x, y};
}

std::vector<std::array<double, 2>> project_trajectory(const PcaModel& model,
                                                      const LatentSequence& h) {
  std::vector<std::array<double, 2>> out;
  out.reserve(h.seq_len());
  for (std::size_t j = 0; j < h.seq_len(); ++j) {
    out.push_back(pca_project_point(model, h.frame(j)));
  }
  return out;
}

// ---- metrics -----------------------------------------------------------------------

double diversity_metric(const std::vector<ActionSequence>& sequences) {
  if (sequences.size() < 2) {
    throw std::invalid_argument("diversity_metric: need at least 2 sequences");
  }
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < sequences.size(); ++a) {
    for (std::size_t b = a + 1; b < sequences.size(); ++b) {
      const auto& fa = sequences[a].frames;
      const auto& fb = sequences[b].frames;
      if (fa.size() != fb.size()) {
        throw std::invalid_argument("diversity_metric: sequence lengths differ");
      }
      double acc = 0.0;
      for (std::size_t j = 0; j < fa.size(); ++j) acc += frame_l2(fa[j], fb[j]);
      total += acc / static_cast<double>(fa.size());
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

double jerk_metric(const ActionSequence& seq) {
  if (seq.frames.size() < 2) {
    throw std::invalid_argument("jerk_metric: need at least 2 frames");
  }
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < seq.frames.size(); ++j) {
    const auto& a = seq.frames[j];
    const auto& b = seq.frames[j + 1];
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[i];
      acc += d * d;
    }
  }
  return acc / static_cast<double>(seq.frames.size() - 1);
}

// ---- classifier ----------------------------------------------------------------------

void CentroidClassifier::fit(const Dataset& prepared) {
  if (prepared.sequences.empty()) throw std::invalid_argument("classifier: empty dataset");
  const std::size_t len = prepared.sequences.front().frames.size();
  const std::size_t width = prepared.frame_dim() * len;
  centroids_.assign(prepared.classes, std::vector<double>(width, 0.0));
  std::vector<std::size_t> counts(prepared.classes, 0);
  for (const auto& seq : prepared.sequences) {
    if (seq.frames.size() != len) {
      throw std::invalid_argument("classifier: sequences must share one length");
    }
    auto& centroid = centroids_[static_cast<std::size_t>(seq.label)];
    std::size_t k = 0;
    for (const auto& f : seq.frames) {
      for (double v : f) centroid[k++] += v;
    }
    ++counts[static_cast<std::size_t>(seq.label)];
  }
  for (std::size_t c = 0; c < centroids_.size(); ++c) {
    if (counts[c] == 0) {
      throw std::invalid_argument("classifier: class " + std::to_string(c) + " has no samples");
    }
    for (double& v : centroids_[c]) v /= static_cast<double>(counts[c]);
  }
}

int CentroidClassifier::classify(const ActionSequence& seq) const {
  if (centroids_.empty()) throw std::logic_error("classifier: fit() not called");
  std::vector<double> flat;
  flat.reserve(centroids_[0].size());
  for (const auto& f : seq.frames) flat.insert(flat.end(), f.begin(), f.end());
  if (flat.size() != centroids_[0].size()) {
    throw std::invalid_argument("classifier: trajectory width mismatch");
  }
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids_.size(); ++c) {
    double acc = 0.0;
    for (std::size_t i = 0; i < flat.size(); ++i) {
      const double d = flat[i] - centroids_[c][i];
      acc += d * d;
    }
    if (acc < best_dist) {
      best_dist = acc;
      best = static_cast<int>(c);
    }
  }
  return best;
}

double CentroidClassifier::accuracy(const Dataset& prepared) const {
  if (prepared.sequences.empty()) throw std::invalid_argument("classifier: empty dataset");
  std::size_t hits = 0;
  for (const auto& seq : prepared.sequences) {
    if (classify(seq) == seq.label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(prepared.sequences.size());
}

// ---- evaluation --------------------------------------------------------------------

namespace {

struct ReconStats {
  double frame_mse = 0.0;        // mean |x - recon|^2 / d
  double frame_variance = 0.0;   // per-coordinate variance averaged over coords
  double noise_floor = 0.0;      // mean |x - recon|_2 per frame
};

ReconStats recon_stats(const ModelBundle& bundle, const Dataset& holdout) {
  ReconStats stats;
  const std::size_t d = holdout.frame_dim();
  std::vector<double> mean(d, 0.0), sq_mean(d, 0.0);
  std::size_t count = 0;
  for (const auto& seq : holdout.sequences) {
    for (const auto& f : seq.frames) {
      const FrameVec recon = decode_latent(bundle, encode_frame(bundle, f));
      double se = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double diff = recon[i] - f[i];
        se += diff * diff;
        mean[i] += f[i];
        sq_mean[i] += f[i] * f[i];
      }
      stats.frame_mse += se / static_cast<double>(d);
      stats.noise_floor += std::sqrt(se);
      ++count;
    }
  }
  stats.frame_mse /= static_cast<double>(count);
  stats.noise_floor /= static_cast<double>(count);
  double var = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double m = mean[i] / static_cast<double>(count);
    var += sq_mean[i] / static_cast<double>(count) - m * m;
  }
  stats.frame_variance = var / static_cast<double>(d);
  return stats;
}

const FrameVec& random_initial_frame(const Dataset& ds, Rng& rng) {
  const auto& seq = ds.sequences[rng.integer(ds.sequences.size())];
  return seq.frames.front();
}

double label_accuracy(const ModelBundle& bundle, const ModelConfig& cfg,
                      const CentroidClassifier& clf, const Dataset& pool,
                      std::size_t generations, Rng& rng) {
  std::size_t hits = 0;
  for (std::size_t g = 0; g < generations; ++g) {
    GenerationRequest req;
    req.initial_frame = random_initial_frame(pool, rng);
    req.label = static_cast<int>(rng.integer(cfg.classes));
    std::vector<double> z(cfg.z_dim);
    for (double& v : z) v = rng.normal();
    req.z = std::move(z);
    const ActionSequence seq = generate(bundle, cfg, req);
    if (clf.classify(seq) == req.label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(generations);
}

double mean_pairwise(const std::vector<std::array<double, 2>>& pts) {
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < pts.size(); ++a) {
    for (std::size_t b = a + 1; b < pts.size(); ++b) {
      total += std::hypot(pts[a][0] - pts[b][0], pts[a][1] - pts[b][1]);
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

}  // namespace

nlohmann::json evaluate_model(const Checkpoint& ckpt, const Dataset& raw,
                              const EvalOptions& opts) {
  const ModelConfig& cfg = ckpt.config;
  cfg.validate();
  auto [train_raw, holdout_raw] = split_dataset(raw, opts.holdout_every);
  if (holdout_raw.sequences.empty()) {
    throw std::invalid_argument("evaluate_model: holdout split is empty");
  }
  const Dataset train = prepare(train_raw, cfg.seq_len, ckpt.norm);
  const Dataset holdout = prepare(holdout_raw, cfg.seq_len, ckpt.norm);

  Rng root(opts.seed);

  // Autoencoder quality and the reconstruction noise floor.
  const ReconStats rs = recon_stats(ckpt.bundle, holdout);

  // Label oracle.
  CentroidClassifier clf;
  clf.fit(train);
  const double real_acc = clf.accuracy(holdout);

  // Conditional fidelity, trained vs untrained bundle on identical draws.
  Rng fidelity_rng = root.derive(1);
  const double gen_acc = label_accuracy(ckpt.bundle, cfg, clf, holdout, opts.generations,
                                        fidelity_rng);
  const ModelBundle untrained = ModelBundle::init(cfg, root.derive(2).base_seed());
  Rng baseline_rng = root.derive(1);  // same draw sequence as the trained run
  const double untrained_acc =
      label_accuracy(untrained, cfg, clf, holdout, opts.generations, baseline_rng);

  // Style diversity at fixed (c, l).
  Rng div_rng = root.derive(3);
  double diversity_sum = 0.0;
  double diversity_min = std::numeric_limits<double>::infinity();
  for (std::size_t trial = 0; trial < opts.diversity_trials; ++trial) {
    const FrameVec initial = random_initial_frame(holdout, div_rng);
    const int label = static_cast<int>(div_rng.integer(cfg.classes));
    std::vector<ActionSequence> seqs;
    seqs.reserve(opts.diversity_draws);
    for (std::size_t k = 0; k < opts.diversity_draws; ++k) {
      GenerationRequest req;
      req.initial_frame = initial;
      req.label = label;
      std::vector<double> z(cfg.z_dim);
      for (double& v : z) v = div_rng.normal();
      req.z = std::move(z);
      seqs.push_back(generate(ckpt.bundle, cfg, req));
    }
    const double div = diversity_metric(seqs);
    diversity_sum += div;
    diversity_min = std::min(diversity_min, div);
  }
  const double diversity_mean = diversity_sum / static_cast<double>(opts.diversity_trials);

  // Shared-start property in the projected plane (PCA on real codes).
  std::vector<std::vector<double>> codes;
  codes.reserve(train.sequences.size() * cfg.seq_len);
  for (const auto& seq : train.sequences) {
    for (const auto& f : seq.frames) codes.push_back(encode_frame(ckpt.bundle, f));
  }
  const PcaModel pca = pca_fit(codes);

  Rng start_rng = root.derive(4);
  std::size_t start_hits = 0;
  for (std::size_t trial = 0; trial < opts.trials; ++trial) {
    const FrameVec initial = random_initial_frame(holdout, start_rng);
    const int label = static_cast<int>(start_rng.integer(cfg.classes));
    const std::vector<double> c = encode_frame(ckpt.bundle, initial);
    std::vector<std::array<double, 2>> first_pts, mid_pts;
    for (std::size_t k = 0; k < opts.diversity_draws; ++k) {
      std::vector<double> z(cfg.z_dim);
      for (double& v : z) v = start_rng.normal();
      const LatentSequence h =
          generator_forward(ckpt.bundle, z, c, one_hot(label, cfg.classes));
      const auto traj = project_trajectory(pca, h);
      first_pts.push_back(traj.front());
      mid_pts.push_back(traj[traj.size() / 2]);
    }
    if (mean_pairwise(first_pts) < mean_pairwise(mid_pts)) ++start_hits;
  }
  const double start_fraction = static_cast<double>(start_hits) / static_cast<double>(opts.trials);

  // Initial-pose control: two initial poses, same (z, l).
  Rng pose_rng = root.derive(5);
  std::size_t pose_hits = 0;
  for (std::size_t trial = 0; trial < opts.trials; ++trial) {
    const std::size_t ia = pose_rng.integer(holdout.sequences.size());
    std::size_t ib = pose_rng.integer(holdout.sequences.size());
    if (ib == ia) ib = (ib + 1) % holdout.sequences.size();
    const int label = static_cast<int>(pose_rng.integer(cfg.classes));
    std::vector<double> z(cfg.z_dim);
    for (double& v : z) v = pose_rng.normal();
    GenerationRequest ra{holdout.sequences[ia].frames.front(), label, z, 0};
    GenerationRequest rb{holdout.sequences[ib].frames.front(), label, z, 0};
    const ActionSequence sa = generate(ckpt.bundle, cfg, ra);
    const ActionSequence sb = generate(ckpt.bundle, cfg, rb);
    const double first = frame_l2(sa.frames.front(), sb.frames.front());
    const double mid = frame_l2(sa.frames[sa.frames.size() / 2],
                                sb.frames[sb.frames.size() / 2]);
    if (first < mid) ++pose_hits;
  }
  const double pose_fraction = static_cast<double>(pose_hits) / static_cast<double>(opts.trials);

  // Chaining continuity: junction gap vs distance to unrelated poses.
  Rng chain_rng = root.derive(6);
  std::size_t chain_hits = 0;
  for (std::size_t trial = 0; trial < opts.chain_trials; ++trial) {
    ChainRequest req;
    req.initial_frame = random_initial_frame(holdout, chain_rng);
    req.labels = {static_cast<int>(chain_rng.integer(cfg.classes)),
                  static_cast<int>(chain_rng.integer(cfg.classes))};
    for (int k = 0; k < 2; ++k) {
      std::vector<double> z(cfg.z_dim);
      for (double& v : z) v = chain_rng.normal();
      req.z_per_segment.emplace_back(std::move(z));
    }
    const auto segments = chain(ckpt.bundle, cfg, req);
    const FrameVec& junction_from = segments[0].frames.back();
    const FrameVec& junction_to = segments[1].frames.front();
    const double gap = frame_l2(junction_from, junction_to);
    double null_gap = 0.0;
    for (std::size_t k = 0; k < opts.null_frames; ++k) {
      const auto& seq = train.sequences[chain_rng.integer(train.sequences.size())];
      const auto& frame = seq.frames[chain_rng.integer(seq.frames.size())];
      null_gap += frame_l2(junction_to, frame);
    }
    null_gap /= static_cast<double>(opts.null_frames);
    if (gap < null_gap) ++chain_hits;
  }
  const double chain_fraction =
      static_cast<double>(chain_hits) / static_cast<double>(opts.chain_trials);

  // Smoothness of generated sequences.
  Rng jerk_rng = root.derive(7);
  std::vector<double> jerks;
  jerks.reserve(opts.jerk_generations);
  for (std::size_t g = 0; g < opts.jerk_generations; ++g) {
    GenerationRequest req;
    req.initial_frame = random_initial_frame(holdout, jerk_rng);
    req.label = static_cast<int>(jerk_rng.integer(cfg.classes));
    std::vector<double> z(cfg.z_dim);
    for (double& v : z) v = jerk_rng.normal();
    req.z = std::move(z);
    jerks.push_back(jerk_metric(generate(ckpt.bundle, cfg, req)));
  }
  std::sort(jerks.begin(), jerks.end());
  const double jerk_median = jerks.size() % 2 == 1
                                 ? jerks[jerks.size() / 2]
                                 : 0.5 * (jerks[jerks.size() / 2 - 1] + jerks[jerks.size() / 2]);

  nlohmann::json report;
  report["schema_version"] = kEvalSchemaVersion;
  report["options"] = {{"generations", opts.generations},
                       {"diversity_trials", opts.diversity_trials},
                       {"diversity_draws", opts.diversity_draws},
                       {"trials", opts.trials},
                       {"chain_trials", opts.chain_trials},
                       {"jerk_generations", opts.jerk_generations},
                       {"null_frames", opts.null_frames},
                       {"seed", opts.seed},
                       {"holdout_every", opts.holdout_every}};
  report["reconstruction"] = {{"holdout_frame_mse", rs.frame_mse},
                              {"holdout_frame_variance", rs.frame_variance},
                              {"mse_over_variance", rs.frame_mse / rs.frame_variance},
                              {"noise_floor_frame_l2", rs.noise_floor}};
  report["classifier"] = {{"real_holdout_accuracy", real_acc},
                          {"generated_label_accuracy", gen_acc},
                          {"untrained_label_accuracy", untrained_acc},
                          {"chance", 1.0 / static_cast<double>(cfg.classes)}};
  report["diversity"] = {{"mean", diversity_mean},
                         {"min", diversity_min},
                         {"noise_floor", rs.noise_floor},
                         {"mean_over_noise_floor", diversity_mean / rs.noise_floor}};
  report["start_region"] = {{"success_fraction", start_fraction}, {"trials", opts.trials}};
  report["initial_pose_control"] = {{"success_fraction", pose_fraction},
                                    {"trials", opts.trials}};
  report["chaining"] = {{"success_fraction", chain_fraction}, {"trials", opts.chain_trials}};
  report["jerk"] = {{"median", jerk_median}, {"generations", opts.jerk_generations}};
  return report;
}

// ---- plot artifacts ---------------------------------------------------------------

void write_trajectory_svg(std::ostream& os,
                          const std::vector<std::vector<std::array<double, 2>>>& trajectories,
                          const std::vector<std::array<double, 2>>& initial_points) {
  double min_x = 0.0, max_x = 1.0, min_y = 0.0, max_y = 1.0;
  bool first = true;
  auto expand = [&](const std::array<double, 2>& p) {
    if (first) {
      min_x = max_x = p[0];
      min_y = max_y = p[1];
      first = false;
    } else {
      min_x = std::min(min_x, p[0]);
      max_x = std::max(max_x, p[0]);
      min_y = std::min(min_y, p[1]);
      max_y = std::max(max_y, p[1]);
    }
  };
  for (const auto& traj : trajectories) {
    for (const auto& p : traj) expand(p);
  }
  for (const auto& p : initial_points) expand(p);
  const double span_x = std::max(max_x - min_x, 1e-9);
  const double span_y = std::max(max_y - min_y, 1e-9);
  const double size = 600.0, margin = 40.0;
  auto sx = [&](double x) { return margin + (x - min_x) / span_x * (size - 2 * margin); };
  auto sy = [&](double y) { return size - margin - (y - min_y) / span_y * (size - 2 * margin); };

  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  const std::size_t palette_n = sizeof(kPalette) / sizeof(kPalette[0]);

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
     << "\" viewBox=\"0 0 " << size << " " << size << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t t = 0; t < trajectories.size(); ++t) {
    os << "<polyline fill=\"none\" stroke=\"" << kPalette[t % palette_n]
       << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& p : trajectories[t]) {
      os << fmt(sx(p[0])) << "," << fmt(sy(p[1])) << " ";
    }
    os << "\"/>\n";
  }
  for (const auto& p : initial_points) {
    // five-pointed star marker at the given initial pose
    const double cx = sx(p[0]), cy = sy(p[1]), r_out = 9.0, r_in = 3.6;
    os << "<polygon fill=\"#ffd700\" stroke=\"black\" stroke-width=\"1\" points=\"";
    for (int k = 0; k < 10; ++k) {
      const double r = (k % 2 == 0) ? r_out : r_in;
      const double ang = -1.5707963267948966 + k * 0.6283185307179586;
      os << fmt(cx + r * std::cos(ang)) << "," << fmt(cy + r * std::sin(ang)) << " ";
    }
    os << "\"/>\n";
  }
  os << "</svg>\n";
}

void write_trajectory_csv(std::ostream& os,
                          const std::vector<std::vector<std::array<double, 2>>>& trajectories) {
  os << "traj_id,point_idx,x,y\n";
  for (std::size_t t = 0; t < trajectories.size(); ++t) {
    for (std::size_t i = 0; i < trajectories[t].size(); ++i) {
      os << t << "," << i << "," << fmt(trajectories[t][i][0]) << ","
         << fmt(trajectories[t][i][1]) << "\n";
    }
  }
}

}  // namespace actgen
