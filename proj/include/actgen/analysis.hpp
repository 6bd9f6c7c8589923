#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "json.hpp"

#include "actgen/checkpoint.hpp"
#include "actgen/data.hpp"
#include "actgen/model.hpp"

namespace actgen {

// ---- 2-D projection of latent trajectories ------------------------------------

// Rank-2 PCA fitted on real-data latent codes so real and generated
// trajectories share one coordinate frame.
struct PcaModel {
  std::vector<double> mean;
  std::vector<double> axis0, axis1;  // orthonormal principal directions

  std::size_t dim() const { return mean.size(); }
};

// Symmetric eigendecomposition by cyclic Jacobi rotations. values come back
// descending with matching eigenvector rows (row k of `vectors` pairs with
// values[k]); vectors are orthonormal.
void eigen_symmetric(const std::vector<double>& matrix, std::size_t n,
                     std::vector<double>& values, std::vector<double>& vectors);

// Needs >= 3 points of dim >= 2 with nonzero spread. Sign convention: each
// axis's largest-magnitude component is positive.
PcaModel pca_fit(const std::vector<std::vector<double>>& points);

std::array<double, 2> pca_project_point(const PcaModel& model, const std::vector<double>& p);
std::vector<std::array<double, 2>> project_trajectory(const PcaModel& model,
                                                      const LatentSequence& h);

// ---- sequence metrics ------------------------------------------------------------

// Mean over unordered pairs of the frame-averaged L2 distance between two
// sequences. Zero iff all sequences coincide.
double diversity_metric(const std::vector<ActionSequence>& sequences);

// Mean squared adjacent-frame displacement in pose space; the smoothness
// instrument for the consistency-weight ablation.
double jerk_metric(const ActionSequence& seq);

// Nearest-centroid classifier on flattened trajectories; the independent
// label oracle for conditional generation.
class CentroidClassifier {
 public:
  void fit(const Dataset& prepared);
  int classify(const ActionSequence& seq) const;
  double accuracy(const Dataset& prepared) const;
  std::size_t classes() const { return centroids_.size(); }

 private:
  std::vector<std::vector<double>> centroids_;
};

// ---- full evaluation ---------------------------------------------------------------

struct EvalOptions {
  std::size_t generations = 300;     // conditional-fidelity generations
  std::size_t diversity_trials = 20; // (c,l) pairs measured
  std::size_t diversity_draws = 10;  // z draws per pair
  std::size_t trials = 50;           // start-region / initial-pose trials
  std::size_t chain_trials = 100;
  std::size_t jerk_generations = 100;
  std::size_t null_frames = 32;      // frames sampled per chain-gap null
  std::uint64_t seed = 1;
  std::size_t holdout_every = 5;     // must match the training split rule
};

inline constexpr int kEvalSchemaVersion = 1;

// Deterministic metric report over a trained checkpoint and the raw dataset
// it was trained from. Includes an untrained-bundle baseline for the
// conditional-fidelity chance comparison.
nlohmann::json evaluate_model(const Checkpoint& ckpt, const Dataset& raw,
                              const EvalOptions& opts);

// ---- plot artifacts ------------------------------------------------------------------

// Polyline per trajectory, star marker per initial point; plain SVG text.
void write_trajectory_svg(std::ostream& os,
                          const std::vector<std::vector<std::array<double, 2>>>& trajectories,
                          const std::vector<std::array<double, 2>>& initial_points);

// Rows: traj_id, point_idx, x, y.
void write_trajectory_csv(std::ostream& os,
                          const std::vector<std::vector<std::array<double, 2>>>& trajectories);

}  // namespace actgen
