#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hypalign/autodiff.hpp"
#include "hypalign/data.hpp"
#include "hypalign/model.hpp"
#include "hypalign/rng.hpp"

namespace hypalign::train {

using geometry::Curvature;
using geometry::Matrix;

struct TrainingConfig {
  double margin_struct = 0.5;
  double margin_visual = 1.5;
  int negatives_per_positive = 6;
  double learning_rate = 0.01;
  int epochs = 300;
  uint64_t rng_seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  double margin_for(model::ChannelKind kind) const {
    return kind == model::ChannelKind::structure ? margin_struct : margin_visual;
  }
};

void validate(const TrainingConfig& cfg);

// candidate entities (combined index space) each side of a corrupted pair is
// drawn from
struct NegativePools {
  std::vector<int> kg1;
  std::vector<int> kg2;
};

// full entity sets of both KGs
NegativePools full_pools(const graph::UnionGraph& u);
// restricted to image-bearing entities, for the visual channel
NegativePools visual_pools(const graph::UnionGraph& u, const data::AlignmentDataset& ds);

struct NegativeSample {
  int kg1_index = 0;
  int kg2_index = 0;
  int positive_index = 0;  // which train pair this sample corrupts
};

// k corruptions of one pair: even sample indices replace the KG1 side, odd
// ones the KG2 side; a corrupted pair never equals the positive pair.
std::vector<NegativeSample> sample_negatives(const std::pair<int, int>& pair, int k,
                                             const NegativePools& pools, int positive_index,
                                             Rng& rng);

std::vector<NegativeSample> sample_epoch_negatives(
    const std::vector<std::pair<int, int>>& positives, int k, const NegativePools& pools,
    Rng& rng);

// ---- loss ------------------------------------------------------------------

// Margin ranking loss over the tape: sum over positive pairs and their
// negative sets of max(0, d(pos) + margin - d(neg)), with d the L1 Moebius
// distance at the embedding curvature. Gradients flow to everything feeding
// the embedding node.
ad::Var ranking_loss_node(ad::Tape& tape, ad::Var embeddings, Curvature curvature,
                          const std::vector<std::pair<int, int>>& positives,
                          const std::vector<NegativeSample>& negatives, double margin);

// eager variant for tests and diagnostics
double ranking_loss_value(const model::BallMatrix& embeddings,
                          const std::vector<std::pair<int, int>>& positives,
                          const std::vector<NegativeSample>& negatives, double margin);

// channel forward recorded on a tape; weights (and features, when trainable)
// become parameters
struct ChannelVars {
  ad::Var features;
  std::vector<ad::Var> weights;
  ad::Var embeddings;
};

ChannelVars channel_forward_on_tape(ad::Tape& tape, const model::ChannelModel& m,
                                    const graph::NormalizedGraph& g);

// ---- optimization -----------------------------------------------------------

class AdamOptimizer {
 public:
  AdamOptimizer(double learning_rate, double beta1, double beta2, double eps);

  // applies one update; parameter order must stay fixed across calls
  void step(const std::vector<Matrix*>& params, const std::vector<const Matrix*>& grads);

 private:
  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

struct TrainResult {
  model::ChannelModel model;
  std::vector<double> loss_history;
};

// Full-batch training: every epoch resamples negatives, records the loss, and
// applies one Adam step. Deterministic for a fixed cfg.rng_seed.
TrainResult train_channel(model::ChannelModel channel, const graph::NormalizedGraph& g,
                          const data::SeedAlignments& seeds, const TrainingConfig& cfg,
                          const NegativePools& pools);

// ---- gradient checking ------------------------------------------------------

struct GradCheckOptions {
  int sample_coordinates = 220;
  double fd_step = 1e-5;
  uint64_t rng_seed = 12345;
  // test fixture: offset added to one analytic gradient entry (flat index
  // across all parameters) so tests can verify the check actually trips
  int corrupt_flat_index = -1;
  double corrupt_delta = 0.0;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  int coordinates_checked = 0;
  int skipped_kink = 0;
  int skipped_noise_floor = 0;
};

// Central finite differences against the tape gradients for a random subset
// of parameter coordinates. Coordinates whose perturbed evaluations change
// any non-smooth activation pattern (hinge, relu, L1 sign, ball projection)
// are excluded as non-differentiable points, as are coordinates where both
// gradients sit below 1e-10.
GradCheckReport gradient_check(const model::ChannelModel& channel,
                               const graph::NormalizedGraph& g,
                               const std::vector<std::pair<int, int>>& positives,
                               const std::vector<NegativeSample>& negatives, double margin,
                               const GradCheckOptions& opt);

}  // namespace hypalign::train
