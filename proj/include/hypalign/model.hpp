#pragma once

#include <vector>

#include "hypalign/geometry.hpp"
#include "hypalign/graph.hpp"
#include "hypalign/rng.hpp"

namespace hypalign::model {

using geometry::BallPoint;
using geometry::Curvature;
using geometry::Matrix;
using geometry::Vector;

enum class Activation { relu, none };
enum class ChannelKind { structure, visual };

// One graph-convolution layer: log-map at c_in, propagate/transform in the
// tangent space, activate, exp-map at c_out. No bias terms.
struct LayerParams {
  Matrix W;
  Curvature c_in;
  Curvature c_out;
  Activation activation = Activation::relu;

  int d_in() const { return static_cast<int>(W.rows()); }
  int d_out() const { return static_cast<int>(W.cols()); }
};

// Matrix whose rows are points on one ball.
struct BallMatrix {
  Matrix rows;
  Curvature curvature;

  int n() const { return static_cast<int>(rows.rows()); }
  int dim() const { return static_cast<int>(rows.cols()); }
  BallPoint point(int i) const { return BallPoint(rows.row(i).transpose(), curvature); }
};

// A full channel: Euclidean input features lifted onto the ball, then a stack
// of layers. Structure channels train their features, visual channels keep
// the precomputed vectors fixed.
struct ChannelModel {
  ChannelKind kind = ChannelKind::structure;
  Matrix input_features;
  std::vector<LayerParams> layers;

  bool trainable_features() const { return kind == ChannelKind::structure; }
  int n() const { return static_cast<int>(input_features.rows()); }
  int input_dim() const { return static_cast<int>(input_features.cols()); }
  int output_dim() const { return layers.back().d_out(); }
  const Curvature& input_curvature() const { return layers.front().c_in; }
  const Curvature& output_curvature() const { return layers.back().c_out; }
};

// throws invalid_argument if dimensions or curvatures do not chain
void validate(const ChannelModel& m);

struct FusionConfig {
  FusionConfig(double beta_in, Curvature curvature_in);

  double beta;
  Curvature curvature;
};

BallMatrix lift_to_ball(const Matrix& x_euclid, const Curvature& c);

BallMatrix hgcn_layer(const BallMatrix& h, const graph::NormalizedGraph& g,
                      const LayerParams& params);

BallMatrix forward_channel(const ChannelModel& m, const graph::NormalizedGraph& g);

BallPoint fuse(const BallPoint& h_struct, const BallPoint& h_visual, const FusionConfig& cfg);
BallMatrix fuse_rows(const BallMatrix& h_struct, const BallMatrix& h_visual,
                     const FusionConfig& cfg);

// Reference Euclidean convolution relu(A H W), the degenerate-curvature
// baseline of the hyperbolic layer.
Matrix euclid_gcn_layer(const Matrix& h, const graph::NormalizedGraph& g, const Matrix& w);

// ---- construction ---------------------------------------------------------

struct ChannelConfig {
  int layer_count = 2;
  int hidden_dim = 64;
  std::vector<double> curvatures = {1.0};  // one value per layer boundary, or a single value
};

// Trainable free embeddings, rows clamped to norm 0.9/sqrt(c) before lifting.
ChannelModel make_structure_channel(int n_entities, int dim, const ChannelConfig& cfg, Rng& rng);

// Seed-tied warm start: both entities of every tied pair share one initial
// feature row and all remaining rows start at zero. On (near-)isomorphic KGs
// the forward pass then sends aligned entities to (near-)identical points
// before training, and the ranking loss refines from there instead of having
// to discover the correspondence from independent random rows.
ChannelModel make_structure_channel(int n_entities, int dim, const ChannelConfig& cfg, Rng& rng,
                                    const std::vector<std::pair<int, int>>& tied_pairs);

// Fixed features: each row L2-normalized and scaled by 0.5; entities without
// an image keep the zero row and lift to the origin.
Matrix prepare_visual_features(const Matrix& raw, const std::vector<bool>& has_image);
ChannelModel make_visual_channel(Matrix prepared_features, int out_dim, const ChannelConfig& cfg,
                                 Rng& rng);

}  // namespace hypalign::model
