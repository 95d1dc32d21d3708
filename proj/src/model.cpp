#include "hypalign/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hypalign::model {

namespace {

Matrix glorot_normal(int rows, int cols, Rng& rng) {
  double sd = std::sqrt(2.0 / (rows + cols));
  Matrix w(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) w(i, j) = sd * rng.normal();
  return w;
}

std::vector<double> expand_curvatures(const ChannelConfig& cfg) {
  size_t boundaries = static_cast<size_t>(cfg.layer_count) + 1;
  if (cfg.curvatures.size() == 1) {
    return std::vector<double>(boundaries, cfg.curvatures[0]);
  }
  if (cfg.curvatures.size() != boundaries) {
    throw std::invalid_argument("ChannelConfig: need 1 or layer_count+1 curvature values, got " +
                                std::to_string(cfg.curvatures.size()));
  }
  return cfg.curvatures;
}

std::vector<LayerParams> make_layers(int d0, int dim, const ChannelConfig& cfg, Rng& rng) {
  if (cfg.layer_count < 1) {
    throw std::invalid_argument("ChannelConfig: layer_count must be >= 1");
  }
  std::vector<double> cs = expand_curvatures(cfg);
  std::vector<LayerParams> layers;
  int d_in = d0;
  for (int l = 0; l < cfg.layer_count; ++l) {
    int d_out = dim;
    layers.push_back(LayerParams{glorot_normal(d_in, d_out, rng), Curvature(cs[l]),
                                 Curvature(cs[l + 1]), Activation::relu});
    d_in = d_out;
  }
  return layers;
}

}  // namespace

FusionConfig::FusionConfig(double beta_in, Curvature curvature_in)
    : beta(beta_in), curvature(curvature_in) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw std::invalid_argument("FusionConfig: beta must lie in [0, 1], got " +
                                std::to_string(beta_in));
  }
}

void validate(const ChannelModel& m) {
  if (m.layers.empty()) {
    throw std::invalid_argument("ChannelModel: no layers");
  }
  if (m.input_dim() != m.layers.front().d_in()) {
    throw std::invalid_argument("ChannelModel: input feature dim " +
                                std::to_string(m.input_dim()) + " does not match layer 0 d_in " +
                                std::to_string(m.layers.front().d_in()));
  }
  for (size_t l = 0; l + 1 < m.layers.size(); ++l) {
    if (m.layers[l].d_out() != m.layers[l + 1].d_in()) {
      throw std::invalid_argument("ChannelModel: layer " + std::to_string(l) +
                                  " d_out does not chain into layer " + std::to_string(l + 1));
    }
    if (m.layers[l].c_out != m.layers[l + 1].c_in) {
      throw std::invalid_argument("ChannelModel: curvature mismatch between layers " +
                                  std::to_string(l) + " and " + std::to_string(l + 1));
    }
  }
  for (const LayerParams& p : m.layers) {
    if (!p.W.allFinite()) {
      throw std::invalid_argument("ChannelModel: non-finite layer weights");
    }
  }
}

BallMatrix lift_to_ball(const Matrix& x_euclid, const Curvature& c) {
  if (!x_euclid.allFinite()) {
    throw std::invalid_argument("lift_to_ball: non-finite features");
  }
  return BallMatrix{geometry::exp_map_rows(x_euclid, c), c};
}

BallMatrix hgcn_layer(const BallMatrix& h, const graph::NormalizedGraph& g,
                      const LayerParams& params) {
  if (h.n() != g.n) {
    throw std::invalid_argument("hgcn_layer: row count " + std::to_string(h.n()) +
                                " does not match graph size " + std::to_string(g.n));
  }
  if (h.dim() != params.d_in()) {
    throw std::invalid_argument("hgcn_layer: input dim " + std::to_string(h.dim()) +
                                " does not match W rows " + std::to_string(params.d_in()));
  }
  if (h.curvature != params.c_in) {
    throw std::invalid_argument("hgcn_layer: input curvature mismatch");
  }

  Matrix tangent = geometry::log_map_rows(h.rows, params.c_in);
  Matrix propagated = g.adjacency * tangent;
  Matrix transformed = propagated * params.W;
  if (params.activation == Activation::relu) {
    transformed = transformed.cwiseMax(0.0);
  }
  return BallMatrix{geometry::exp_map_rows(transformed, params.c_out), params.c_out};
}

BallMatrix forward_channel(const ChannelModel& m, const graph::NormalizedGraph& g) {
  validate(m);
  if (m.n() != g.n) {
    throw std::invalid_argument("forward_channel: feature rows " + std::to_string(m.n()) +
                                " do not match graph size " + std::to_string(g.n));
  }
  BallMatrix h = lift_to_ball(m.input_features, m.input_curvature());
  for (const LayerParams& layer : m.layers) {
    h = hgcn_layer(h, g, layer);
  }
  return h;
}

BallPoint fuse(const BallPoint& h_struct, const BallPoint& h_visual, const FusionConfig& cfg) {
  if (h_struct.dim() != h_visual.dim()) {
    throw std::invalid_argument("fuse: channel dimensions differ (" +
                                std::to_string(h_struct.dim()) + " vs " +
                                std::to_string(h_visual.dim()) + ")");
  }
  if (h_struct.curvature != cfg.curvature || h_visual.curvature != cfg.curvature) {
    throw std::invalid_argument("fuse: both points must live on the fusion ball");
  }
  BallPoint scaled_s = geometry::mobius_scale(cfg.beta, h_struct);
  BallPoint scaled_v = geometry::mobius_scale(1.0 - cfg.beta, h_visual);
  return geometry::mobius_add(scaled_s, scaled_v);
}

BallMatrix fuse_rows(const BallMatrix& h_struct, const BallMatrix& h_visual,
                     const FusionConfig& cfg) {
  if (h_struct.n() != h_visual.n()) {
    throw std::invalid_argument("fuse_rows: row counts differ");
  }
  Matrix out(h_struct.n(), h_struct.dim());
  for (int i = 0; i < h_struct.n(); ++i) {
    out.row(i) = fuse(h_struct.point(i), h_visual.point(i), cfg).coords.transpose();
  }
  return BallMatrix{std::move(out), cfg.curvature};
}

Matrix euclid_gcn_layer(const Matrix& h, const graph::NormalizedGraph& g, const Matrix& w) {
  if (h.rows() != g.n) {
    throw std::invalid_argument("euclid_gcn_layer: row count does not match graph size");
  }
  if (h.cols() != w.rows()) {
    throw std::invalid_argument("euclid_gcn_layer: feature dim does not match W rows");
  }
  Matrix propagated = g.adjacency * h;
  Matrix transformed = propagated * w;
  return transformed.cwiseMax(0.0);
}

ChannelModel make_structure_channel(int n_entities, int dim, const ChannelConfig& cfg, Rng& rng) {
  if (n_entities < 1) {
    throw std::invalid_argument("make_structure_channel: need at least one entity");
  }
  ChannelModel m;
  m.kind = ChannelKind::structure;
  m.layers = make_layers(dim, dim, cfg, rng);

  double sd = 1.0 / std::sqrt(static_cast<double>(dim));
  double max_norm = 0.9 / m.input_curvature().sqrt_c();
  m.input_features.resize(n_entities, dim);
  for (int i = 0; i < n_entities; ++i) {
    for (int j = 0; j < dim; ++j) m.input_features(i, j) = sd * rng.normal();
    double norm = m.input_features.row(i).norm();
    if (norm > max_norm) {
      m.input_features.row(i) *= max_norm / norm;
    }
  }
  validate(m);
  return m;
}

ChannelModel make_structure_channel(int n_entities, int dim, const ChannelConfig& cfg, Rng& rng,
                                    const std::vector<std::pair<int, int>>& tied_pairs) {
  ChannelModel m = make_structure_channel(n_entities, dim, cfg, rng);
  std::vector<bool> tied(static_cast<size_t>(n_entities), false);
  for (const auto& [a, b] : tied_pairs) {
    if (a < 0 || a >= n_entities || b < 0 || b >= n_entities) {
      throw std::invalid_argument("make_structure_channel: tied pair index out of range");
    }
    m.input_features.row(b) = m.input_features.row(a);
    tied[static_cast<size_t>(a)] = true;
    tied[static_cast<size_t>(b)] = true;
  }
  for (int i = 0; i < n_entities; ++i) {
    if (!tied[static_cast<size_t>(i)]) m.input_features.row(i).setZero();
  }
  return m;
}

Matrix prepare_visual_features(const Matrix& raw, const std::vector<bool>& has_image) {
  if (static_cast<size_t>(raw.rows()) != has_image.size()) {
    throw std::invalid_argument("prepare_visual_features: flag count does not match rows");
  }
  Matrix out = Matrix::Zero(raw.rows(), raw.cols());
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    if (!has_image[i]) continue;
    double norm = raw.row(i).norm();
    if (norm < geometry::kZeroNorm) continue;  // zero feature vector, treat as missing
    out.row(i) = raw.row(i) * (0.5 / norm);
  }
  return out;
}

ChannelModel make_visual_channel(Matrix prepared_features, int out_dim, const ChannelConfig& cfg,
                                 Rng& rng) {
  ChannelModel m;
  m.kind = ChannelKind::visual;
  int d0 = static_cast<int>(prepared_features.cols());
  m.input_features = std::move(prepared_features);
  m.layers = make_layers(d0, out_dim, cfg, rng);
  validate(m);
  return m;
}

}  // namespace hypalign::model
