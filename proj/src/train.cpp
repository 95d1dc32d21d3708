#include "hypalign/train.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hypalign::train {

void validate(const TrainingConfig& cfg) {
  if (!(cfg.margin_struct > 0.0) || !(cfg.margin_visual > 0.0)) {
    throw std::invalid_argument("TrainingConfig: margins must be positive");
  }
  if (cfg.negatives_per_positive < 1) {
    throw std::invalid_argument("TrainingConfig: negatives_per_positive must be >= 1");
  }
  if (!(cfg.learning_rate > 0.0)) {
    throw std::invalid_argument("TrainingConfig: learning_rate must be positive");
  }
  if (cfg.epochs < 1) {
    throw std::invalid_argument("TrainingConfig: epochs must be >= 1");
  }
}

NegativePools full_pools(const graph::UnionGraph& u) {
  NegativePools pools;
  pools.kg1 = u.kg1_to_global;
  pools.kg2 = u.kg2_to_global;
  return pools;
}

NegativePools visual_pools(const graph::UnionGraph& u, const data::AlignmentDataset& ds) {
  NegativePools pools;
  for (int local = 0; local < u.kg1_size(); ++local) {
    if (ds.visual1.has_image[static_cast<size_t>(local)]) {
      pools.kg1.push_back(u.kg1_to_global[static_cast<size_t>(local)]);
    }
  }
  for (int local = 0; local < u.kg2_size(); ++local) {
    if (ds.visual2.has_image[static_cast<size_t>(local)]) {
      pools.kg2.push_back(u.kg2_to_global[static_cast<size_t>(local)]);
    }
  }
  return pools;
}

std::vector<NegativeSample> sample_negatives(const std::pair<int, int>& pair, int k,
                                             const NegativePools& pools, int positive_index,
                                             Rng& rng) {
  if (k < 1) {
    throw std::invalid_argument("sample_negatives: k must be >= 1");
  }
  if (pools.kg1.empty() || pools.kg2.empty()) {
    throw std::invalid_argument("sample_negatives: empty candidate pool");
  }
  // a side is degenerate when its only candidate is the positive entity itself
  auto degenerate = [](const std::vector<int>& pool, int original) {
    return pool.size() == 1 && pool[0] == original;
  };
  bool kg1_stuck = degenerate(pools.kg1, pair.first);
  bool kg2_stuck = degenerate(pools.kg2, pair.second);
  if (kg1_stuck && kg2_stuck) {
    throw std::invalid_argument("sample_negatives: both candidate pools are singletons");
  }

  std::vector<NegativeSample> out;
  out.reserve(static_cast<size_t>(k));
  for (int s = 0; s < k; ++s) {
    bool corrupt_kg1 = (s % 2 == 0);
    if (corrupt_kg1 && kg1_stuck) corrupt_kg1 = false;
    if (!corrupt_kg1 && kg2_stuck) corrupt_kg1 = true;

    NegativeSample sample;
    sample.positive_index = positive_index;
    if (corrupt_kg1) {
      int pick;
      do {
        pick = pools.kg1[rng.uniform_index(pools.kg1.size())];
      } while (pick == pair.first);
      sample.kg1_index = pick;
      sample.kg2_index = pair.second;
    } else {
      int pick;
      do {
        pick = pools.kg2[rng.uniform_index(pools.kg2.size())];
      } while (pick == pair.second);
      sample.kg1_index = pair.first;
      sample.kg2_index = pick;
    }
    out.push_back(sample);
  }
  return out;
}

std::vector<NegativeSample> sample_epoch_negatives(
    const std::vector<std::pair<int, int>>& positives, int k, const NegativePools& pools,
    Rng& rng) {
  std::vector<NegativeSample> all;
  all.reserve(positives.size() * static_cast<size_t>(k));
  for (size_t p = 0; p < positives.size(); ++p) {
    std::vector<NegativeSample> one =
        sample_negatives(positives[p], k, pools, static_cast<int>(p), rng);
    all.insert(all.end(), one.begin(), one.end());
  }
  return all;
}

ad::Var ranking_loss_node(ad::Tape& tape, ad::Var embeddings, Curvature curvature,
                          const std::vector<std::pair<int, int>>& positives,
                          const std::vector<NegativeSample>& negatives, double margin) {
  if (positives.empty()) {
    throw std::invalid_argument("ranking_loss: no positive pairs");
  }
  std::vector<int> pos_left, pos_right, neg_left, neg_right, pos_of_neg;
  pos_left.reserve(positives.size());
  pos_right.reserve(positives.size());
  for (const auto& [a, b] : positives) {
    pos_left.push_back(a);
    pos_right.push_back(b);
  }
  neg_left.reserve(negatives.size());
  neg_right.reserve(negatives.size());
  pos_of_neg.reserve(negatives.size());
  for (const NegativeSample& s : negatives) {
    neg_left.push_back(s.kg1_index);
    neg_right.push_back(s.kg2_index);
    pos_of_neg.push_back(s.positive_index);
  }

  ad::Var d_pos = tape.mobius_distance_rows(tape.gather_rows(embeddings, pos_left),
                                            tape.gather_rows(embeddings, pos_right), curvature);
  ad::Var d_neg = tape.mobius_distance_rows(tape.gather_rows(embeddings, neg_left),
                                            tape.gather_rows(embeddings, neg_right), curvature);
  return tape.hinge_rank_loss(d_pos, d_neg, std::move(pos_of_neg), margin);
}

double ranking_loss_value(const model::BallMatrix& embeddings,
                          const std::vector<std::pair<int, int>>& positives,
                          const std::vector<NegativeSample>& negatives, double margin) {
  ad::Tape tape;
  ad::Var emb = tape.constant(embeddings.rows, "embeddings");
  ad::Var loss =
      ranking_loss_node(tape, emb, embeddings.curvature, positives, negatives, margin);
  return tape.value(loss)(0, 0);
}

ChannelVars channel_forward_on_tape(ad::Tape& tape, const model::ChannelModel& m,
                                    const graph::NormalizedGraph& g) {
  model::validate(m);
  if (m.n() != g.n) {
    throw std::invalid_argument("channel_forward_on_tape: feature rows do not match graph");
  }
  ChannelVars vars;
  vars.features = m.trainable_features()
                      ? tape.parameter(m.input_features, "input_features")
                      : tape.constant(m.input_features, "input_features");
  ad::Var h = tape.exp_map_rows(vars.features, m.input_curvature());
  for (size_t l = 0; l < m.layers.size(); ++l) {
    const model::LayerParams& layer = m.layers[l];
    ad::Var w = tape.parameter(layer.W, "layer[" + std::to_string(l) + "].W");
    vars.weights.push_back(w);
    ad::Var tangent = tape.log_map_rows(h, layer.c_in);
    ad::Var propagated = tape.spmm(g.adjacency, tangent);
    ad::Var transformed = tape.matmul(propagated, w);
    ad::Var activated =
        layer.activation == model::Activation::relu ? tape.relu(transformed) : transformed;
    h = tape.exp_map_rows(activated, layer.c_out);
  }
  vars.embeddings = h;
  return vars;
}

AdamOptimizer::AdamOptimizer(double learning_rate, double beta1, double beta2, double eps)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void AdamOptimizer::step(const std::vector<Matrix*>& params,
                         const std::vector<const Matrix*>& grads) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("AdamOptimizer: parameter/gradient count mismatch");
  }
  if (m_.empty()) {
    for (const Matrix* p : params) {
      m_.push_back(Matrix::Zero(p->rows(), p->cols()));
      v_.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }
  ++t_;
  double bc1 = 1.0 - std::pow(beta1_, t_);
  double bc2 = 1.0 - std::pow(beta2_, t_);
  for (size_t i = 0; i < params.size(); ++i) {
    Matrix& m = m_[i];
    Matrix& v = v_[i];
    const Matrix& g = *grads[i];
    m = beta1_ * m + (1.0 - beta1_) * g;
    v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
    Matrix m_hat = m / bc1;
    Matrix v_hat = v / bc2;
    params[i]->array() -= lr_ * m_hat.array() / (v_hat.array().sqrt() + eps_);
  }
}

TrainResult train_channel(model::ChannelModel channel, const graph::NormalizedGraph& g,
                          const data::SeedAlignments& seeds, const TrainingConfig& cfg,
                          const NegativePools& pools) {
  validate(cfg);
  if (seeds.train_pairs.empty()) {
    throw std::invalid_argument("train_channel: no training pairs to optimize");
  }
  double margin = cfg.margin_for(channel.kind);
  uint64_t stream = channel.kind == model::ChannelKind::structure ? 0xA11CEull : 0xB0B5ull;
  Rng rng(cfg.rng_seed, stream);
  AdamOptimizer adam(cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);

  TrainResult result;
  result.loss_history.reserve(static_cast<size_t>(cfg.epochs));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<NegativeSample> negatives =
        sample_epoch_negatives(seeds.train_pairs, cfg.negatives_per_positive, pools, rng);

    ad::Tape tape;
    ChannelVars vars = channel_forward_on_tape(tape, channel, g);
    ad::Var loss = ranking_loss_node(tape, vars.embeddings, channel.output_curvature(),
                                     seeds.train_pairs, negatives, margin);
    double loss_value = tape.value(loss)(0, 0);
    // NaN distances drop out of the hinge silently, so check the embeddings too
    if (!std::isfinite(loss_value) || !tape.value(vars.embeddings).allFinite()) {
      throw std::runtime_error("train_channel: non-finite loss at epoch " +
                               std::to_string(epoch));
    }
    result.loss_history.push_back(loss_value);

    tape.backward(loss);

    std::vector<Matrix*> params;
    std::vector<const Matrix*> grads;
    if (channel.trainable_features()) {
      params.push_back(&channel.input_features);
      grads.push_back(&tape.grad(vars.features));
    }
    for (size_t l = 0; l < channel.layers.size(); ++l) {
      params.push_back(&channel.layers[l].W);
      grads.push_back(&tape.grad(vars.weights[l]));
    }
    adam.step(params, grads);
  }

  result.model = std::move(channel);
  return result;
}

namespace {

struct FlatCoordinate {
  int tensor = 0;  // 0 = input features (if trainable), then layer weights
  int row = 0;
  int col = 0;
  std::string label;
};

}  // namespace

GradCheckReport gradient_check(const model::ChannelModel& channel,
                               const graph::NormalizedGraph& g,
                               const std::vector<std::pair<int, int>>& positives,
                               const std::vector<NegativeSample>& negatives, double margin,
                               const GradCheckOptions& opt) {
  // loss + activation signature as a function of a candidate parameter set
  auto evaluate = [&](const model::ChannelModel& m) {
    ad::Tape tape;
    ChannelVars vars = channel_forward_on_tape(tape, m, g);
    ad::Var loss = ranking_loss_node(tape, vars.embeddings, m.output_curvature(), positives,
                                     negatives, margin);
    return std::make_pair(tape.value(loss)(0, 0), tape.activation_signature());
  };

  // analytic gradients at the base point
  ad::Tape tape;
  ChannelVars vars = channel_forward_on_tape(tape, channel, g);
  ad::Var loss = ranking_loss_node(tape, vars.embeddings, channel.output_curvature(), positives,
                                   negatives, margin);
  tape.backward(loss);
  uint64_t base_signature = tape.activation_signature();

  std::vector<Matrix> analytic;
  std::vector<std::string> tensor_names;
  if (channel.trainable_features()) {
    analytic.push_back(tape.grad(vars.features));
    tensor_names.push_back("input_features");
  }
  for (size_t l = 0; l < channel.layers.size(); ++l) {
    analytic.push_back(tape.grad(vars.weights[l]));
    tensor_names.push_back("layer[" + std::to_string(l) + "].W");
  }

  // enumerate all coordinates, then sample without replacement
  std::vector<FlatCoordinate> coords;
  for (size_t tns = 0; tns < analytic.size(); ++tns) {
    for (int i = 0; i < analytic[tns].rows(); ++i) {
      for (int j = 0; j < analytic[tns].cols(); ++j) {
        coords.push_back({static_cast<int>(tns), i, j,
                          tensor_names[tns] + "[" + std::to_string(i) + "," +
                              std::to_string(j) + "]"});
      }
    }
  }
  if (opt.corrupt_flat_index >= 0 &&
      opt.corrupt_flat_index < static_cast<int>(coords.size())) {
    const FlatCoordinate& fc = coords[static_cast<size_t>(opt.corrupt_flat_index)];
    analytic[static_cast<size_t>(fc.tensor)](fc.row, fc.col) += opt.corrupt_delta;
  }

  Rng rng(opt.rng_seed, 0xC0DEull);
  int want = std::min<int>(opt.sample_coordinates, static_cast<int>(coords.size()));
  for (size_t i = coords.size(); i > 1; --i) {
    size_t j = rng.uniform_index(i);
    std::swap(coords[i - 1], coords[j]);
  }
  coords.resize(static_cast<size_t>(want));

  // mutable copy whose tensors we nudge coordinate by coordinate
  model::ChannelModel probe = channel;
  auto tensor_of = [&](model::ChannelModel& m, int tensor) -> Matrix& {
    if (channel.trainable_features()) {
      if (tensor == 0) return m.input_features;
      return m.layers[static_cast<size_t>(tensor - 1)].W;
    }
    return m.layers[static_cast<size_t>(tensor)].W;
  };

  GradCheckReport report;
  for (const FlatCoordinate& fc : coords) {
    Matrix& t = tensor_of(probe, fc.tensor);
    double saved = t(fc.row, fc.col);

    t(fc.row, fc.col) = saved + opt.fd_step;
    auto [loss_plus, sig_plus] = evaluate(probe);
    t(fc.row, fc.col) = saved - opt.fd_step;
    auto [loss_minus, sig_minus] = evaluate(probe);
    t(fc.row, fc.col) = saved;

    if (sig_plus != base_signature || sig_minus != base_signature) {
      ++report.skipped_kink;
      continue;
    }
    double numeric = (loss_plus - loss_minus) / (2.0 * opt.fd_step);
    double analytic_value = analytic[static_cast<size_t>(fc.tensor)](fc.row, fc.col);
    if (std::abs(numeric) < 1e-10 && std::abs(analytic_value) < 1e-10) {
      ++report.skipped_noise_floor;
      continue;
    }
    double rel = std::abs(analytic_value - numeric) /
                 std::max(1e-8, std::abs(analytic_value) + std::abs(numeric));
    ++report.coordinates_checked;
    if (rel > report.max_relative_error) {
      report.max_relative_error = rel;
      report.worst_parameter = fc.label;
    }
  }
  return report;
}

}  // namespace hypalign::train
