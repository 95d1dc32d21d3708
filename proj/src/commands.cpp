#include "hypalign/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "hypalign/checkpoint.hpp"
#include "hypalign/train.hpp"

namespace hypalign::cli {

namespace fs = std::filesystem;

namespace {

constexpr uint64_t kStructureInitStream = 0x101;
constexpr uint64_t kVisualInitStream = 0x202;
constexpr uint64_t kGradCheckStream = 0x303;

void write_loss_log(const std::string& path, const std::vector<double>& losses) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write loss log: " + path);
  char buf[64];
  out << "epoch\tloss\n";
  for (size_t e = 0; e < losses.size(); ++e) {
    std::snprintf(buf, sizeof(buf), "%.17g", losses[e]);
    out << e << '\t' << buf << '\n';
  }
}

model::ChannelConfig channel_config(const RunConfig& cfg) {
  model::ChannelConfig mc;
  mc.layer_count = cfg.model.layers;
  mc.hidden_dim = cfg.model.dim;
  mc.curvatures = cfg.model.curvatures;
  return mc;
}

// union visual features: KG1 rows then KG2 rows, prepared for lifting
std::pair<geometry::Matrix, std::vector<bool>> union_visual(const ResolvedData& rd) {
  const data::AlignmentDataset& ds = rd.dataset;
  int n1 = ds.kg1.num_entities();
  int n2 = ds.kg2.num_entities();
  geometry::Matrix raw = geometry::Matrix::Zero(n1 + n2, ds.visual1.dim);
  std::vector<bool> has(static_cast<size_t>(n1 + n2), false);
  for (int i = 0; i < n1; ++i) {
    has[static_cast<size_t>(i)] = ds.visual1.has_image[static_cast<size_t>(i)];
    raw.row(i) = ds.visual1.features.row(i);
  }
  for (int j = 0; j < n2; ++j) {
    has[static_cast<size_t>(n1 + j)] = ds.visual2.has_image[static_cast<size_t>(j)];
    raw.row(n1 + j) = ds.visual2.features.row(j);
  }
  return {model::prepare_visual_features(raw, has), has};
}

std::vector<std::pair<int, int>> image_bearing_pairs(
    const std::vector<std::pair<int, int>>& pairs, const std::vector<bool>& has) {
  std::vector<std::pair<int, int>> kept;
  for (const auto& p : pairs) {
    if (has[static_cast<size_t>(p.first)] && has[static_cast<size_t>(p.second)]) {
      kept.push_back(p);
    }
  }
  return kept;
}

std::string default_ckpt(const RunConfig& cfg, const char* name) {
  return cfg.output_dir + "/" + name;
}

checkpoint::ChannelCheckpoint load_and_check(const std::string& path, const RunConfig& cfg,
                                             const ResolvedData& rd,
                                             model::ChannelKind expected_kind) {
  checkpoint::ChannelCheckpoint ckpt = checkpoint::load_checkpoint(path);
  if (ckpt.model.kind != expected_kind) {
    throw std::runtime_error("checkpoint " + path + " holds the wrong channel kind");
  }
  if (ckpt.model.output_dim() != cfg.model.dim) {
    throw std::runtime_error("checkpoint " + path + " has dimension " +
                             std::to_string(ckpt.model.output_dim()) +
                             " but the config requests dim " + std::to_string(cfg.model.dim));
  }
  if (ckpt.model.n() != rd.combined.graph.n) {
    throw std::runtime_error("checkpoint " + path + " was trained on " +
                             std::to_string(ckpt.model.n()) + " entities but the dataset has " +
                             std::to_string(rd.combined.graph.n));
  }
  return ckpt;
}

}  // namespace

std::vector<std::string> ResolvedData::union_entity_names() const {
  std::vector<std::string> names;
  names.reserve(static_cast<size_t>(combined.graph.n));
  for (const std::string& e : dataset.kg1.entities) names.push_back("1:" + e);
  for (const std::string& e : dataset.kg2.entities) names.push_back("2:" + e);
  return names;
}

ResolvedData resolve_data(const RunConfig& cfg) {
  validate(cfg);
  ResolvedData rd;
  if (cfg.data.synthetic.has_value()) {
    rd.dataset = data::generate_synthetic(*cfg.data.synthetic, cfg.data.split_fraction);
  } else {
    rd.dataset = data::load_dataset(*cfg.data.files, cfg.data.split_fraction,
                                    cfg.data.rng_seed);
  }
  rd.combined = graph::disjoint_union(rd.dataset.kg1, rd.dataset.kg2);
  return rd;
}

TrainOutputs cmd_train(const RunConfig& cfg) {
  ResolvedData rd = resolve_data(cfg);
  fs::create_directories(cfg.output_dir);
  write_manifest("train", cfg, cfg.output_dir);

  TrainOutputs outputs;

  // structure channel
  {
    Rng init_rng(cfg.training.rng_seed, kStructureInitStream);
    model::ChannelModel channel =
        cfg.model.feature_init == "seed_tied"
            ? model::make_structure_channel(rd.combined.graph.n, cfg.model.dim,
                                            channel_config(cfg), init_rng,
                                            rd.dataset.seeds.train_pairs)
            : model::make_structure_channel(rd.combined.graph.n, cfg.model.dim,
                                            channel_config(cfg), init_rng);
    train::NegativePools pools = train::full_pools(rd.combined);
    train::TrainResult result =
        train::train_channel(std::move(channel), rd.combined.graph, rd.dataset.seeds,
                             cfg.training, pools);
    outputs.structure_checkpoint = default_ckpt(cfg, "structure.ckpt");
    checkpoint::save_checkpoint({result.model, cfg.training.rng_seed},
                                outputs.structure_checkpoint);
    write_loss_log(cfg.output_dir + "/loss_structure.tsv", result.loss_history);
    std::cout << "structure channel: " << result.loss_history.size() << " epochs, final loss "
              << result.loss_history.back() << "\n";
  }

  // visual channel, when features exist and the config wants it
  if (cfg.model.use_visual && rd.dataset.has_visual()) {
    auto [prepared, has] = union_visual(rd);
    std::vector<std::pair<int, int>> visual_train =
        image_bearing_pairs(rd.dataset.seeds.train_pairs, has);
    if (visual_train.empty()) {
      throw std::runtime_error(
          "cmd_train: visual features are present but no training pair has images on both "
          "sides");
    }
    Rng init_rng(cfg.training.rng_seed, kVisualInitStream);
    model::ChannelModel channel = model::make_visual_channel(
        std::move(prepared), cfg.model.dim, channel_config(cfg), init_rng);
    train::NegativePools pools = train::visual_pools(rd.combined, rd.dataset);
    data::SeedAlignments visual_seeds;
    visual_seeds.train_pairs = std::move(visual_train);
    visual_seeds.test_pairs = rd.dataset.seeds.test_pairs;
    train::TrainResult result = train::train_channel(
        std::move(channel), rd.combined.graph, visual_seeds, cfg.training, pools);
    outputs.visual_checkpoint = default_ckpt(cfg, "visual.ckpt");
    checkpoint::save_checkpoint({result.model, cfg.training.rng_seed},
                                outputs.visual_checkpoint);
    write_loss_log(cfg.output_dir + "/loss_visual.tsv", result.loss_history);
    std::cout << "visual channel: " << result.loss_history.size() << " epochs, final loss "
              << result.loss_history.back() << "\n";
  }
  return outputs;
}

EvaluateOutputs cmd_evaluate(const RunConfig& cfg, std::string structure_ckpt,
                             std::string visual_ckpt) {
  ResolvedData rd = resolve_data(cfg);
  if (structure_ckpt.empty()) structure_ckpt = default_ckpt(cfg, "structure.ckpt");
  if (visual_ckpt.empty()) {
    std::string candidate = default_ckpt(cfg, "visual.ckpt");
    if (fs::exists(candidate)) visual_ckpt = candidate;
  }

  checkpoint::ChannelCheckpoint structure =
      load_and_check(structure_ckpt, cfg, rd, model::ChannelKind::structure);
  std::optional<model::ChannelModel> visual;
  if (!visual_ckpt.empty()) {
    visual = load_and_check(visual_ckpt, cfg, rd, model::ChannelKind::visual).model;
  }

  EvaluateOutputs out;
  out.rows = eval::evaluate_variants(structure.model, visual, rd.combined.graph,
                                     rd.dataset.seeds.test_pairs, rd.kg2_candidates(),
                                     cfg.beta_list, cfg.k_list);

  fs::create_directories(cfg.output_dir);
  write_manifest("evaluate", cfg, cfg.output_dir);

  std::string table = eval::format_variant_table(out.rows, cfg.k_list);
  std::cout << table;

  out.metrics_txt = cfg.output_dir + "/metrics.txt";
  {
    std::ofstream txt(out.metrics_txt);
    if (!txt) throw std::runtime_error("cannot write " + out.metrics_txt);
    char buf[64];
    for (const eval::VariantRow& row : out.rows) {
      for (int k : cfg.k_list) {
        std::snprintf(buf, sizeof(buf), "%.17g", row.report.hits_at.at(k));
        txt << row.label << ".hits@" << k << '\t' << buf << '\n';
      }
      std::snprintf(buf, sizeof(buf), "%.17g", row.report.mean_rank);
      txt << row.label << ".mean_rank\t" << buf << '\n';
      std::snprintf(buf, sizeof(buf), "%.17g", row.report.mrr);
      txt << row.label << ".mrr\t" << buf << '\n';
    }
  }

  out.metrics_json = cfg.output_dir + "/metrics.json";
  {
    nlohmann::json j;
    j["direction"] = "kg1_to_kg2";
    j["rows"] = nlohmann::json::array();
    for (const eval::VariantRow& row : out.rows) {
      nlohmann::json r;
      r["label"] = row.label;
      r["beta"] = row.beta;
      for (const auto& [k, v] : row.report.hits_at) {
        r["hits"][std::to_string(k)] = v;
      }
      r["mean_rank"] = row.report.mean_rank;
      r["mrr"] = row.report.mrr;
      j["rows"].push_back(r);
    }
    std::ofstream js(out.metrics_json);
    if (!js) throw std::runtime_error("cannot write " + out.metrics_json);
    js << j.dump(2) << '\n';
  }
  return out;
}

std::string cmd_predict(const RunConfig& cfg, double beta, int top_k,
                        std::string structure_ckpt, std::string visual_ckpt) {
  if (top_k < 1) throw std::invalid_argument("predict: top_k must be >= 1");
  ResolvedData rd = resolve_data(cfg);
  if (structure_ckpt.empty()) structure_ckpt = default_ckpt(cfg, "structure.ckpt");
  checkpoint::ChannelCheckpoint structure =
      load_and_check(structure_ckpt, cfg, rd, model::ChannelKind::structure);

  model::BallMatrix emb = model::forward_channel(structure.model, rd.combined.graph);
  if (beta != 1.0) {
    if (visual_ckpt.empty()) {
      std::string candidate = default_ckpt(cfg, "visual.ckpt");
      if (!fs::exists(candidate)) {
        throw std::runtime_error("predict with beta=" + std::to_string(beta) +
                                 " needs a visual checkpoint");
      }
      visual_ckpt = candidate;
    }
    checkpoint::ChannelCheckpoint visual =
        load_and_check(visual_ckpt, cfg, rd, model::ChannelKind::visual);
    model::BallMatrix emb_visual = model::forward_channel(visual.model, rd.combined.graph);
    emb = model::fuse_rows(emb, emb_visual, model::FusionConfig(beta, emb.curvature));
  }

  eval::RankingReport report =
      eval::predict(emb, rd.dataset.seeds.test_pairs, rd.kg2_candidates(), cfg.k_list);

  fs::create_directories(cfg.output_dir);
  write_manifest("predict", cfg, cfg.output_dir);
  std::vector<std::string> names = rd.union_entity_names();
  std::string path = cfg.output_dir + "/predictions.tsv";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "query\trank_of_truth\ttop_candidates\n";
  for (const eval::QueryRanking& qr : report.per_test_entity) {
    out << names[static_cast<size_t>(qr.query_index)] << '\t' << qr.rank_of_truth;
    int shown = std::min<int>(top_k, static_cast<int>(qr.ranked_candidates.size()));
    for (int j = 0; j < shown; ++j) {
      out << '\t' << names[static_cast<size_t>(qr.ranked_candidates[static_cast<size_t>(j)])];
    }
    out << '\n';
  }
  std::cout << "wrote " << report.per_test_entity.size() << " predictions to " << path << "\n";
  return path;
}

std::string cmd_export_embeddings(const RunConfig& cfg, ExportChannel channel, double beta,
                                  std::string out_path, std::string structure_ckpt,
                                  std::string visual_ckpt) {
  ResolvedData rd = resolve_data(cfg);
  if (structure_ckpt.empty()) structure_ckpt = default_ckpt(cfg, "structure.ckpt");
  if (visual_ckpt.empty()) visual_ckpt = default_ckpt(cfg, "visual.ckpt");
  if (out_path.empty()) out_path = cfg.output_dir + "/embeddings.tsv";

  model::BallMatrix emb = [&] {
    switch (channel) {
      case ExportChannel::structure: {
        auto ckpt = load_and_check(structure_ckpt, cfg, rd, model::ChannelKind::structure);
        return model::forward_channel(ckpt.model, rd.combined.graph);
      }
      case ExportChannel::visual: {
        auto ckpt = load_and_check(visual_ckpt, cfg, rd, model::ChannelKind::visual);
        return model::forward_channel(ckpt.model, rd.combined.graph);
      }
      case ExportChannel::fused:
      default: {
        auto s = load_and_check(structure_ckpt, cfg, rd, model::ChannelKind::structure);
        auto v = load_and_check(visual_ckpt, cfg, rd, model::ChannelKind::visual);
        model::BallMatrix es = model::forward_channel(s.model, rd.combined.graph);
        model::BallMatrix ev = model::forward_channel(v.model, rd.combined.graph);
        return model::fuse_rows(es, ev, model::FusionConfig(beta, es.curvature));
      }
    }
  }();

  fs::create_directories(fs::path(out_path).parent_path().empty()
                             ? "."
                             : fs::path(out_path).parent_path().string());
  eval::export_embeddings(emb, rd.union_entity_names(), out_path);
  std::cout << "exported " << emb.n() << " embeddings to " << out_path << "\n";
  return out_path;
}

GradCheckOutcome cmd_gradcheck(const RunConfig& cfg) {
  // fixed small instance: 15 entities per KG (30 nodes), 2 layers, d = 6
  data::SyntheticSpec spec;
  spec.n_entities = 15;
  spec.avg_degree = 3.0;
  spec.edge_noise = 0.0;
  spec.visual_dim = 0;
  spec.rng_seed = cfg.training.rng_seed + 1;
  data::AlignmentDataset ds = data::generate_synthetic(spec, 1.0 / 3.0);
  graph::UnionGraph u = graph::disjoint_union(ds.kg1, ds.kg2);

  model::ChannelConfig mc;
  mc.layer_count = 2;
  mc.curvatures = {1.0};
  Rng init_rng(cfg.training.rng_seed, kGradCheckStream);
  model::ChannelModel channel = model::make_structure_channel(u.graph.n, 6, mc, init_rng);

  train::NegativePools pools = train::full_pools(u);
  Rng neg_rng(cfg.training.rng_seed, kGradCheckStream + 1);
  std::vector<train::NegativeSample> negatives = train::sample_epoch_negatives(
      ds.seeds.train_pairs, cfg.training.negatives_per_positive, pools, neg_rng);

  train::GradCheckOptions opt;
  opt.sample_coordinates = 220;
  opt.fd_step = 1e-5;
  opt.rng_seed = cfg.training.rng_seed;

  GradCheckOutcome outcome;
  outcome.report = train::gradient_check(channel, u.graph, ds.seeds.train_pairs, negatives,
                                         cfg.training.margin_struct, opt);
  outcome.passed = outcome.report.max_relative_error < 1e-4;

  std::cout << "gradient check: " << outcome.report.coordinates_checked
            << " coordinates, max relative error " << outcome.report.max_relative_error
            << " at " << outcome.report.worst_parameter << " ("
            << outcome.report.skipped_kink << " kink-skipped, "
            << outcome.report.skipped_noise_floor << " below noise floor)\n"
            << (outcome.passed ? "PASS" : "FAIL") << "\n";
  return outcome;
}

std::string cmd_stats(const RunConfig& cfg) {
  ResolvedData rd = resolve_data(cfg);
  std::string table = data::format_stats_table(data::compute_stats(rd.dataset));
  std::cout << table;
  return table;
}

data::DatasetPaths cmd_generate(const RunConfig& cfg, const std::string& out_dir) {
  if (!cfg.data.synthetic.has_value()) {
    throw std::invalid_argument("generate requires a data.synthetic section in the config");
  }
  ResolvedData rd = resolve_data(cfg);
  data::DatasetPaths paths = data::save_dataset(rd.dataset, out_dir);
  write_manifest("generate", cfg, out_dir);
  std::cout << "wrote synthetic dataset to " << out_dir << "\n";
  return paths;
}

}  // namespace hypalign::cli
