#include "hypalign/config.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "hypalign/checkpoint.hpp"

namespace hypalign::cli {

using nlohmann::json;

namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw std::invalid_argument("config: " + field + " " + why);
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    bad_field(key, "has the wrong type");
  }
}

}  // namespace

void validate(const RunConfig& cfg) {
  if (!cfg.data.files.has_value() && !cfg.data.synthetic.has_value()) {
    bad_field("data", "must provide either \"files\" or \"synthetic\"");
  }
  if (cfg.data.files.has_value() && cfg.data.synthetic.has_value()) {
    bad_field("data", "cannot provide both \"files\" and \"synthetic\"");
  }
  if (cfg.data.files.has_value()) {
    const data::DatasetPaths& p = *cfg.data.files;
    if (p.kg1_triples.empty()) bad_field("data.files.kg1_triples", "is required");
    if (p.kg2_triples.empty()) bad_field("data.files.kg2_triples", "is required");
    if (p.alignment.empty()) bad_field("data.files.alignment", "is required");
    if (p.kg1_visual.empty() != p.kg2_visual.empty()) {
      bad_field("data.files", "visual paths must be given for both KGs or neither");
    }
  }
  if (!(cfg.data.split_fraction > 0.0 && cfg.data.split_fraction < 1.0)) {
    bad_field("data.split_fraction", "must lie in (0, 1)");
  }
  if (cfg.model.dim < 1) bad_field("model.dim", "must be >= 1");
  if (cfg.model.layers < 1) bad_field("model.layers", "must be >= 1");
  if (cfg.model.curvatures.empty()) bad_field("model.curvatures", "must not be empty");
  for (double c : cfg.model.curvatures) {
    if (!(c > 0.0)) bad_field("model.curvatures", "entries must be positive");
  }
  if (cfg.model.curvatures.size() != 1 &&
      cfg.model.curvatures.size() != static_cast<size_t>(cfg.model.layers) + 1) {
    bad_field("model.curvatures", "needs 1 value or layers+1 values");
  }
  if (cfg.model.feature_init != "seed_tied" && cfg.model.feature_init != "random") {
    bad_field("model.feature_init", "must be \"seed_tied\" or \"random\"");
  }
  try {
    train::validate(cfg.training);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("config: training.") + e.what());
  }
  for (double b : cfg.beta_list) {
    if (!(b >= 0.0 && b <= 1.0)) bad_field("evaluation.beta_list", "entries must lie in [0, 1]");
  }
  if (cfg.k_list.empty()) bad_field("evaluation.k_list", "must not be empty");
  for (int k : cfg.k_list) {
    if (k < 1) bad_field("evaluation.k_list", "entries must be >= 1");
  }
  if (cfg.output_dir.empty()) bad_field("output_dir", "must not be empty");
}

RunConfig config_from_json(const json& j) {
  RunConfig cfg;
  if (j.contains("data")) {
    const json& d = j.at("data");
    if (d.contains("files")) {
      const json& f = d.at("files");
      data::DatasetPaths p;
      p.kg1_triples = get_or<std::string>(f, "kg1_triples", "");
      p.kg2_triples = get_or<std::string>(f, "kg2_triples", "");
      p.alignment = get_or<std::string>(f, "alignment", "");
      p.kg1_visual = get_or<std::string>(f, "kg1_visual", "");
      p.kg2_visual = get_or<std::string>(f, "kg2_visual", "");
      cfg.data.files = p;
    }
    if (d.contains("synthetic")) {
      const json& s = d.at("synthetic");
      data::SyntheticSpec spec;
      spec.n_entities = get_or<int>(s, "n_entities", spec.n_entities);
      spec.avg_degree = get_or<double>(s, "avg_degree", spec.avg_degree);
      spec.edge_noise = get_or<double>(s, "edge_noise", spec.edge_noise);
      spec.visual_signal = get_or<double>(s, "visual_signal", spec.visual_signal);
      spec.rng_seed = get_or<uint64_t>(s, "rng_seed", spec.rng_seed);
      spec.visual_dim = get_or<int>(s, "visual_dim", spec.visual_dim);
      cfg.data.synthetic = spec;
    }
    cfg.data.split_fraction = get_or<double>(d, "split_fraction", cfg.data.split_fraction);
    cfg.data.rng_seed = get_or<uint64_t>(d, "rng_seed", cfg.data.rng_seed);
  }
  if (j.contains("model")) {
    const json& m = j.at("model");
    cfg.model.dim = get_or<int>(m, "dim", cfg.model.dim);
    cfg.model.layers = get_or<int>(m, "layers", cfg.model.layers);
    cfg.model.curvatures =
        get_or<std::vector<double>>(m, "curvatures", cfg.model.curvatures);
    cfg.model.use_visual = get_or<bool>(m, "use_visual", cfg.model.use_visual);
    cfg.model.feature_init = get_or<std::string>(m, "feature_init", cfg.model.feature_init);
  }
  if (j.contains("training")) {
    const json& t = j.at("training");
    train::TrainingConfig& tc = cfg.training;
    tc.margin_struct = get_or<double>(t, "margin_struct", tc.margin_struct);
    tc.margin_visual = get_or<double>(t, "margin_visual", tc.margin_visual);
    tc.negatives_per_positive =
        get_or<int>(t, "negatives_per_positive", tc.negatives_per_positive);
    tc.learning_rate = get_or<double>(t, "learning_rate", tc.learning_rate);
    tc.epochs = get_or<int>(t, "epochs", tc.epochs);
    tc.rng_seed = get_or<uint64_t>(t, "rng_seed", tc.rng_seed);
    tc.adam_beta1 = get_or<double>(t, "adam_beta1", tc.adam_beta1);
    tc.adam_beta2 = get_or<double>(t, "adam_beta2", tc.adam_beta2);
    tc.adam_eps = get_or<double>(t, "adam_eps", tc.adam_eps);
  }
  if (j.contains("evaluation")) {
    const json& e = j.at("evaluation");
    cfg.beta_list = get_or<std::vector<double>>(e, "beta_list", cfg.beta_list);
    cfg.k_list = get_or<std::vector<int>>(e, "k_list", cfg.k_list);
  }
  cfg.output_dir = get_or<std::string>(j, "output_dir", cfg.output_dir);
  return cfg;
}

json config_to_json(const RunConfig& cfg) {
  json j;
  if (cfg.data.files.has_value()) {
    const data::DatasetPaths& p = *cfg.data.files;
    j["data"]["files"] = {{"kg1_triples", p.kg1_triples},
                          {"kg2_triples", p.kg2_triples},
                          {"alignment", p.alignment},
                          {"kg1_visual", p.kg1_visual},
                          {"kg2_visual", p.kg2_visual}};
  }
  if (cfg.data.synthetic.has_value()) {
    const data::SyntheticSpec& s = *cfg.data.synthetic;
    j["data"]["synthetic"] = {{"n_entities", s.n_entities},
                              {"avg_degree", s.avg_degree},
                              {"edge_noise", s.edge_noise},
                              {"visual_signal", s.visual_signal},
                              {"rng_seed", s.rng_seed},
                              {"visual_dim", s.visual_dim}};
  }
  j["data"]["split_fraction"] = cfg.data.split_fraction;
  j["data"]["rng_seed"] = cfg.data.rng_seed;
  j["model"] = {{"dim", cfg.model.dim},
                {"layers", cfg.model.layers},
                {"curvatures", cfg.model.curvatures},
                {"use_visual", cfg.model.use_visual},
                {"feature_init", cfg.model.feature_init}};
  j["training"] = {{"margin_struct", cfg.training.margin_struct},
                   {"margin_visual", cfg.training.margin_visual},
                   {"negatives_per_positive", cfg.training.negatives_per_positive},
                   {"learning_rate", cfg.training.learning_rate},
                   {"epochs", cfg.training.epochs},
                   {"rng_seed", cfg.training.rng_seed},
                   {"adam_beta1", cfg.training.adam_beta1},
                   {"adam_beta2", cfg.training.adam_beta2},
                   {"adam_eps", cfg.training.adam_eps}};
  j["evaluation"] = {{"beta_list", cfg.beta_list}, {"k_list", cfg.k_list}};
  j["output_dir"] = cfg.output_dir;
  return j;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file: " + path);
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("config file " + path + " is not valid JSON: " + e.what());
  }
  if (j.contains("config")) {
    j = j.at("config");  // manifest form
  }
  return config_from_json(j);
}

void apply_overrides(RunConfig& cfg, const ConfigOverrides& ov) {
  if (ov.output_dir) cfg.output_dir = *ov.output_dir;
  if (ov.epochs) cfg.training.epochs = *ov.epochs;
  if (ov.dim) cfg.model.dim = *ov.dim;
  if (ov.layers) cfg.model.layers = *ov.layers;
  if (ov.negatives) cfg.training.negatives_per_positive = *ov.negatives;
  if (ov.learning_rate) cfg.training.learning_rate = *ov.learning_rate;
  if (ov.split_fraction) cfg.data.split_fraction = *ov.split_fraction;
  if (ov.margin_struct) cfg.training.margin_struct = *ov.margin_struct;
  if (ov.margin_visual) cfg.training.margin_visual = *ov.margin_visual;
  if (ov.train_seed) cfg.training.rng_seed = *ov.train_seed;
  if (ov.data_seed) {
    cfg.data.rng_seed = *ov.data_seed;
    if (cfg.data.synthetic.has_value()) cfg.data.synthetic->rng_seed = *ov.data_seed;
  }
  if (ov.no_visual && *ov.no_visual) cfg.model.use_visual = false;
  if (ov.beta_list) cfg.beta_list = *ov.beta_list;
  if (ov.k_list) cfg.k_list = *ov.k_list;
}

json make_manifest(const std::string& command, const RunConfig& cfg) {
  json j;
  j["command"] = command;
  j["config"] = config_to_json(cfg);
  j["format_versions"] = {{"checkpoint", checkpoint::kCheckpointVersion},
                          {"dataset_files", 1},
                          {"metrics", 1},
                          {"manifest", 1}};
  return j;
}

void write_manifest(const std::string& command, const RunConfig& cfg,
                    const std::string& output_dir) {
  std::filesystem::create_directories(output_dir);
  std::string path = output_dir + "/manifest_" + command + ".json";
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write manifest: " + path);
  }
  out << make_manifest(command, cfg).dump(2) << '\n';
}

}  // namespace hypalign::cli
