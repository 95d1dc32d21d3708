#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hypalign/data.hpp"
#include "hypalign/train.hpp"

namespace hypalign::cli {

struct DataConfig {
  std::optional<data::DatasetPaths> files;
  std::optional<data::SyntheticSpec> synthetic;
  double split_fraction = 0.3;
  uint64_t rng_seed = 1;  // split shuffle seed for file datasets
};

struct ModelConfig {
  int dim = 64;
  int layers = 2;
  std::vector<double> curvatures = {1.0};
  bool use_visual = true;
  // "seed_tied": training pairs share one initial feature row, other rows
  // start at zero; "random": independent rows for every entity
  std::string feature_init = "seed_tied";
};

struct RunConfig {
  DataConfig data;
  ModelConfig model;
  train::TrainingConfig training;
  std::vector<double> beta_list = {0.0, 0.5, 0.9, 1.0};
  std::vector<int> k_list = {1, 10};
  std::string output_dir = "run";
};

// Throws invalid_argument naming the offending field.
void validate(const RunConfig& cfg);

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& cfg);

// Reads either a plain config file or a run manifest (a manifest embeds the
// resolved config under its "config" key).
RunConfig load_config(const std::string& path);

// Command-line values that take precedence over file values.
struct ConfigOverrides {
  std::optional<std::string> output_dir;
  std::optional<int> epochs;
  std::optional<int> dim;
  std::optional<int> layers;
  std::optional<int> negatives;
  std::optional<double> learning_rate;
  std::optional<double> split_fraction;
  std::optional<double> margin_struct;
  std::optional<double> margin_visual;
  std::optional<uint64_t> train_seed;
  std::optional<uint64_t> data_seed;
  std::optional<bool> no_visual;
  std::optional<std::vector<double>> beta_list;
  std::optional<std::vector<int>> k_list;
};

void apply_overrides(RunConfig& cfg, const ConfigOverrides& ov);

// Manifest with the fully resolved config and format versions; rerunning a
// command from its manifest reproduces the run exactly.
nlohmann::json make_manifest(const std::string& command, const RunConfig& cfg);
void write_manifest(const std::string& command, const RunConfig& cfg,
                    const std::string& output_dir);

}  // namespace hypalign::cli
