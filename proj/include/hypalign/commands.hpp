#pragma once

#include <optional>
#include <string>

#include "hypalign/config.hpp"
#include "hypalign/eval.hpp"

namespace hypalign::cli {

// Dataset plus its combined graph, shared by every command.
struct ResolvedData {
  data::AlignmentDataset dataset;
  graph::UnionGraph combined;

  std::vector<int> kg2_candidates() const { return combined.kg2_to_global; }
  std::vector<std::string> union_entity_names() const;
};

ResolvedData resolve_data(const RunConfig& cfg);

// train: writes manifest_train.json, structure.ckpt (+ visual.ckpt), and
// per-epoch loss logs into cfg.output_dir.
struct TrainOutputs {
  std::string structure_checkpoint;
  std::string visual_checkpoint;  // empty when no visual channel was trained
};
TrainOutputs cmd_train(const RunConfig& cfg);

// evaluate: loads checkpoints (default locations under cfg.output_dir),
// prints the ablation table, writes metrics.txt / metrics.json + manifest.
struct EvaluateOutputs {
  std::vector<eval::VariantRow> rows;
  std::string metrics_txt;
  std::string metrics_json;
};
EvaluateOutputs cmd_evaluate(const RunConfig& cfg, std::string structure_ckpt = "",
                             std::string visual_ckpt = "");

// predict: top-k candidate list per test entity, written as TSV.
std::string cmd_predict(const RunConfig& cfg, double beta, int top_k,
                        std::string structure_ckpt = "", std::string visual_ckpt = "");

enum class ExportChannel { structure, visual, fused };

// export-embeddings: one line per union entity (KG1 names prefixed "1:",
// KG2 names "2:").
std::string cmd_export_embeddings(const RunConfig& cfg, ExportChannel channel, double beta,
                                  std::string out_path = "", std::string structure_ckpt = "",
                                  std::string visual_ckpt = "");

// gradcheck: analytic-vs-numeric gradient comparison on a small generated
// instance; returns the report and passes iff max relative error < 1e-4.
struct GradCheckOutcome {
  train::GradCheckReport report;
  bool passed = false;
};
GradCheckOutcome cmd_gradcheck(const RunConfig& cfg);

std::string cmd_stats(const RunConfig& cfg);

// generate: synthetic dataset written as the three dataset file formats.
data::DatasetPaths cmd_generate(const RunConfig& cfg, const std::string& out_dir);

}  // namespace hypalign::cli
