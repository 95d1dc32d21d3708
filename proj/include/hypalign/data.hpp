#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hypalign/geometry.hpp"
#include "hypalign/graph.hpp"

namespace hypalign::data {

using geometry::Matrix;

// Seed alignment pairs in the combined (disjoint-union) index space: the
// first element lies in [0, |E1|), the second in [|E1|, |E1|+|E2|).
struct SeedAlignments {
  std::vector<std::pair<int, int>> train_pairs;
  std::vector<std::pair<int, int>> test_pairs;
};

// Per-entity visual feature vectors; entities without an image keep a zero
// row and has_image = false.
struct VisualFeatures {
  Matrix features;  // n x dv
  std::vector<bool> has_image;
  int dim = 0;

  bool empty() const { return dim == 0; }
  int count_images() const;
};

struct AlignmentDataset {
  graph::TripleStore kg1;
  graph::TripleStore kg2;
  VisualFeatures visual1;
  VisualFeatures visual2;
  SeedAlignments seeds;
  double split_fraction = 0.0;
  uint64_t rng_seed = 0;

  bool has_visual() const { return !visual1.empty() && !visual2.empty(); }
  int kg2_offset() const { return kg1.num_entities(); }
};

struct DatasetPaths {
  std::string kg1_triples;
  std::string kg2_triples;
  std::string alignment;
  std::string kg1_visual;  // optional, empty = absent
  std::string kg2_visual;  // optional, empty = absent
};

// Loads the three file formats, shuffles the alignment list with rng_seed and
// splits it into train (split_fraction, rounded to nearest) and test.
AlignmentDataset load_dataset(const DatasetPaths& paths, double split_fraction,
                              uint64_t rng_seed);

// Writes kg1_triples.tsv, kg2_triples.tsv, alignment.tsv and, when visual
// features are present, kg1_visual.tsv / kg2_visual.tsv into dir.
// Returns the paths it wrote.
DatasetPaths save_dataset(const AlignmentDataset& ds, const std::string& dir);

// Two-KG benchmark: KG2 is an isomorphic copy of an Erdos-Renyi graph with a
// fraction of edges rewired, ground-truth alignment is the isomorphism.
struct SyntheticSpec {
  int n_entities = 100;
  double avg_degree = 4.0;
  double edge_noise = 0.0;     // fraction of KG2 edges rewired
  double visual_signal = 1.0;  // correlation of aligned entities' features
  uint64_t rng_seed = 0;
  int visual_dim = 32;
};

AlignmentDataset generate_synthetic(const SyntheticSpec& spec, double split_fraction);

struct KgStats {
  std::string label;
  int entities = 0;
  int relations = 0;
  int triples = 0;
  int images = 0;
};

struct DatasetStats {
  KgStats kg1;
  KgStats kg2;
  int alignments = 0;
};

DatasetStats compute_stats(const AlignmentDataset& ds);
std::string format_stats_table(const DatasetStats& stats);

}  // namespace hypalign::data
