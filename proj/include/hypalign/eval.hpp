#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hypalign/data.hpp"
#include "hypalign/graph.hpp"
#include "hypalign/model.hpp"

namespace hypalign::eval {

struct QueryRanking {
  int query_index = 0;              // KG1 entity (combined index)
  std::vector<int> ranked_candidates;  // all KG2 candidates, best first
  int rank_of_truth = 0;            // 1-based
};

enum class Direction { kg1_to_kg2 };

// Ranking direction is fixed KG1 -> KG2: the L1 Moebius distance is not
// assumed symmetric.
struct RankingReport {
  std::vector<QueryRanking> per_test_entity;
  std::map<int, double> hits_at;
  double mean_rank = 0.0;
  double mrr = 0.0;
  Direction direction = Direction::kg1_to_kg2;
};

// For each test query, ranks every KG2 candidate by hyperbolic distance
// ascending. Ties break deterministically toward the smaller entity index, so
// rank = 1 + #{strictly closer} + #{tied with smaller index}.
RankingReport predict(const model::BallMatrix& embeddings,
                      const std::vector<std::pair<int, int>>& test_pairs,
                      const std::vector<int>& kg2_candidates, const std::vector<int>& k_list);

// One line per entity: name then coordinates, tab-separated, 17 significant
// digits (doubles round-trip exactly).
void export_embeddings(const model::BallMatrix& embeddings,
                       const std::vector<std::string>& names, const std::string& path);

struct VariantRow {
  std::string label;
  double beta = 1.0;
  RankingReport report;
};

// Ablation table: structure-only (beta = 1), visual-only (beta = 0) when a
// visual channel exists, and one fused row per requested beta. Requesting
// fused rows without a visual channel is an error.
std::vector<VariantRow> evaluate_variants(const model::ChannelModel& structure,
                                          const std::optional<model::ChannelModel>& visual,
                                          const graph::NormalizedGraph& g,
                                          const std::vector<std::pair<int, int>>& test_pairs,
                                          const std::vector<int>& kg2_candidates,
                                          const std::vector<double>& beta_list,
                                          const std::vector<int>& k_list);

std::string format_variant_table(const std::vector<VariantRow>& rows,
                                 const std::vector<int>& k_list);

}  // namespace hypalign::eval
