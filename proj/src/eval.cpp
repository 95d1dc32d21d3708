#include "hypalign/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hypalign::eval {

RankingReport predict(const model::BallMatrix& embeddings,
                      const std::vector<std::pair<int, int>>& test_pairs,
                      const std::vector<int>& kg2_candidates, const std::vector<int>& k_list) {
  if (test_pairs.empty()) {
    throw std::invalid_argument("predict: empty test set");
  }
  if (kg2_candidates.empty()) {
    throw std::invalid_argument("predict: no candidates");
  }
  const geometry::Curvature c = embeddings.curvature;
  const size_t m = kg2_candidates.size();

  RankingReport report;
  report.per_test_entity.reserve(test_pairs.size());
  double rank_sum = 0.0;
  double reciprocal_sum = 0.0;

  std::vector<double> dist(m);
  for (const auto& [query, truth] : test_pairs) {
    geometry::Vector q = embeddings.rows.row(query).transpose();
    int truth_pos = -1;
    for (size_t j = 0; j < m; ++j) {
      dist[j] = geometry::hyp_distance_vec(q, embeddings.rows.row(kg2_candidates[j]).transpose(), c);
      if (kg2_candidates[j] == truth) truth_pos = static_cast<int>(j);
    }
    if (truth_pos < 0) {
      throw std::invalid_argument("predict: ground-truth entity " + std::to_string(truth) +
                                  " is not among the candidates");
    }

    QueryRanking qr;
    qr.query_index = query;
    qr.ranked_candidates.resize(m);
    std::vector<int> order(m);
    for (size_t j = 0; j < m; ++j) order[j] = static_cast<int>(j);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (dist[static_cast<size_t>(a)] != dist[static_cast<size_t>(b)]) {
        return dist[static_cast<size_t>(a)] < dist[static_cast<size_t>(b)];
      }
      return kg2_candidates[static_cast<size_t>(a)] < kg2_candidates[static_cast<size_t>(b)];
    });
    for (size_t j = 0; j < m; ++j) {
      qr.ranked_candidates[j] = kg2_candidates[static_cast<size_t>(order[j])];
    }

    // pessimistic deterministic rank: strictly closer candidates plus ties
    // with a smaller entity index
    double d_truth = dist[static_cast<size_t>(truth_pos)];
    int rank = 1;
    for (size_t j = 0; j < m; ++j) {
      if (static_cast<int>(j) == truth_pos) continue;
      if (dist[j] < d_truth || (dist[j] == d_truth && kg2_candidates[j] < truth)) {
        ++rank;
      }
    }
    qr.rank_of_truth = rank;
    rank_sum += rank;
    reciprocal_sum += 1.0 / rank;
    report.per_test_entity.push_back(std::move(qr));
  }

  const double n_queries = static_cast<double>(test_pairs.size());
  for (int k : k_list) {
    int hits = 0;
    for (const QueryRanking& qr : report.per_test_entity) {
      if (qr.rank_of_truth <= k) ++hits;
    }
    report.hits_at[k] = static_cast<double>(hits) / n_queries;
  }
  report.mean_rank = rank_sum / n_queries;
  report.mrr = reciprocal_sum / n_queries;
  return report;
}

void export_embeddings(const model::BallMatrix& embeddings,
                       const std::vector<std::string>& names, const std::string& path) {
  if (static_cast<Eigen::Index>(names.size()) != embeddings.rows.rows()) {
    throw std::invalid_argument("export_embeddings: name count does not match rows");
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("export_embeddings: cannot write " + path);
  }
  char buf[64];
  for (Eigen::Index i = 0; i < embeddings.rows.rows(); ++i) {
    out << names[static_cast<size_t>(i)];
    for (Eigen::Index j = 0; j < embeddings.rows.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", embeddings.rows(i, j));
      out << '\t' << buf;
    }
    out << '\n';
  }
  if (!out) {
    throw std::runtime_error("export_embeddings: write failed for " + path);
  }
}

std::vector<VariantRow> evaluate_variants(const model::ChannelModel& structure,
                                          const std::optional<model::ChannelModel>& visual,
                                          const graph::NormalizedGraph& g,
                                          const std::vector<std::pair<int, int>>& test_pairs,
                                          const std::vector<int>& kg2_candidates,
                                          const std::vector<double>& beta_list,
                                          const std::vector<int>& k_list) {
  if (!visual.has_value()) {
    for (double beta : beta_list) {
      if (beta != 1.0) {
        throw std::invalid_argument(
            "evaluate_variants: fused rows (beta = " + std::to_string(beta) +
            ") require a trained visual channel");
      }
    }
  }

  model::BallMatrix emb_struct = model::forward_channel(structure, g);
  std::vector<VariantRow> rows;
  rows.push_back(
      {"structure_only", 1.0, predict(emb_struct, test_pairs, kg2_candidates, k_list)});

  if (visual.has_value()) {
    model::BallMatrix emb_visual = model::forward_channel(*visual, g);
    if (emb_visual.dim() != emb_struct.dim()) {
      throw std::invalid_argument("evaluate_variants: channel dimensions differ");
    }
    rows.push_back(
        {"visual_only", 0.0, predict(emb_visual, test_pairs, kg2_candidates, k_list)});
    for (double beta : beta_list) {
      model::FusionConfig cfg(beta, emb_struct.curvature);
      model::BallMatrix fused = model::fuse_rows(emb_struct, emb_visual, cfg);
      std::ostringstream label;
      label << "fused_beta_" << beta;
      rows.push_back({label.str(), beta, predict(fused, test_pairs, kg2_candidates, k_list)});
    }
  }
  return rows;
}

std::string format_variant_table(const std::vector<VariantRow>& rows,
                                 const std::vector<int>& k_list) {
  std::ostringstream out;
  char buf[64];
  out << "variant";
  for (int k : k_list) out << "\thits@" << k;
  out << "\tmean_rank\tmrr\n";
  for (const VariantRow& row : rows) {
    out << row.label;
    for (int k : k_list) {
      std::snprintf(buf, sizeof(buf), "%.4f", row.report.hits_at.at(k));
      out << '\t' << buf;
    }
    std::snprintf(buf, sizeof(buf), "%.2f", row.report.mean_rank);
    out << '\t' << buf;
    std::snprintf(buf, sizeof(buf), "%.4f", row.report.mrr);
    out << '\t' << buf << '\n';
  }
  return out.str();
}

}  // namespace hypalign::eval
