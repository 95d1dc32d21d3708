#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hypalign/eval.hpp"
#include "hypalign/rng.hpp"
#include "hypalign/train.hpp"

using namespace hypalign;
using namespace hypalign::eval;

namespace {

// independent full-sort ranking oracle: sorts the complete distance list per
// query with a stable comparator and reads the truth position off the order
struct OracleResult {
  std::vector<int> ranks;
  std::map<int, double> hits;
};

OracleResult brute_force_rank(const model::BallMatrix& emb,
                              const std::vector<std::pair<int, int>>& tests,
                              const std::vector<int>& candidates,
                              const std::vector<int>& k_list) {
  OracleResult result;
  for (const auto& [query, truth] : tests) {
    std::vector<std::pair<double, int>> scored;
    for (int cand : candidates) {
      geometry::BallPoint a(emb.rows.row(query).transpose(), emb.curvature);
      geometry::BallPoint b(emb.rows.row(cand).transpose(), emb.curvature);
      scored.emplace_back(geometry::hyp_distance(a, b), cand);
    }
    std::sort(scored.begin(), scored.end());
    int rank = 0;
    for (size_t j = 0; j < scored.size(); ++j) {
      if (scored[j].second == truth) {
        rank = static_cast<int>(j) + 1;
        break;
      }
    }
    result.ranks.push_back(rank);
  }
  for (int k : k_list) {
    int hits = 0;
    for (int r : result.ranks) {
      if (r <= k) ++hits;
    }
    result.hits[k] = static_cast<double>(hits) / static_cast<double>(tests.size());
  }
  return result;
}

model::BallMatrix random_embeddings(int n, int d, double spread, Rng& rng) {
  geometry::Curvature c(1.0);
  geometry::Matrix rows(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) rows(i, j) = spread * rng.normal();
  return model::BallMatrix{geometry::project_rows_to_ball(std::move(rows), c), c};
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("predict matches the brute-force oracle on random instances") {
  Rng rng(301);
  std::vector<int> k_list{1, 5, 10};
  for (int trial = 0; trial < 30; ++trial) {
    int n_each = 20 + static_cast<int>(rng.uniform_index(6));  // 20..25 per side
    model::BallMatrix emb = random_embeddings(2 * n_each, 6, 0.3, rng);

    std::vector<int> candidates;
    for (int j = 0; j < n_each; ++j) candidates.push_back(n_each + j);
    std::vector<std::pair<int, int>> tests;
    for (int i = 0; i < n_each; ++i) tests.emplace_back(i, n_each + i);

    RankingReport report = predict(emb, tests, candidates, k_list);
    OracleResult oracle = brute_force_rank(emb, tests, candidates, k_list);

    for (size_t q = 0; q < tests.size(); ++q) {
      CHECK(report.per_test_entity[q].rank_of_truth == oracle.ranks[q]);
    }
    for (int k : k_list) {
      CHECK(report.hits_at[k] == oracle.hits[k]);
    }
  }
}

TEST_CASE("identical embeddings rank purely by index") {
  geometry::Curvature c(1.0);
  model::BallMatrix emb{geometry::Matrix::Zero(8, 3), c};
  std::vector<int> candidates{4, 5, 6, 7};
  std::vector<std::pair<int, int>> tests{{0, 4}, {1, 5}, {2, 6}, {3, 7}};
  RankingReport report = predict(emb, tests, candidates, {1, 2, 3, 4});

  // all distances tie, so the rank of truth is its index position
  CHECK(report.per_test_entity[0].rank_of_truth == 1);
  CHECK(report.per_test_entity[1].rank_of_truth == 2);
  CHECK(report.per_test_entity[2].rank_of_truth == 3);
  CHECK(report.per_test_entity[3].rank_of_truth == 4);
  CHECK(report.hits_at[1] == doctest::Approx(0.25));
  CHECK(report.hits_at[2] == doctest::Approx(0.5));
  CHECK(report.hits_at[4] == doctest::Approx(1.0));
  // candidate order in each ranking is canonical
  CHECK(report.per_test_entity[0].ranked_candidates == std::vector<int>{4, 5, 6, 7});
}

TEST_CASE("truth nearest gives perfect hits at one") {
  Rng rng(303);
  geometry::Curvature c(1.0);
  int n = 10;
  geometry::Matrix rows(2 * n, 2);
  for (int i = 0; i < n; ++i) {
    double angle = 0.5 * i;
    rows.row(i) << 0.4 * std::cos(angle), 0.4 * std::sin(angle);
    rows.row(n + i) = rows.row(i);  // partner sits exactly on top
  }
  model::BallMatrix emb{rows, c};
  std::vector<int> candidates;
  std::vector<std::pair<int, int>> tests;
  for (int i = 0; i < n; ++i) {
    candidates.push_back(n + i);
    tests.emplace_back(i, n + i);
  }
  RankingReport report = predict(emb, tests, candidates, {1});
  CHECK(report.hits_at[1] == doctest::Approx(1.0));
  CHECK(report.mrr == doctest::Approx(1.0));
  CHECK(report.mean_rank == doctest::Approx(1.0));
}

TEST_CASE("hits are monotone in k and saturate at the candidate count") {
  Rng rng(305);
  model::BallMatrix emb = random_embeddings(30, 4, 0.3, rng);
  std::vector<int> candidates;
  std::vector<std::pair<int, int>> tests;
  for (int i = 0; i < 15; ++i) {
    candidates.push_back(15 + i);
    tests.emplace_back(i, 15 + i);
  }
  std::vector<int> k_list{1, 2, 5, 10, 15};
  RankingReport report = predict(emb, tests, candidates, k_list);
  double prev = 0.0;
  for (int k : k_list) {
    CHECK(report.hits_at[k] >= prev);
    prev = report.hits_at[k];
  }
  CHECK(report.hits_at[15] == doctest::Approx(1.0));
}

TEST_CASE("predict is independent of candidate enumeration order") {
  Rng rng(331);
  model::BallMatrix emb = random_embeddings(24, 4, 0.3, rng);
  std::vector<int> candidates;
  std::vector<std::pair<int, int>> tests;
  for (int i = 0; i < 12; ++i) {
    candidates.push_back(12 + i);
    tests.emplace_back(i, 12 + i);
  }
  RankingReport base = predict(emb, tests, candidates, {1, 5});

  std::vector<int> shuffled = candidates;
  for (size_t i = shuffled.size(); i > 1; --i) {
    std::swap(shuffled[i - 1], shuffled[rng.uniform_index(i)]);
  }
  RankingReport permuted = predict(emb, tests, shuffled, {1, 5});

  CHECK(base.hits_at == permuted.hits_at);
  for (size_t q = 0; q < tests.size(); ++q) {
    CHECK(base.per_test_entity[q].rank_of_truth == permuted.per_test_entity[q].rank_of_truth);
    CHECK(base.per_test_entity[q].ranked_candidates ==
          permuted.per_test_entity[q].ranked_candidates);
  }
}

TEST_CASE("predict rejects empty inputs") {
  Rng rng(307);
  model::BallMatrix emb = random_embeddings(4, 2, 0.2, rng);
  CHECK_THROWS_AS(predict(emb, {}, {2, 3}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(predict(emb, {{0, 2}}, {}, {1}), std::invalid_argument);
}

TEST_CASE("export_embeddings round trips at 17 significant digits") {
  Rng rng(309);
  model::BallMatrix emb = random_embeddings(5, 3, 0.3, rng);
  emb.rows.row(4).setZero();  // origin row exports as zeros
  std::vector<std::string> names{"n0", "n1", "n2", "n3", "origin"};

  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() / "hypalign_export_test.tsv";
  export_embeddings(emb, names, path.string());

  std::ifstream in(path);
  std::string line;
  int rows = 0;
  geometry::Matrix parsed(5, 3);
  std::vector<std::string> parsed_names;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string name;
    ss >> name;
    parsed_names.push_back(name);
    for (int j = 0; j < 3; ++j) ss >> parsed(rows, j);
    ++rows;
  }
  fs::remove(path);

  CHECK(rows == 5);
  CHECK(parsed_names == names);
  CHECK(parsed == emb.rows);  // bit-exact round trip
  CHECK(parsed.row(4).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("export_embeddings rejects unwritable paths") {
  Rng rng(311);
  model::BallMatrix emb = random_embeddings(2, 2, 0.2, rng);
  CHECK_THROWS_AS(export_embeddings(emb, {"a", "b"}, "/nonexistent_dir/out.tsv"),
                  std::runtime_error);
}

TEST_CASE("evaluate_variants endpoint rows equal the single-channel rows") {
  data::SyntheticSpec spec;
  spec.n_entities = 20;
  spec.avg_degree = 3.0;
  spec.visual_signal = 0.9;
  spec.rng_seed = 13;
  data::AlignmentDataset ds = data::generate_synthetic(spec, 0.5);
  graph::UnionGraph u = graph::disjoint_union(ds.kg1, ds.kg2);

  Rng rng(313);
  model::ChannelConfig mcfg;
  mcfg.layer_count = 2;
  model::ChannelModel structure = model::make_structure_channel(u.graph.n, 8, mcfg, rng);

  geometry::Matrix visual_input(u.graph.n, 4);
  for (int i = 0; i < u.graph.n; ++i)
    for (int j = 0; j < 4; ++j) visual_input(i, j) = rng.normal();
  std::vector<bool> has(static_cast<size_t>(u.graph.n), true);
  model::ChannelModel visual = model::make_visual_channel(
      model::prepare_visual_features(visual_input, has), 8, mcfg, rng);

  std::vector<int> candidates = u.kg2_to_global;
  std::vector<std::pair<int, int>> tests = ds.seeds.test_pairs;
  std::vector<int> k_list{1, 10};

  std::vector<VariantRow> rows = evaluate_variants(structure, visual, u.graph, tests,
                                                   candidates, {0.0, 0.5, 1.0}, k_list);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0].label == "structure_only");
  CHECK(rows[1].label == "visual_only");

  // beta = 1 row reproduces structure-only, beta = 0 reproduces visual-only
  const RankingReport& fused_b0 = rows[2].report;
  const RankingReport& fused_b1 = rows[4].report;
  for (size_t q = 0; q < tests.size(); ++q) {
    CHECK(fused_b1.per_test_entity[q].rank_of_truth ==
          rows[0].report.per_test_entity[q].rank_of_truth);
    CHECK(fused_b0.per_test_entity[q].rank_of_truth ==
          rows[1].report.per_test_entity[q].rank_of_truth);
  }
  CHECK(fused_b1.hits_at.at(1) == rows[0].report.hits_at.at(1));
  CHECK(fused_b0.hits_at.at(1) == rows[1].report.hits_at.at(1));

  std::string table = format_variant_table(rows, k_list);
  CHECK(table.find("structure_only") != std::string::npos);
  CHECK(table.find("hits@10") != std::string::npos);
}

TEST_CASE("fused rows without a visual channel are an error") {
  data::SyntheticSpec spec;
  spec.n_entities = 10;
  spec.avg_degree = 2.0;
  spec.rng_seed = 17;
  data::AlignmentDataset ds = data::generate_synthetic(spec, 0.5);
  graph::UnionGraph u = graph::disjoint_union(ds.kg1, ds.kg2);
  Rng rng(317);
  model::ChannelConfig mcfg;
  model::ChannelModel structure = model::make_structure_channel(u.graph.n, 4, mcfg, rng);

  std::vector<int> candidates = u.kg2_to_global;
  CHECK_THROWS_AS(evaluate_variants(structure, std::nullopt, u.graph, ds.seeds.test_pairs,
                                    candidates, {0.5}, {1}),
                  std::invalid_argument);
  // structure-only remains available
  CHECK_NOTHROW(evaluate_variants(structure, std::nullopt, u.graph, ds.seeds.test_pairs,
                                  candidates, {1.0}, {1}));
}

}  // TEST_SUITE
