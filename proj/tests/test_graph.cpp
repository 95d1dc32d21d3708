#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <set>
#include <stdexcept>
#include <vector>

#include "hypalign/graph.hpp"
#include "hypalign/rng.hpp"

using namespace hypalign;
using namespace hypalign::graph;

namespace {

TripleStore make_store(int n_entities, std::vector<std::pair<int, int>> edges) {
  TripleStore s;
  for (int i = 0; i < n_entities; ++i) s.entities.push_back("e" + std::to_string(i));
  s.relations.push_back("r0");
  for (auto [a, b] : edges) s.triples.push_back({a, 0, b});
  return s;
}

Eigen::MatrixXd dense(const NormalizedGraph& g) { return Eigen::MatrixXd(g.adjacency); }

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("complete graph on three nodes") {
  TripleStore s = make_store(3, {{0, 1}, {0, 2}, {1, 2}});
  NormalizedGraph g = build_adjacency(s);
  Eigen::MatrixXd a = dense(g);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(a(i, j) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("single node and path graph") {
  NormalizedGraph single = build_adjacency(make_store(1, {}));
  CHECK(dense(single)(0, 0) == 1.0);

  NormalizedGraph path = build_adjacency(make_store(2, {{0, 1}}));
  Eigen::MatrixXd a = dense(path);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(a(i, j) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("empty entity set rejected") {
  TripleStore s;
  CHECK_THROWS_AS(build_adjacency(s), std::invalid_argument);
}

TEST_CASE("triples are symmetrized and duplicates collapse") {
  // same edge three times, both directions
  TripleStore s = make_store(3, {{0, 1}, {1, 0}, {0, 1}});
  NormalizedGraph g = build_adjacency(s);
  Eigen::MatrixXd a = dense(g);
  CHECK(a(0, 1) == a(1, 0));
  CHECK(a(0, 1) == doctest::Approx(0.5).epsilon(1e-15));  // both degrees 2 with self-loop
  CHECK(a(2, 2) == 1.0);
  CHECK(a(0, 2) == 0.0);
}

TEST_CASE("dedupe_triples keeps first occurrences") {
  TripleStore s = make_store(3, {{0, 1}, {0, 1}, {1, 2}});
  dedupe_triples(s);
  CHECK(s.triples.size() == 2);
  CHECK(s.triples[0] == Triple{0, 0, 1});
  CHECK(s.triples[1] == Triple{1, 0, 2});
}

TEST_CASE("adjacency is exactly symmetric and supported on neighbors") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2 + static_cast<int>(rng.uniform_index(18));
    std::vector<std::pair<int, int>> edges;
    std::set<std::pair<int, int>> edge_set;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng.bernoulli(0.3)) {
          edges.push_back({i, j});
          edge_set.insert({i, j});
        }
    NormalizedGraph g = build_adjacency(make_store(n, edges));
    Eigen::MatrixXd a = dense(g);

    CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (int i = 0; i < n; ++i) {
      CHECK(a(i, i) > 0.0);
      for (int j = 0; j < n; ++j) {
        bool neighbor = i == j || edge_set.count({std::min(i, j), std::max(i, j)}) > 0;
        if (!neighbor) CHECK(a(i, j) == 0.0);
        if (neighbor) CHECK(a(i, j) > 0.0);
      }
    }

    // spectrum bounded by 1 in magnitude (brute-force eigendecomposition)
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    CHECK(es.eigenvalues().minCoeff() >= -1.0 - 1e-8);
    CHECK(es.eigenvalues().maxCoeff() <= 1.0 + 1e-8);
  }
}

TEST_CASE("disjoint union of two single nodes is the identity") {
  UnionGraph u = disjoint_union(make_store(1, {}), make_store(1, {}));
  Eigen::MatrixXd a = dense(u.graph);
  CHECK(a.rows() == 2);
  CHECK(a.isApprox(Eigen::MatrixXd::Identity(2, 2)));
}

TEST_CASE("disjoint union is block diagonal with offset index maps") {
  TripleStore k3 = make_store(3, {{0, 1}, {0, 2}, {1, 2}});
  TripleStore path = make_store(2, {{0, 1}});
  UnionGraph u = disjoint_union(k3, path);

  CHECK(u.graph.n == 5);
  Eigen::MatrixXd a = dense(u.graph);
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(5, 5);
  expected.block(0, 0, 3, 3) = dense(build_adjacency(k3));
  expected.block(3, 3, 2, 2) = dense(build_adjacency(path));
  CHECK((a - expected).cwiseAbs().maxCoeff() == 0.0);

  CHECK(u.kg1_to_global == std::vector<int>{0, 1, 2});
  CHECK(u.kg2_to_global == std::vector<int>{3, 4});
}

TEST_CASE("validate rejects bad indices") {
  TripleStore s = make_store(2, {});
  s.triples.push_back({0, 0, 5});
  CHECK_THROWS_AS(validate(s), std::invalid_argument);
  s.triples.back() = {0, 3, 1};
  CHECK_THROWS_AS(validate(s), std::invalid_argument);
}

}  // TEST_SUITE
