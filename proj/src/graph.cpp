#include "hypalign/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace hypalign::graph {

void validate(const TripleStore& store) {
  for (const Triple& t : store.triples) {
    if (t.head < 0 || t.head >= store.num_entities() || t.tail < 0 ||
        t.tail >= store.num_entities()) {
      throw std::invalid_argument("TripleStore: entity index out of range");
    }
    if (t.relation < 0 || t.relation >= store.num_relations()) {
      throw std::invalid_argument("TripleStore: relation index out of range");
    }
  }
}

void dedupe_triples(TripleStore& store) {
  std::set<Triple> seen;
  std::vector<Triple> kept;
  kept.reserve(store.triples.size());
  for (const Triple& t : store.triples) {
    if (seen.insert(t).second) {
      kept.push_back(t);
    }
  }
  store.triples = std::move(kept);
}

namespace {

// Normalized adjacency from an undirected edge set. Duplicate edges collapse
// to weight 1; relations are ignored here, matching the plain GCN convolution.
NormalizedGraph build_from_edges(int n, const std::set<std::pair<int, int>>& edges) {
  std::vector<double> degree(n, 1.0);  // self-loop
  for (const auto& [i, j] : edges) {
    degree[i] += 1.0;
    degree[j] += 1.0;
  }
  std::vector<double> inv_sqrt(n);
  for (int i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(degree[i]);

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(2 * edges.size() + n);
  for (int i = 0; i < n; ++i) {
    entries.emplace_back(i, i, inv_sqrt[i] * inv_sqrt[i]);
  }
  for (const auto& [i, j] : edges) {
    double w = inv_sqrt[i] * inv_sqrt[j];
    entries.emplace_back(i, j, w);
    entries.emplace_back(j, i, w);
  }

  NormalizedGraph g;
  g.n = n;
  g.adjacency.resize(n, n);
  g.adjacency.setFromTriplets(entries.begin(), entries.end());
  g.adjacency.makeCompressed();
  return g;
}

std::set<std::pair<int, int>> undirected_edges(const TripleStore& store, int offset = 0) {
  std::set<std::pair<int, int>> edges;
  for (const Triple& t : store.triples) {
    if (t.head == t.tail) continue;  // self-relations add nothing beyond the self-loop
    int a = std::min(t.head, t.tail) + offset;
    int b = std::max(t.head, t.tail) + offset;
    edges.emplace(a, b);
  }
  return edges;
}

}  // namespace

NormalizedGraph build_adjacency(const TripleStore& store) {
  if (store.num_entities() == 0) {
    throw std::invalid_argument("build_adjacency: empty entity set");
  }
  validate(store);
  return build_from_edges(store.num_entities(), undirected_edges(store));
}

UnionGraph disjoint_union(const TripleStore& kg1, const TripleStore& kg2) {
  if (kg1.num_entities() == 0 || kg2.num_entities() == 0) {
    throw std::invalid_argument("disjoint_union: empty entity set");
  }
  validate(kg1);
  validate(kg2);

  int n1 = kg1.num_entities();
  int n2 = kg2.num_entities();

  std::set<std::pair<int, int>> edges = undirected_edges(kg1);
  std::set<std::pair<int, int>> edges2 = undirected_edges(kg2, n1);
  edges.insert(edges2.begin(), edges2.end());

  UnionGraph u;
  u.graph = build_from_edges(n1 + n2, edges);
  u.kg1_to_global.resize(n1);
  u.kg2_to_global.resize(n2);
  for (int i = 0; i < n1; ++i) u.kg1_to_global[i] = i;
  for (int j = 0; j < n2; ++j) u.kg2_to_global[j] = n1 + j;
  return u;
}

}  // namespace hypalign::graph
