#pragma once

#include <Eigen/Sparse>
#include <string>
#include <vector>

namespace hypalign::graph {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct Triple {
  int head = 0;
  int relation = 0;
  int tail = 0;

  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

// Entity/relation vocabularies plus the relational triples between them.
struct TripleStore {
  std::vector<std::string> entities;
  std::vector<std::string> relations;
  std::vector<Triple> triples;

  int num_entities() const { return static_cast<int>(entities.size()); }
  int num_relations() const { return static_cast<int>(relations.size()); }
};

// throws invalid_argument on out-of-range indices
void validate(const TripleStore& store);

// removes exact (h, r, t) duplicates, keeping first occurrence order
void dedupe_triples(TripleStore& store);

// Symmetric normalized adjacency D^(-1/2) (A + I) D^(-1/2) with binary A.
struct NormalizedGraph {
  int n = 0;
  SparseMatrix adjacency;
};

NormalizedGraph build_adjacency(const TripleStore& store);

// Disjoint union of two KGs sharing one node index. KG1 keeps its indices,
// KG2 entities are offset by |E1|.
struct UnionGraph {
  NormalizedGraph graph;
  std::vector<int> kg1_to_global;
  std::vector<int> kg2_to_global;

  int kg1_size() const { return static_cast<int>(kg1_to_global.size()); }
  int kg2_size() const { return static_cast<int>(kg2_to_global.size()); }
};

UnionGraph disjoint_union(const TripleStore& kg1, const TripleStore& kg2);

}  // namespace hypalign::graph
