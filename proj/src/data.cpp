#include "hypalign/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "hypalign/rng.hpp"

namespace hypalign::data {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

[[noreturn]] void parse_error(const std::string& path, int line_no, const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

// reads a tab-separated file, skipping blank lines
void for_each_line(const std::string& path,
                   const std::function<void(int, const std::vector<std::string>&)>& fn) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open file: " + path);
  }
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    fn(line_no, split_tabs(line));
  }
}

struct Vocab {
  std::vector<std::string> names;
  std::unordered_map<std::string, int> index;

  int intern(const std::string& name) {
    auto [it, inserted] = index.try_emplace(name, static_cast<int>(names.size()));
    if (inserted) names.push_back(name);
    return it->second;
  }

  const int* find(const std::string& name) const {
    auto it = index.find(name);
    return it == index.end() ? nullptr : &it->second;
  }
};

graph::TripleStore load_triples(const std::string& path) {
  Vocab entities, relations;
  graph::TripleStore store;
  for_each_line(path, [&](int line_no, const std::vector<std::string>& f) {
    if (f.size() != 3 || f[0].empty() || f[1].empty() || f[2].empty()) {
      parse_error(path, line_no, "expected head<TAB>relation<TAB>tail");
    }
    int h = entities.intern(f[0]);
    int r = relations.intern(f[1]);
    int t = entities.intern(f[2]);
    store.triples.push_back({h, r, t});
  });
  store.entities = std::move(entities.names);
  store.relations = std::move(relations.names);
  if (store.num_entities() == 0) {
    throw std::runtime_error(path + ": no triples found");
  }
  graph::dedupe_triples(store);
  return store;
}

Vocab vocab_of(const graph::TripleStore& store) {
  Vocab v;
  for (const std::string& name : store.entities) v.intern(name);
  return v;
}

VisualFeatures load_visual(const std::string& path, const graph::TripleStore& store,
                           const std::string& kg_label) {
  Vocab entities = vocab_of(store);
  std::vector<std::vector<double>> rows(store.entities.size());
  std::vector<bool> has(store.entities.size(), false);
  int dim = -1;
  for_each_line(path, [&](int line_no, const std::vector<std::string>& f) {
    if (f.size() < 2) {
      parse_error(path, line_no, "expected identifier followed by feature values");
    }
    const int* idx = entities.find(f[0]);
    if (!idx) {
      parse_error(path, line_no,
                  "entity '" + f[0] + "' does not occur in any " + kg_label + " triple");
    }
    std::vector<double> values;
    values.reserve(f.size() - 1);
    for (size_t k = 1; k < f.size(); ++k) {
      try {
        size_t used = 0;
        values.push_back(std::stod(f[k], &used));
        if (used != f[k].size()) throw std::invalid_argument(f[k]);
      } catch (const std::exception&) {
        parse_error(path, line_no, "malformed feature value '" + f[k] + "'");
      }
    }
    if (dim < 0) {
      dim = static_cast<int>(values.size());
    } else if (static_cast<int>(values.size()) != dim) {
      parse_error(path, line_no,
                  "feature dimension " + std::to_string(values.size()) +
                      " differs from earlier lines (" + std::to_string(dim) + ")");
    }
    if (has[static_cast<size_t>(*idx)]) {
      parse_error(path, line_no, "duplicate feature line for entity '" + f[0] + "'");
    }
    rows[static_cast<size_t>(*idx)] = std::move(values);
    has[static_cast<size_t>(*idx)] = true;
  });
  if (dim < 0) {
    throw std::runtime_error(path + ": no feature lines found");
  }

  VisualFeatures vf;
  vf.dim = dim;
  vf.has_image = std::move(has);
  vf.features = Matrix::Zero(store.num_entities(), dim);
  for (int i = 0; i < store.num_entities(); ++i) {
    if (!vf.has_image[static_cast<size_t>(i)]) continue;
    for (int j = 0; j < dim; ++j) vf.features(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
  }
  return vf;
}

std::vector<std::pair<int, int>> load_alignment(const std::string& path,
                                                const graph::TripleStore& kg1,
                                                const graph::TripleStore& kg2) {
  Vocab e1 = vocab_of(kg1);
  Vocab e2 = vocab_of(kg2);
  std::vector<std::pair<int, int>> pairs;
  std::set<std::pair<int, int>> seen;
  for_each_line(path, [&](int line_no, const std::vector<std::string>& f) {
    if (f.size() != 2 || f[0].empty() || f[1].empty()) {
      parse_error(path, line_no, "expected kg1_entity<TAB>kg2_entity");
    }
    const int* a = e1.find(f[0]);
    if (!a) {
      parse_error(path, line_no, "entity '" + f[0] + "' does not occur in any KG1 triple");
    }
    const int* b = e2.find(f[1]);
    if (!b) {
      parse_error(path, line_no, "entity '" + f[1] + "' does not occur in any KG2 triple");
    }
    if (seen.emplace(*a, *b).second) {
      pairs.emplace_back(*a, *b);
    }
  });
  if (pairs.empty()) {
    throw std::runtime_error(path + ": no alignment pairs found");
  }
  return pairs;
}

// shuffle + split local pairs and move them into the union index space; the
// canonical sort first makes the split a function of the pair set and seed
// alone, so re-serialized datasets load back with the same split
SeedAlignments split_pairs(std::vector<std::pair<int, int>> local_pairs, int kg2_offset,
                           double split_fraction, uint64_t rng_seed) {
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw std::invalid_argument("split_fraction must lie in (0, 1), got " +
                                std::to_string(split_fraction));
  }
  std::sort(local_pairs.begin(), local_pairs.end());
  Rng rng(rng_seed, 0x5EEDull);
  for (size_t i = local_pairs.size(); i > 1; --i) {
    size_t j = rng.uniform_index(i);
    std::swap(local_pairs[i - 1], local_pairs[j]);
  }
  size_t n_train = static_cast<size_t>(
      std::llround(static_cast<double>(local_pairs.size()) * split_fraction));

  SeedAlignments seeds;
  for (size_t k = 0; k < local_pairs.size(); ++k) {
    std::pair<int, int> global{local_pairs[k].first, local_pairs[k].second + kg2_offset};
    if (k < n_train) {
      seeds.train_pairs.push_back(global);
    } else {
      seeds.test_pairs.push_back(global);
    }
  }
  return seeds;
}

void write_triples(const std::string& path, const graph::TripleStore& store) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  for (const graph::Triple& t : store.triples) {
    out << store.entities[static_cast<size_t>(t.head)] << '\t'
        << store.relations[static_cast<size_t>(t.relation)] << '\t'
        << store.entities[static_cast<size_t>(t.tail)] << '\n';
  }
}

void write_visual(const std::string& path, const graph::TripleStore& store,
                  const VisualFeatures& vf) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  char buf[64];
  for (int i = 0; i < store.num_entities(); ++i) {
    if (!vf.has_image[static_cast<size_t>(i)]) continue;
    out << store.entities[static_cast<size_t>(i)];
    for (int j = 0; j < vf.dim; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", vf.features(i, j));
      out << '\t' << buf;
    }
    out << '\n';
  }
}

}  // namespace

int VisualFeatures::count_images() const {
  int n = 0;
  for (bool b : has_image) n += b ? 1 : 0;
  return n;
}

AlignmentDataset load_dataset(const DatasetPaths& paths, double split_fraction,
                              uint64_t rng_seed) {
  AlignmentDataset ds;
  ds.kg1 = load_triples(paths.kg1_triples);
  ds.kg2 = load_triples(paths.kg2_triples);
  if (!paths.kg1_visual.empty()) ds.visual1 = load_visual(paths.kg1_visual, ds.kg1, "KG1");
  if (!paths.kg2_visual.empty()) ds.visual2 = load_visual(paths.kg2_visual, ds.kg2, "KG2");
  if (ds.visual1.empty() != ds.visual2.empty()) {
    throw std::runtime_error("visual features must be given for both KGs or neither");
  }
  if (!ds.visual1.empty() && ds.visual1.dim != ds.visual2.dim) {
    throw std::runtime_error("visual feature dimensions differ between KGs: " +
                             std::to_string(ds.visual1.dim) + " vs " +
                             std::to_string(ds.visual2.dim));
  }
  std::vector<std::pair<int, int>> pairs = load_alignment(paths.alignment, ds.kg1, ds.kg2);
  ds.seeds = split_pairs(std::move(pairs), ds.kg2_offset(), split_fraction, rng_seed);
  ds.split_fraction = split_fraction;
  ds.rng_seed = rng_seed;
  return ds;
}

DatasetPaths save_dataset(const AlignmentDataset& ds, const std::string& dir) {
  std::filesystem::create_directories(dir);
  DatasetPaths paths;
  paths.kg1_triples = dir + "/kg1_triples.tsv";
  paths.kg2_triples = dir + "/kg2_triples.tsv";
  paths.alignment = dir + "/alignment.tsv";
  write_triples(paths.kg1_triples, ds.kg1);
  write_triples(paths.kg2_triples, ds.kg2);

  std::ofstream out(paths.alignment);
  if (!out) throw std::runtime_error("cannot write file: " + paths.alignment);
  auto write_pairs = [&](const std::vector<std::pair<int, int>>& pairs) {
    for (const auto& [g1, g2] : pairs) {
      out << ds.kg1.entities[static_cast<size_t>(g1)] << '\t'
          << ds.kg2.entities[static_cast<size_t>(g2 - ds.kg2_offset())] << '\n';
    }
  };
  write_pairs(ds.seeds.train_pairs);
  write_pairs(ds.seeds.test_pairs);

  if (ds.has_visual()) {
    paths.kg1_visual = dir + "/kg1_visual.tsv";
    paths.kg2_visual = dir + "/kg2_visual.tsv";
    write_visual(paths.kg1_visual, ds.kg1, ds.visual1);
    write_visual(paths.kg2_visual, ds.kg2, ds.visual2);
  }
  return paths;
}

AlignmentDataset generate_synthetic(const SyntheticSpec& spec, double split_fraction) {
  if (spec.n_entities < 2) {
    throw std::invalid_argument("SyntheticSpec: n_entities must be >= 2");
  }
  if (!(spec.avg_degree >= 0.0) || spec.avg_degree >= spec.n_entities) {
    throw std::invalid_argument("SyntheticSpec: avg_degree must lie in [0, n_entities)");
  }
  if (!(spec.edge_noise >= 0.0 && spec.edge_noise <= 1.0)) {
    throw std::invalid_argument("SyntheticSpec: edge_noise must lie in [0, 1]");
  }
  if (!(spec.visual_signal >= 0.0 && spec.visual_signal <= 1.0)) {
    throw std::invalid_argument("SyntheticSpec: visual_signal must lie in [0, 1]");
  }

  const int n = spec.n_entities;
  Rng rng(spec.rng_seed, 0x5EED5ull);

  // Erdos-Renyi edges with expected average degree
  double p = spec.avg_degree / static_cast<double>(n - 1);
  std::set<std::pair<int, int>> edges1;
  std::vector<int> degree(static_cast<size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng.bernoulli(p)) {
        edges1.emplace(i, j);
        ++degree[static_cast<size_t>(i)];
        ++degree[static_cast<size_t>(j)];
      }
    }
  }
  // every entity must occur in a triple (the triple file format cannot
  // represent isolated entities), so give isolated nodes one random edge
  auto attach_isolated = [&rng, n](std::set<std::pair<int, int>>& edges,
                                   std::vector<int>& deg) {
    for (int i = 0; i < n; ++i) {
      while (deg[static_cast<size_t>(i)] == 0) {
        int other = static_cast<int>(rng.uniform_index(static_cast<uint64_t>(n)));
        if (other == i) continue;
        auto e = std::minmax(i, other);
        if (edges.emplace(e.first, e.second).second) {
          ++deg[static_cast<size_t>(i)];
          ++deg[static_cast<size_t>(other)];
        }
      }
    }
  };
  attach_isolated(edges1, degree);

  // isomorphic copy under a random permutation
  std::vector<int> perm(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;
  for (size_t i = static_cast<size_t>(n); i > 1; --i) {
    size_t j = rng.uniform_index(i);
    std::swap(perm[i - 1], perm[j]);
  }
  std::set<std::pair<int, int>> edges2;
  for (const auto& [i, j] : edges1) {
    auto e = std::minmax(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);
    edges2.emplace(e.first, e.second);
  }

  // rewire a fraction of KG2 edges
  if (spec.edge_noise > 0.0) {
    std::vector<std::pair<int, int>> order(edges2.begin(), edges2.end());
    for (const auto& edge : order) {
      if (!rng.bernoulli(spec.edge_noise)) continue;
      edges2.erase(edge);
      while (true) {
        int u = static_cast<int>(rng.uniform_index(static_cast<uint64_t>(n)));
        int v = static_cast<int>(rng.uniform_index(static_cast<uint64_t>(n)));
        if (u == v) continue;
        auto e = std::minmax(u, v);
        if (edges2.emplace(e.first, e.second).second) break;
      }
    }
    std::vector<int> degree2(static_cast<size_t>(n), 0);
    for (const auto& [i, j] : edges2) {
      ++degree2[static_cast<size_t>(i)];
      ++degree2[static_cast<size_t>(j)];
    }
    attach_isolated(edges2, degree2);
  }

  auto to_store = [n](const std::set<std::pair<int, int>>& edges, const std::string& prefix) {
    graph::TripleStore s;
    for (int i = 0; i < n; ++i) s.entities.push_back(prefix + std::to_string(i));
    s.relations.push_back("rel0");
    for (const auto& [a, b] : edges) s.triples.push_back({a, 0, b});
    return s;
  };

  AlignmentDataset ds;
  ds.kg1 = to_store(edges1, "a");
  ds.kg2 = to_store(edges2, "b");

  if (spec.visual_dim > 0) {
    double s = spec.visual_signal;
    double noise_scale = std::sqrt(std::max(0.0, 1.0 - s * s));
    ds.visual1.dim = spec.visual_dim;
    ds.visual2.dim = spec.visual_dim;
    ds.visual1.features = Matrix::Zero(n, spec.visual_dim);
    ds.visual2.features = Matrix::Zero(n, spec.visual_dim);
    ds.visual1.has_image.assign(static_cast<size_t>(n), true);
    ds.visual2.has_image.assign(static_cast<size_t>(n), true);
    for (int i = 0; i < n; ++i) {
      int partner = perm[static_cast<size_t>(i)];
      for (int j = 0; j < spec.visual_dim; ++j) {
        double base = rng.normal();
        ds.visual1.features(i, j) = base;
        ds.visual2.features(partner, j) = s * base + noise_scale * rng.normal();
      }
    }
  }

  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) pairs.emplace_back(i, perm[static_cast<size_t>(i)]);
  ds.seeds = split_pairs(std::move(pairs), n, split_fraction, spec.rng_seed);
  ds.split_fraction = split_fraction;
  ds.rng_seed = spec.rng_seed;
  return ds;
}

DatasetStats compute_stats(const AlignmentDataset& ds) {
  DatasetStats st;
  st.kg1 = {"KG1", ds.kg1.num_entities(), ds.kg1.num_relations(),
            static_cast<int>(ds.kg1.triples.size()),
            ds.visual1.empty() ? 0 : ds.visual1.count_images()};
  st.kg2 = {"KG2", ds.kg2.num_entities(), ds.kg2.num_relations(),
            static_cast<int>(ds.kg2.triples.size()),
            ds.visual2.empty() ? 0 : ds.visual2.count_images()};
  st.alignments =
      static_cast<int>(ds.seeds.train_pairs.size() + ds.seeds.test_pairs.size());
  return st;
}

std::string format_stats_table(const DatasetStats& stats) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-8s %10s %10s %12s %8s %8s\n", "Dataset", "Entities",
                "Relations", "Rel.Triples", "Images", "SameAs");
  out << line;
  auto row = [&](const KgStats& kg, bool with_alignments) {
    if (with_alignments) {
      std::snprintf(line, sizeof(line), "%-8s %10d %10d %12d %8d %8d\n", kg.label.c_str(),
                    kg.entities, kg.relations, kg.triples, kg.images, stats.alignments);
    } else {
      std::snprintf(line, sizeof(line), "%-8s %10d %10d %12d %8d %8s\n", kg.label.c_str(),
                    kg.entities, kg.relations, kg.triples, kg.images, "");
    }
    out << line;
  };
  row(stats.kg1, false);
  row(stats.kg2, true);
  return out.str();
}

}  // namespace hypalign::data
