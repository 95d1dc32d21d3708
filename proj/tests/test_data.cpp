#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "hypalign/data.hpp"

using namespace hypalign;
using namespace hypalign::data;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("hypalign_test_" + std::to_string(reinterpret_cast<uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& content) const {
    fs::path p = path / name;
    std::ofstream out(p);
    out << content;
    return p.string();
  }
};

DatasetPaths write_small_dataset(const TempDir& dir) {
  DatasetPaths paths;
  paths.kg1_triples = dir.file("kg1.tsv",
                               "x0\tr0\tx1\n"
                               "x1\tr1\tx2\n"
                               "x2\tr0\tx3\n");
  paths.kg2_triples = dir.file("kg2.tsv",
                               "y0\tr0\ty1\n"
                               "y1\tr0\ty2\n"
                               "y2\tr0\ty3\n");
  paths.alignment = dir.file("align.tsv",
                             "x0\ty0\n"
                             "x1\ty1\n"
                             "x2\ty2\n"
                             "x3\ty3\n");
  return paths;
}

// edge set of a store under an entity-index mapping
std::set<std::pair<int, int>> mapped_edges(const graph::TripleStore& s,
                                           const std::vector<int>& map) {
  std::set<std::pair<int, int>> edges;
  for (const graph::Triple& t : s.triples) {
    int a = map.empty() ? t.head : map[static_cast<size_t>(t.head)];
    int b = map.empty() ? t.tail : map[static_cast<size_t>(t.tail)];
    edges.emplace(std::min(a, b), std::max(a, b));
  }
  return edges;
}

}  // namespace

TEST_SUITE("data") {

TEST_CASE("load_dataset splits deterministically") {
  TempDir dir;
  DatasetPaths paths = write_small_dataset(dir);
  AlignmentDataset ds = load_dataset(paths, 0.25, 7);
  CHECK(ds.seeds.train_pairs.size() == 1);
  CHECK(ds.seeds.test_pairs.size() == 3);

  AlignmentDataset again = load_dataset(paths, 0.25, 7);
  CHECK(ds.seeds.train_pairs == again.seeds.train_pairs);
  CHECK(ds.seeds.test_pairs == again.seeds.test_pairs);

  AlignmentDataset other = load_dataset(paths, 0.25, 8);
  bool same = ds.seeds.train_pairs == other.seeds.train_pairs;
  // with 4 pairs a different seed picks a different train pair almost surely;
  // the important property is that both splits are valid partitions
  std::set<std::pair<int, int>> all(other.seeds.train_pairs.begin(),
                                    other.seeds.train_pairs.end());
  all.insert(other.seeds.test_pairs.begin(), other.seeds.test_pairs.end());
  CHECK(all.size() == 4);
  (void)same;
}

TEST_CASE("split fraction 0.2 of 100 alignments gives 20 train pairs") {
  TempDir dir;
  std::string kg1, kg2, align;
  for (int i = 0; i < 100; ++i) {
    int j = (i + 1) % 100;
    kg1 += "x" + std::to_string(i) + "\tr\tx" + std::to_string(j) + "\n";
    kg2 += "y" + std::to_string(i) + "\tr\ty" + std::to_string(j) + "\n";
    align += "x" + std::to_string(i) + "\ty" + std::to_string(i) + "\n";
  }
  DatasetPaths paths;
  paths.kg1_triples = dir.file("kg1.tsv", kg1);
  paths.kg2_triples = dir.file("kg2.tsv", kg2);
  paths.alignment = dir.file("align.tsv", align);
  AlignmentDataset ds = load_dataset(paths, 0.2, 1);
  CHECK(ds.seeds.train_pairs.size() == 20);
  CHECK(ds.seeds.test_pairs.size() == 80);

  // train/test are disjoint and cover everything
  std::set<std::pair<int, int>> seen;
  for (auto& p : ds.seeds.train_pairs) CHECK(seen.insert(p).second);
  for (auto& p : ds.seeds.test_pairs) CHECK(seen.insert(p).second);
  CHECK(seen.size() == 100);
}

TEST_CASE("alignment referencing an unknown entity names it") {
  TempDir dir;
  DatasetPaths paths = write_small_dataset(dir);
  paths.alignment = dir.file("bad_align.tsv", "x0\ty0\nghost\ty1\n");
  try {
    load_dataset(paths, 0.5, 1);
    FAIL("expected error");
  } catch (const std::runtime_error& e) {
    std::string msg = e.what();
    CHECK(msg.find("ghost") != std::string::npos);
    CHECK(msg.find(":2") != std::string::npos);
  }
}

TEST_CASE("malformed triple line reports file and line number") {
  TempDir dir;
  DatasetPaths paths = write_small_dataset(dir);
  paths.kg1_triples = dir.file("broken.tsv", "x0\tr0\tx1\nonly_two\tfields\n");
  try {
    load_dataset(paths, 0.5, 1);
    FAIL("expected error");
  } catch (const std::runtime_error& e) {
    std::string msg = e.what();
    CHECK(msg.find("broken.tsv:2") != std::string::npos);
  }
}

TEST_CASE("missing file errors name the path") {
  DatasetPaths paths;
  paths.kg1_triples = "/nonexistent/kg1.tsv";
  paths.kg2_triples = "/nonexistent/kg2.tsv";
  paths.alignment = "/nonexistent/align.tsv";
  try {
    load_dataset(paths, 0.5, 1);
    FAIL("expected error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("/nonexistent/kg1.tsv") != std::string::npos);
  }
}

TEST_CASE("visual features load with per-entity flags") {
  TempDir dir;
  DatasetPaths paths = write_small_dataset(dir);
  paths.kg1_visual = dir.file("v1.tsv", "x0\t1.5\t-2.25\nx2\t0.125\t3.5\n");
  paths.kg2_visual = dir.file("v2.tsv", "y1\t0.5\t0.5\n");
  AlignmentDataset ds = load_dataset(paths, 0.5, 1);
  CHECK(ds.visual1.dim == 2);
  CHECK(ds.visual1.count_images() == 2);
  CHECK(ds.visual2.count_images() == 1);
  CHECK(ds.visual1.features(0, 0) == 1.5);
  CHECK(ds.visual1.features(0, 1) == -2.25);
  // x1 has no image: zero row
  CHECK(ds.visual1.features(1, 0) == 0.0);
  CHECK_FALSE(ds.visual1.has_image[1]);
}

TEST_CASE("visual dimension mismatch within a file is an error") {
  TempDir dir;
  DatasetPaths paths = write_small_dataset(dir);
  paths.kg1_visual = dir.file("v1.tsv", "x0\t1.0\t2.0\nx1\t1.0\n");
  paths.kg2_visual = dir.file("v2.tsv", "y0\t1.0\t2.0\n");
  CHECK_THROWS_AS(load_dataset(paths, 0.5, 1), std::runtime_error);
}

TEST_CASE("save then load reproduces the dataset") {
  SyntheticSpec spec;
  spec.n_entities = 30;
  spec.avg_degree = 3.0;
  spec.edge_noise = 0.1;
  spec.visual_signal = 0.8;
  spec.rng_seed = 99;
  AlignmentDataset ds = generate_synthetic(spec, 0.3);

  TempDir dir;
  DatasetPaths paths = save_dataset(ds, dir.path.string());
  AlignmentDataset loaded = load_dataset(paths, ds.split_fraction, ds.rng_seed);
  DatasetPaths paths2 = save_dataset(loaded, (dir.path / "again").string());
  AlignmentDataset loaded2 = load_dataset(paths2, ds.split_fraction, ds.rng_seed);

  CHECK(loaded.kg1.entities == loaded2.kg1.entities);
  CHECK(loaded.kg2.entities == loaded2.kg2.entities);
  CHECK(loaded.kg1.triples == loaded2.kg1.triples);
  CHECK(loaded.kg2.triples == loaded2.kg2.triples);
  CHECK(loaded.seeds.train_pairs == loaded2.seeds.train_pairs);
  CHECK(loaded.seeds.test_pairs == loaded2.seeds.test_pairs);
  CHECK(loaded.visual1.features == loaded2.visual1.features);
  CHECK(loaded.visual2.features == loaded2.visual2.features);

  // the entity sets and counts survive the first round trip too
  CHECK(loaded.kg1.num_entities() == ds.kg1.num_entities());
  CHECK(loaded.kg1.triples.size() == ds.kg1.triples.size());
  CHECK(loaded.seeds.train_pairs.size() == ds.seeds.train_pairs.size());
}

TEST_CASE("synthetic generation is reproducible and isomorphic at zero noise") {
  SyntheticSpec spec;
  spec.n_entities = 40;
  spec.avg_degree = 4.0;
  spec.edge_noise = 0.0;
  spec.rng_seed = 5;
  AlignmentDataset a = generate_synthetic(spec, 0.3);
  AlignmentDataset b = generate_synthetic(spec, 0.3);
  CHECK(a.kg1.triples == b.kg1.triples);
  CHECK(a.kg2.triples == b.kg2.triples);
  CHECK(a.seeds.train_pairs == b.seeds.train_pairs);
  CHECK(a.visual1.features == b.visual1.features);

  // recover the isomorphism from the ground-truth pairs
  std::vector<int> map(static_cast<size_t>(spec.n_entities), -1);
  auto absorb = [&](const std::vector<std::pair<int, int>>& pairs) {
    for (auto [g1, g2] : pairs) map[static_cast<size_t>(g1)] = g2 - spec.n_entities;
  };
  absorb(a.seeds.train_pairs);
  absorb(a.seeds.test_pairs);
  CHECK(mapped_edges(a.kg1, map) == mapped_edges(a.kg2, {}));
}

TEST_CASE("visual_signal one gives identical aligned vectors") {
  SyntheticSpec spec;
  spec.n_entities = 20;
  spec.avg_degree = 3.0;
  spec.visual_signal = 1.0;
  spec.rng_seed = 11;
  AlignmentDataset ds = generate_synthetic(spec, 0.5);
  auto check_pairs = [&](const std::vector<std::pair<int, int>>& pairs) {
    for (auto [g1, g2] : pairs) {
      int local2 = g2 - spec.n_entities;
      CHECK((ds.visual1.features.row(g1) - ds.visual2.features.row(local2))
                .cwiseAbs()
                .maxCoeff() < 1e-12);
    }
  };
  check_pairs(ds.seeds.train_pairs);
  check_pairs(ds.seeds.test_pairs);
}

TEST_CASE("synthetic edge count stays within three sigma of the binomial") {
  SyntheticSpec spec;
  spec.n_entities = 100;
  spec.avg_degree = 4.0;
  spec.rng_seed = 23;
  spec.visual_dim = 0;
  AlignmentDataset ds = generate_synthetic(spec, 0.3);

  double pairs = 100.0 * 99.0 / 2.0;
  double p = 4.0 / 99.0;
  double mean = pairs * p;  // 200
  double sigma = std::sqrt(pairs * p * (1.0 - p));
  double count = static_cast<double>(ds.kg1.triples.size());
  // isolated-node patching adds a handful of edges at most
  CHECK(count > mean - 3.0 * sigma);
  CHECK(count < mean + 3.0 * sigma + 5.0);

  // no isolated entities: every entity occurs in at least one triple
  std::set<int> seen;
  for (const graph::Triple& t : ds.kg1.triples) {
    seen.insert(t.head);
    seen.insert(t.tail);
  }
  CHECK(static_cast<int>(seen.size()) == spec.n_entities);
}

TEST_CASE("synthetic spec validation") {
  SyntheticSpec spec;
  spec.n_entities = 1;
  CHECK_THROWS_AS(generate_synthetic(spec, 0.5), std::invalid_argument);
  spec.n_entities = 10;
  spec.avg_degree = 10.0;
  CHECK_THROWS_AS(generate_synthetic(spec, 0.5), std::invalid_argument);
  spec.avg_degree = 3.0;
  spec.edge_noise = 1.5;
  CHECK_THROWS_AS(generate_synthetic(spec, 0.5), std::invalid_argument);
  spec.edge_noise = 0.0;
  CHECK_THROWS_AS(generate_synthetic(spec, 0.0), std::invalid_argument);
}

TEST_CASE("stats table counts entities relations triples and images") {
  SyntheticSpec spec;
  spec.n_entities = 15;
  spec.avg_degree = 2.0;
  spec.rng_seed = 3;
  AlignmentDataset ds = generate_synthetic(spec, 0.4);
  DatasetStats st = compute_stats(ds);
  CHECK(st.kg1.entities == 15);
  CHECK(st.kg2.entities == 15);
  CHECK(st.kg1.relations == 1);
  CHECK(st.kg1.triples == static_cast<int>(ds.kg1.triples.size()));
  CHECK(st.kg1.images == 15);
  CHECK(st.alignments == 15);

  std::string table = format_stats_table(st);
  CHECK(table.find("Entities") != std::string::npos);
  CHECK(table.find("SameAs") != std::string::npos);
  CHECK(table.find("15") != std::string::npos);
}

}  // TEST_SUITE
