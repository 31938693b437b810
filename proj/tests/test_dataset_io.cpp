#include "core/dataset_io.hpp"

#include "core/synth.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace bothp;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("bothp_io_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

DatasetBundle small_bundle(uint64_t seed) {
  SynthConfig cfg;
  cfg.num_nodes = 60;
  cfg.bot_fraction = 0.4;
  cfg.num_bot_clusters = 2;
  cfg.num_topo_communities = 2;
  cfg.feature_dim = 5;
  cfg.mean_degree = 4.0;
  cfg.relations = 2;
  cfg.seed = seed;
  return generate(cfg).first;
}

}  // namespace

TEST_SUITE_BEGIN("dataset_io");

TEST_CASE("save/load round-trip is the identity") {
  const TempDir dir("roundtrip");
  const DatasetBundle original = small_bundle(3);
  save_dataset(original, dir.path);
  const DatasetBundle loaded = load_dataset(dir.path);

  CHECK(loaded.graph.num_nodes == original.graph.num_nodes);
  CHECK(loaded.graph.features == original.graph.features);  // bit-exact float32
  CHECK(loaded.graph.relations == original.graph.relations);
  CHECK(loaded.graph.edges == original.graph.edges);
  CHECK(loaded.graph.labels == original.graph.labels);
  CHECK(loaded.graph.train_idx == original.graph.train_idx);
  CHECK(loaded.graph.val_idx == original.graph.val_idx);
  CHECK(loaded.graph.test_idx == original.graph.test_idx);
  CHECK(loaded.meta.provenance == "synthetic");
  CHECK(loaded.meta.generator_seed == original.meta.generator_seed);
  REQUIRE(loaded.ground_truth.has_value());
  CHECK(loaded.ground_truth->labels == original.ground_truth->labels);
  CHECK(loaded.ground_truth->bot_cluster == original.ground_truth->bot_cluster);
  CHECK(loaded.ground_truth->topo_community == original.ground_truth->topo_community);

  // saving the loaded bundle reproduces identical feature bytes
  const TempDir dir2("roundtrip2");
  save_dataset(loaded, dir2.path);
  std::ifstream f1(dir.path / "features.f32", std::ios::binary);
  std::ifstream f2(dir2.path / "features.f32", std::ios::binary);
  const std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  const std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(b1 == b2);
}

TEST_CASE("bundles without ground truth load as provenance loaded") {
  const TempDir dir("nog");
  DatasetBundle b = small_bundle(5);
  b.ground_truth.reset();
  b.meta.generator_seed.reset();
  save_dataset(b, dir.path);
  const DatasetBundle loaded = load_dataset(dir.path);
  CHECK(loaded.meta.provenance == "loaded");
  CHECK(!loaded.ground_truth.has_value());
}

TEST_CASE("truncated features file is rejected by name") {
  const TempDir dir("trunc");
  save_dataset(small_bundle(7), dir.path);
  fs::resize_file(dir.path / "features.f32", 10);
  CHECK_THROWS_WITH_AS(load_dataset(dir.path), doctest::Contains("features.f32"), ValidationError);
}

TEST_CASE("edges referencing node N surface a validation error on load") {
  const TempDir dir("range");
  const DatasetBundle b = small_bundle(9);
  save_dataset(b, dir.path);
  std::ofstream edges(dir.path / "edges.csv", std::ios::app);
  edges << b.graph.num_nodes << ",0,0\n";  // src == N is out of range
  edges.close();
  CHECK_THROWS_WITH_AS(load_dataset(dir.path), doctest::Contains("out of range"), ValidationError);
}

TEST_CASE("malformed records name the file and line") {
  const TempDir dir("malformed");
  save_dataset(small_bundle(11), dir.path);

  SUBCASE("edges.csv") {
    std::ofstream edges(dir.path / "edges.csv", std::ios::app);
    edges << "7;8;0\n";
    edges.close();
    CHECK_THROWS_WITH_AS(load_dataset(dir.path), doctest::Contains("edges.csv"), ValidationError);
  }
  SUBCASE("labels.csv header") {
    std::ofstream labels(dir.path / "labels.csv");
    labels << "id,y\n0,1\n";
    labels.close();
    CHECK_THROWS_WITH_AS(load_dataset(dir.path), doctest::Contains("labels.csv"), ValidationError);
  }
  SUBCASE("unknown relation index") {
    std::ofstream edges(dir.path / "edges.csv", std::ios::app);
    edges << "0,1,9\n";
    edges.close();
    CHECK_THROWS_WITH_AS(load_dataset(dir.path), doctest::Contains("relation"), ValidationError);
  }
}

TEST_CASE("missing directory errors cleanly") {
  CHECK_THROWS_AS(load_dataset("/nonexistent/bothp_nowhere"), ValidationError);
}

TEST_CASE("save rejects invalid graphs") {
  DatasetBundle b = small_bundle(13);
  b.graph.edges[0].push_back({0, b.graph.num_nodes + 5});
  const TempDir dir("invalid");
  CHECK_THROWS_AS(save_dataset(b, dir.path), ValidationError);
}

TEST_SUITE_END();
