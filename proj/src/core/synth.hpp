#pragma once

#include "core/graph.hpp"

namespace bothp {

struct SynthConfig {
  int num_nodes = 2000;
  double bot_fraction = 0.3;
  double target_homophily = 0.7;
  int num_bot_clusters = 4;
  int num_topo_communities = 4;
  double dispersion = 1.0;  // 1: bot clusters spread over all communities; 0: one community each
  int feature_dim = 16;
  double cluster_signal = 2.0;  // pairwise distance between bot-cluster feature prototypes
  double noise_sigma = 1.0;
  double mean_degree = 8.0;
  int relations = 2;
  uint64_t seed = 1;
};

void check_config(const SynthConfig& cfg);

// Deterministic generator: planted labels, controllable edge homophily,
// semantically coherent but topologically dispersed bot clusters, stratified
// 7/2/1 splits. The realized same-label edge fraction matches
// target_homophily up to quota rounding.
std::pair<DatasetBundle, GroundTruth> generate(const SynthConfig& cfg);

// Named scaled-down regimes of the two benchmark datasets.
// "camouflage": h = 0.53, bot_fraction = 0.56; "homophilic": h = 0.92, bot_fraction = 0.27.
SynthConfig preset(const std::string& name);

// Stratified split of the given labeled nodes into train/val/test fractions
// (floor for val and test, remainder to train).
struct SplitResult {
  std::vector<int> train, val, test;
};
SplitResult stratified_split(const std::vector<int>& node_ids, const std::vector<int>& labels,
                             double val_fraction, double test_fraction, Rng& rng);

}  // namespace bothp
