#pragma once

#include "core/common.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bothp {

// Multi-relation directed social graph. Immutable by convention after
// construction; every operation below is a pure function over it.
struct SocialGraph {
  int num_nodes = 0;
  MatF features;                                       // N x d, float32 as on disk
  std::vector<std::string> relations;                  // relation names, index = relation id
  std::vector<std::vector<std::pair<int, int>>> edges; // per relation, directed (src, dst)
  std::vector<int> labels;                             // 0 = human, 1 = bot, -1 = unknown
  std::vector<int> train_idx, val_idx, test_idx;

  int feature_dim() const { return static_cast<int>(features.cols()); }
  int num_relations() const { return static_cast<int>(relations.size()); }
  long long num_edges() const {
    long long m = 0;
    for (const auto& rel : edges) m += static_cast<long long>(rel.size());
    return m;
  }
  Mat features_as_double() const { return features.cast<double>(); }
};

struct CommunityPartition {
  std::vector<int> assignment;  // per node, contiguous ids 0..num_communities-1
  int num_communities = 0;
  double modularity = 0.0;
};

struct LouvainResult {
  CommunityPartition partition;
  std::vector<double> pass_modularity;  // modularity after each level, non-decreasing
};

struct GroundTruth {
  std::vector<int> labels;          // 0/1
  std::vector<int> bot_cluster;     // cluster id for bots, -1 for humans
  std::vector<int> topo_community;  // planted community id per node
};

struct DatasetMeta {
  std::string name;
  std::string provenance;  // "synthetic" | "loaded"
  std::optional<uint64_t> generator_seed;
};

struct DatasetBundle {
  SocialGraph graph;
  DatasetMeta meta;
  std::optional<GroundTruth> ground_truth;
};

// Returns one message per broken invariant, naming the field and offending
// index; empty means the graph is well-formed.
std::vector<std::string> validate(const SocialGraph& g);

// Fraction of directed edges (pooled across relations) whose endpoints share
// a label. Requires every edge endpoint labeled and at least one edge.
double edge_homophily(const SocialGraph& g);

// Copy of g where relation `relation` gains the closing edge of every 2-path
// (a->b, b->c, a != c). That relation's edge list comes back sorted by
// (src, dst); other relations are untouched.
SocialGraph augment_two_hop(const SocialGraph& g, int relation);

// Greedy two-phase Louvain on the symmetrized relation-pooled multigraph,
// resolution 1, local-move ties broken by lowest community id, node visit
// order shuffled by seed.
LouvainResult louvain_partition(const SocialGraph& g, uint64_t seed);

// Newman modularity of an arbitrary assignment on the symmetrized pooled
// graph (exposed for the partition oracles).
double partition_modularity(const SocialGraph& g, const std::vector<int>& assignment);

// Induced subgraph over the nodes of the chosen communities. Node ids are
// compacted in ascending original order; labels/features carried, splits dropped.
SocialGraph subgraph_by_communities(const SocialGraph& g, const CommunityPartition& p,
                                    const std::vector<int>& ids);

}  // namespace bothp
