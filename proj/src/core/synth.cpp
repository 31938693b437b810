#include "core/synth.hpp"

#include <algorithm>
#include <unordered_set>

namespace bothp {

namespace {
// Probability that an edge partner is drawn from the endpoint's own planted
// community before falling back to the global pool.
constexpr double kIntraCommunityPreference = 0.85;
}  // namespace

void check_config(const SynthConfig& cfg) {
  if (cfg.num_nodes < 2) throw ValidationError("SynthConfig: num_nodes must be >= 2");
  if (!(cfg.bot_fraction > 0.0 && cfg.bot_fraction < 1.0)) {
    throw ValidationError("SynthConfig: bot_fraction must be in (0, 1)");
  }
  if (cfg.target_homophily < 0.0 || cfg.target_homophily > 1.0) {
    throw ValidationError("SynthConfig: target_homophily must be in [0, 1]");
  }
  if (cfg.num_bot_clusters < 1) throw ValidationError("SynthConfig: num_bot_clusters must be >= 1");
  const int bots = static_cast<int>(std::floor(cfg.bot_fraction * cfg.num_nodes));
  if (cfg.num_bot_clusters > bots) {
    throw ValidationError("SynthConfig: num_bot_clusters exceeds bot count " + std::to_string(bots));
  }
  if (cfg.num_topo_communities < 1 || cfg.num_topo_communities > cfg.num_nodes) {
    throw ValidationError("SynthConfig: num_topo_communities must be in [1, num_nodes]");
  }
  if (cfg.dispersion < 0.0 || cfg.dispersion > 1.0) {
    throw ValidationError("SynthConfig: dispersion must be in [0, 1]");
  }
  if (cfg.feature_dim < 1) throw ValidationError("SynthConfig: feature_dim must be >= 1");
  if (cfg.num_bot_clusters > cfg.feature_dim) {
    throw ValidationError("SynthConfig: num_bot_clusters must be <= feature_dim "
                          "(prototypes sit on orthogonal feature axes)");
  }
  if (cfg.cluster_signal < 0.0) throw ValidationError("SynthConfig: cluster_signal must be >= 0");
  if (cfg.noise_sigma <= 0.0) throw ValidationError("SynthConfig: noise_sigma must be > 0");
  if (cfg.mean_degree <= 0.0) throw ValidationError("SynthConfig: mean_degree must be > 0");
  if (cfg.relations < 1) throw ValidationError("SynthConfig: relations must be >= 1");
}

std::pair<DatasetBundle, GroundTruth> generate(const SynthConfig& cfg) {
  check_config(cfg);
  const int n = cfg.num_nodes;
  const int num_bots = static_cast<int>(std::floor(cfg.bot_fraction * n));
  Rng base(cfg.seed);

  // (a) labels
  Rng label_rng = base.fork(1);
  std::vector<int> ids(n);
  for (int i = 0; i < n; ++i) ids[i] = i;
  label_rng.shuffle(ids);
  std::vector<int> labels(n, 0);
  std::vector<int> bot_cluster(n, -1);
  for (int k = 0; k < num_bots; ++k) {
    labels[ids[k]] = 1;
    bot_cluster[ids[k]] = k % cfg.num_bot_clusters;
  }

  // (b) topological communities
  Rng comm_rng = base.fork(2);
  const int m = cfg.num_topo_communities;
  std::vector<int> community(n, 0);
  for (int i = 0; i < n; ++i) {
    if (labels[i] == 0) {
      community[i] = static_cast<int>(comm_rng.below(m));
    } else {
      const int home = bot_cluster[i] % m;
      community[i] = comm_rng.uniform() < 1.0 - cfg.dispersion ? home
                                                               : static_cast<int>(comm_rng.below(m));
    }
  }

  // (c) features: humans around the origin, bot cluster b around
  // (cluster_signal / sqrt(2)) * e_b so prototypes are pairwise cluster_signal apart.
  Rng feat_rng = base.fork(3);
  MatF features(n, cfg.feature_dim);
  const double proto_scale = cfg.cluster_signal / std::numbers::sqrt2;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < cfg.feature_dim; ++j) {
      double mean = 0.0;
      if (labels[i] == 1 && j == bot_cluster[i]) mean = proto_scale;
      features(i, j) = static_cast<float>(mean + cfg.noise_sigma * feat_rng.normal());
    }
  }

  // (d) edges: per-pair same/cross-label quota hits the homophily target
  // exactly up to rounding; partners prefer the endpoint's community.
  Rng edge_rng = base.fork(4);
  const long long num_pairs = static_cast<long long>(std::floor(cfg.mean_degree * n / 2.0));
  const long long num_same = std::llround(cfg.target_homophily * static_cast<double>(num_pairs));
  std::vector<char> same_flags(num_pairs, 0);
  for (long long k = 0; k < num_same; ++k) same_flags[k] = 1;
  edge_rng.shuffle(same_flags);

  std::vector<std::vector<std::vector<int>>> by_comm_label(m, std::vector<std::vector<int>>(2));
  std::vector<std::vector<int>> by_label(2);
  for (int i = 0; i < n; ++i) {
    by_comm_label[community[i]][labels[i]].push_back(i);
    by_label[labels[i]].push_back(i);
  }
  const long long same_capacity[2] = {static_cast<long long>(by_label[0].size()),
                                      static_cast<long long>(by_label[1].size())};
  if (num_same > 0 && same_capacity[0] < 2 && same_capacity[1] < 2) {
    throw ValidationError("generate: same-label edges infeasible; achievable homophily is 0");
  }
  if (num_same < num_pairs && (by_label[0].empty() || by_label[1].empty())) {
    throw ValidationError("generate: cross-label edges infeasible; achievable homophily is 1");
  }

  std::unordered_set<long long> used;
  std::vector<std::vector<std::pair<int, int>>> edges(cfg.relations);
  const long long attempt_budget = 200 * std::max<long long>(num_pairs, 1);
  long long attempts = 0;
  for (long long k = 0; k < num_pairs; ++k) {
    const bool want_same = same_flags[k] != 0;
    while (true) {
      if (++attempts > attempt_budget) {
        throw ValidationError(
            "generate: resampling budget exhausted at target_homophily=" +
            std::to_string(cfg.target_homophily) +
            "; lower mean_degree or move the target toward the class-mix baseline");
      }
      const int a = static_cast<int>(edge_rng.below(n));
      const int partner_label = want_same ? labels[a] : 1 - labels[a];
      const std::vector<int>* pool = &by_comm_label[community[a]][partner_label];
      if (pool->empty() || edge_rng.uniform() >= kIntraCommunityPreference) pool = &by_label[partner_label];
      if (pool->empty()) continue;
      const int b = (*pool)[edge_rng.below(static_cast<long long>(pool->size()))];
      if (a == b) continue;
      const long long key = static_cast<long long>(std::min(a, b)) * n + std::max(a, b);
      if (used.count(key)) continue;
      used.insert(key);
      const int rel = static_cast<int>(edge_rng.below(cfg.relations));
      edges[rel].push_back({a, b});
      edges[rel].push_back({b, a});
      break;
    }
  }

  // (e) stratified 7/2/1 splits
  Rng split_rng = base.fork(5);
  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  const SplitResult split = stratified_split(all, labels, 0.2, 0.1, split_rng);

  SocialGraph graph;
  graph.num_nodes = n;
  graph.features = std::move(features);
  for (int r = 0; r < cfg.relations; ++r) graph.relations.push_back("rel" + std::to_string(r));
  graph.edges = std::move(edges);
  graph.labels = labels;
  graph.train_idx = split.train;
  graph.val_idx = split.val;
  graph.test_idx = split.test;

  GroundTruth truth;
  truth.labels = labels;
  truth.bot_cluster = std::move(bot_cluster);
  truth.topo_community = std::move(community);

  DatasetBundle bundle;
  bundle.graph = std::move(graph);
  bundle.meta.name = "synthetic";
  bundle.meta.provenance = "synthetic";
  bundle.meta.generator_seed = cfg.seed;
  bundle.ground_truth = truth;
  return {std::move(bundle), std::move(truth)};
}

SynthConfig preset(const std::string& name) {
  SynthConfig cfg;
  if (name == "camouflage") {
    cfg.num_nodes = 2000;
    cfg.target_homophily = 0.53;
    cfg.bot_fraction = 0.56;
  } else if (name == "homophilic") {
    cfg.num_nodes = 2000;
    cfg.target_homophily = 0.92;
    cfg.bot_fraction = 0.27;
  } else {
    throw ValidationError("preset: unknown preset '" + name + "' (expected camouflage|homophilic)");
  }
  return cfg;
}

SplitResult stratified_split(const std::vector<int>& node_ids, const std::vector<int>& labels,
                             double val_fraction, double test_fraction, Rng& rng) {
  SplitResult out;
  for (int cls = 0; cls <= 1; ++cls) {
    std::vector<int> members;
    for (int i : node_ids) {
      if (labels[i] == cls) members.push_back(i);
    }
    rng.shuffle(members);
    const int n_test = static_cast<int>(std::floor(test_fraction * members.size()));
    const int n_val = static_cast<int>(std::floor(val_fraction * members.size()));
    for (size_t k = 0; k < members.size(); ++k) {
      if (static_cast<int>(k) < n_test) out.test.push_back(members[k]);
      else if (static_cast<int>(k) < n_test + n_val) out.val.push_back(members[k]);
      else out.train.push_back(members[k]);
    }
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

}  // namespace bothp
