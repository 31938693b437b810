#include "core/graph.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace bothp {

namespace {
std::string rel_tag(const SocialGraph& g, size_t r) {
  if (r < g.relations.size()) return g.relations[r];
  return std::to_string(r);
}
}  // namespace

std::vector<std::string> validate(const SocialGraph& g) {
  std::vector<std::string> out;
  if (g.num_nodes < 0) out.push_back("num_nodes: negative");
  if (g.features.rows() != g.num_nodes) {
    out.push_back("feature_matrix: " + std::to_string(g.features.rows()) + " rows for " +
                  std::to_string(g.num_nodes) + " nodes");
  }
  if (g.edges.size() != g.relations.size()) {
    out.push_back("edges: " + std::to_string(g.edges.size()) + " relation lists for " +
                  std::to_string(g.relations.size()) + " relations");
  }
  for (size_t r = 0; r < g.edges.size(); ++r) {
    for (size_t e = 0; e < g.edges[r].size(); ++e) {
      const auto [src, dst] = g.edges[r][e];
      if (src < 0 || src >= g.num_nodes || dst < 0 || dst >= g.num_nodes) {
        out.push_back("edges[" + rel_tag(g, r) + "][" + std::to_string(e) + "]: endpoint (" +
                      std::to_string(src) + ", " + std::to_string(dst) + ") out of range [0, " +
                      std::to_string(g.num_nodes) + ")");
      } else if (src == dst) {
        out.push_back("edges[" + rel_tag(g, r) + "][" + std::to_string(e) + "]: self-loop at node " +
                      std::to_string(src));
      }
    }
  }
  if (static_cast<int>(g.labels.size()) != g.num_nodes) {
    out.push_back("labels: " + std::to_string(g.labels.size()) + " entries for " +
                  std::to_string(g.num_nodes) + " nodes");
  } else {
    for (int i = 0; i < g.num_nodes; ++i) {
      if (g.labels[i] != 0 && g.labels[i] != 1 && g.labels[i] != -1) {
        out.push_back("labels[" + std::to_string(i) + "]: value " + std::to_string(g.labels[i]) +
                      " not in {0, 1, -1}");
      }
    }
  }
  std::vector<char> seen(g.num_nodes > 0 ? g.num_nodes : 0, 0);
  const std::pair<const std::vector<int>*, const char*> splits[] = {
      {&g.train_idx, "train"}, {&g.val_idx, "val"}, {&g.test_idx, "test"}};
  for (const auto& [idx, name] : splits) {
    for (int i : *idx) {
      if (i < 0 || i >= g.num_nodes) {
        out.push_back(std::string("splits.") + name + ": index " + std::to_string(i) + " out of range");
        continue;
      }
      if (seen[i]) {
        out.push_back(std::string("splits.") + name + ": node " + std::to_string(i) +
                      " already assigned to another split");
      }
      seen[i] = 1;
      if (static_cast<int>(g.labels.size()) == g.num_nodes && g.labels[i] == -1) {
        out.push_back(std::string("splits.") + name + ": node " + std::to_string(i) + " is unlabeled");
      }
    }
  }
  return out;
}

double edge_homophily(const SocialGraph& g) {
  long long total = 0;
  long long same = 0;
  for (const auto& rel : g.edges) {
    for (const auto& [src, dst] : rel) {
      const int ls = g.labels.at(src);
      const int ld = g.labels.at(dst);
      if (ls == -1) throw ValidationError("edge_homophily: node " + std::to_string(src) + " is unlabeled");
      if (ld == -1) throw ValidationError("edge_homophily: node " + std::to_string(dst) + " is unlabeled");
      ++total;
      if (ls == ld) ++same;
    }
  }
  if (total == 0) throw ValidationError("edge_homophily: empty edge set");
  return static_cast<double>(same) / static_cast<double>(total);
}

SocialGraph augment_two_hop(const SocialGraph& g, int relation) {
  if (relation < 0 || relation >= g.num_relations()) {
    throw ValidationError("augment_two_hop: unknown relation " + std::to_string(relation));
  }
  const auto& rel = g.edges[relation];
  std::set<std::pair<int, int>> present(rel.begin(), rel.end());
  std::vector<std::vector<int>> succ(g.num_nodes);
  for (const auto& [src, dst] : present) succ[src].push_back(dst);

  std::set<std::pair<int, int>> closed = present;
  for (const auto& [a, b] : present) {
    for (int c : succ[b]) {
      if (a != c) closed.insert({a, c});
    }
  }
  SocialGraph out = g;
  out.edges[relation].assign(closed.begin(), closed.end());
  return out;
}

namespace {

// Symmetrized relation-pooled weighted graph used by Louvain and modularity.
// A(i,j) for i != j is the pooled directed-edge count between i and j;
// self-loops contribute 2 to A(i,i) per the usual modularity convention.
struct UndirectedView {
  int n = 0;
  double two_m = 0.0;                                    // sum over i of degree k_i
  std::vector<std::vector<std::pair<int, double>>> adj;  // (neighbor, weight), i != j
  std::vector<double> self_weight;                       // A(i,i)
  std::vector<double> degree;                            // k_i

  void finalize_degrees() {
    degree.assign(n, 0.0);
    two_m = 0.0;
    for (int i = 0; i < n; ++i) {
      double k = self_weight[i];
      for (const auto& [j, w] : adj[i]) k += w;
      degree[i] = k;
      two_m += k;
    }
  }
};

UndirectedView make_undirected(const SocialGraph& g) {
  UndirectedView v;
  v.n = g.num_nodes;
  v.adj.resize(v.n);
  v.self_weight.assign(v.n, 0.0);
  std::unordered_map<long long, double> weight;
  for (const auto& rel : g.edges) {
    for (const auto& [src, dst] : rel) {
      if (src == dst) {
        v.self_weight[src] += 2.0;
        continue;
      }
      const long long a = std::min(src, dst);
      const long long b = std::max(src, dst);
      weight[a * v.n + b] += 1.0;
    }
  }
  for (const auto& [key, w] : weight) {
    const int a = static_cast<int>(key / v.n);
    const int b = static_cast<int>(key % v.n);
    v.adj[a].push_back({b, w});
    v.adj[b].push_back({a, w});
  }
  v.finalize_degrees();
  return v;
}

double modularity_of(const UndirectedView& v, const std::vector<int>& assignment) {
  const int ncomm = 1 + *std::max_element(assignment.begin(), assignment.end());
  std::vector<double> internal(ncomm, 0.0);  // sum of A(i,j) over ordered pairs within c
  std::vector<double> total(ncomm, 0.0);     // sum of k_i within c
  for (int i = 0; i < v.n; ++i) {
    const int c = assignment[i];
    total[c] += v.degree[i];
    internal[c] += v.self_weight[i];
    for (const auto& [j, w] : v.adj[i]) {
      if (assignment[j] == c) internal[c] += w;
    }
  }
  double q = 0.0;
  for (int c = 0; c < ncomm; ++c) {
    const double frac = total[c] / v.two_m;
    q += internal[c] / v.two_m - frac * frac;
  }
  return q;
}

// One local-move phase; mutates `community`, returns true if any node moved.
// Gain of moving i into c (i first detached) is proportional to
// w(i,c)/2m - tot(c)*k_i/(2m)^2; ties go to the lowest community id.
bool local_moves(const UndirectedView& v, std::vector<int>& community, Rng& rng) {
  std::vector<int> order(v.n);
  for (int i = 0; i < v.n; ++i) order[i] = i;
  rng.shuffle(order);

  std::vector<double> comm_total(v.n, 0.0);
  for (int i = 0; i < v.n; ++i) comm_total[community[i]] += v.degree[i];

  bool any_moved = false;
  bool improved = true;
  while (improved) {
    improved = false;
    for (int i : order) {
      const int old_c = community[i];
      const double k_i = v.degree[i];
      std::unordered_map<int, double> links;
      links[old_c];  // staying is always a candidate
      for (const auto& [j, w] : v.adj[i]) links[community[j]] += w;
      comm_total[old_c] -= k_i;

      int best_c = old_c;
      double best_gain = links[old_c] / v.two_m - comm_total[old_c] * k_i / (v.two_m * v.two_m);
      for (const auto& [c, w] : links) {
        const double gain = w / v.two_m - comm_total[c] * k_i / (v.two_m * v.two_m);
        if (gain > best_gain || (gain == best_gain && c < best_c)) {
          best_gain = gain;
          best_c = c;
        }
      }
      comm_total[best_c] += k_i;
      if (best_c != old_c) {
        community[i] = best_c;
        improved = true;
        any_moved = true;
      }
    }
  }
  return any_moved;
}

// Contract communities into super-nodes, preserving total weight.
UndirectedView aggregate(const UndirectedView& v, const std::vector<int>& community, int ncomm) {
  UndirectedView out;
  out.n = ncomm;
  out.adj.resize(ncomm);
  out.self_weight.assign(ncomm, 0.0);
  std::unordered_map<long long, double> weight;
  for (int i = 0; i < v.n; ++i) {
    const int ci = community[i];
    out.self_weight[ci] += v.self_weight[i];
    for (const auto& [j, w] : v.adj[i]) {
      if (i >= j) continue;  // visit each unordered pair once
      const int cj = community[j];
      if (ci == cj) {
        out.self_weight[ci] += 2.0 * w;  // internal pair -> A(c,c)
      } else {
        const long long a = std::min(ci, cj);
        const long long b = std::max(ci, cj);
        weight[a * ncomm + b] += w;
      }
    }
  }
  for (const auto& [key, w] : weight) {
    const int a = static_cast<int>(key / ncomm);
    const int b = static_cast<int>(key % ncomm);
    out.adj[a].push_back({b, w});
    out.adj[b].push_back({a, w});
  }
  out.finalize_degrees();
  return out;
}

// Relabel to contiguous ids ordered by first appearance (= smallest member node).
int compact_labels(std::vector<int>& assignment) {
  std::unordered_map<int, int> remap;
  int next = 0;
  for (int& c : assignment) {
    auto it = remap.find(c);
    if (it == remap.end()) it = remap.insert({c, next++}).first;
    c = it->second;
  }
  return next;
}

}  // namespace

double partition_modularity(const SocialGraph& g, const std::vector<int>& assignment) {
  if (g.num_edges() == 0) throw ValidationError("partition_modularity: empty edge set");
  if (static_cast<int>(assignment.size()) != g.num_nodes) {
    throw ValidationError("partition_modularity: assignment size mismatch");
  }
  return modularity_of(make_undirected(g), assignment);
}

LouvainResult louvain_partition(const SocialGraph& g, uint64_t seed) {
  if (g.num_edges() == 0) throw ValidationError("louvain_partition: empty edge set");
  Rng rng(seed);

  const UndirectedView base = make_undirected(g);
  UndirectedView level = base;
  std::vector<int> assignment(g.num_nodes);
  for (int i = 0; i < g.num_nodes; ++i) assignment[i] = i;

  LouvainResult result;
  while (true) {
    std::vector<int> community(level.n);
    for (int i = 0; i < level.n; ++i) community[i] = i;
    const bool moved = local_moves(level, community, rng);
    const int ncomm = compact_labels(community);
    for (int& a : assignment) a = community[a];
    result.pass_modularity.push_back(modularity_of(base, assignment));
    if (!moved || ncomm == level.n) break;
    level = aggregate(level, community, ncomm);
  }

  result.partition.assignment = assignment;
  result.partition.num_communities = compact_labels(result.partition.assignment);
  result.partition.modularity = modularity_of(base, result.partition.assignment);
  return result;
}

SocialGraph subgraph_by_communities(const SocialGraph& g, const CommunityPartition& p,
                                    const std::vector<int>& ids) {
  if (ids.empty()) throw ValidationError("subgraph_by_communities: empty selection");
  if (static_cast<int>(p.assignment.size()) != g.num_nodes) {
    throw ValidationError("subgraph_by_communities: partition size mismatch");
  }
  std::unordered_set<int> chosen;
  for (int c : ids) {
    if (c < 0 || c >= p.num_communities) {
      throw ValidationError("subgraph_by_communities: unknown community id " + std::to_string(c));
    }
    chosen.insert(c);
  }
  std::vector<int> keep;
  std::vector<int> new_id(g.num_nodes, -1);
  for (int i = 0; i < g.num_nodes; ++i) {
    if (chosen.count(p.assignment[i])) {
      new_id[i] = static_cast<int>(keep.size());
      keep.push_back(i);
    }
  }
  SocialGraph out;
  out.num_nodes = static_cast<int>(keep.size());
  out.relations = g.relations;
  out.features.resize(out.num_nodes, g.features.cols());
  out.labels.resize(keep.size());
  for (int i = 0; i < out.num_nodes; ++i) {
    out.features.row(i) = g.features.row(keep[i]);
    out.labels[i] = g.labels[keep[i]];
  }
  out.edges.resize(g.edges.size());
  for (size_t r = 0; r < g.edges.size(); ++r) {
    for (const auto& [src, dst] : g.edges[r]) {
      if (new_id[src] >= 0 && new_id[dst] >= 0) out.edges[r].push_back({new_id[src], new_id[dst]});
    }
  }
  return out;
}

}  // namespace bothp
