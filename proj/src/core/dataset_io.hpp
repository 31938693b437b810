#pragma once

#include "core/graph.hpp"

#include <filesystem>

namespace bothp {

// On-disk layout:
//   meta.json          {name, num_nodes, feature_dim, relations, has_ground_truth[, generator_seed]}
//   features.f32       row-major little-endian float32, N x d, no header
//   edges.csv          header src,dst,relation (relation as index)
//   labels.csv         header node,label with label in {0, 1, -1}
//   splits.json        {train: [...], val: [...], test: [...]}
//   ground_truth.json  optional, {labels, bot_cluster, topo_community}
void save_dataset(const DatasetBundle& bundle, const std::filesystem::path& dir);

// Throws ValidationError naming the file and first offending record; a loaded
// graph that fails validate() is also rejected.
DatasetBundle load_dataset(const std::filesystem::path& dir);

}  // namespace bothp
