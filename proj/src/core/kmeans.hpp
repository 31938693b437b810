#pragma once

#include "core/common.hpp"

namespace bothp {

struct KmeansResult {
  Mat centroids;  // k x d
  std::vector<int> assignment;
  double objective = 0.0;  // sum of squared distances to assigned centroid
  int iterations = 0;
  bool degenerate = false;  // all input rows identical with k > 1
};

// Lloyd's algorithm with k-means++ seeding; stops after max_iter iterations
// or when the relative objective change drops below rel_tol.
KmeansResult kmeans(const Mat& points, int k, Rng& rng, int max_iter = 300, double rel_tol = 1e-6);

}  // namespace bothp
