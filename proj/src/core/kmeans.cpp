#include "core/kmeans.hpp"

namespace bothp {

namespace {

// Squared distances from every point to one center.
Vec dist2_to(const Mat& points, const Eigen::RowVectorXd& center) {
  return (points.rowwise() - center).rowwise().squaredNorm();
}

}  // namespace

KmeansResult kmeans(const Mat& points, int k, Rng& rng, int max_iter, double rel_tol) {
  const int n = static_cast<int>(points.rows());
  if (k < 1) throw ValidationError("kmeans: k must be >= 1");
  if (k > n) throw ValidationError("kmeans: k=" + std::to_string(k) + " exceeds " + std::to_string(n) + " points");

  KmeansResult res;
  res.assignment.assign(n, 0);

  bool all_identical = true;
  for (int i = 1; i < n && all_identical; ++i) {
    if (points.row(i) != points.row(0)) all_identical = false;
  }
  if (all_identical) {
    res.centroids = points.row(0).replicate(k, 1);
    res.objective = 0.0;
    res.degenerate = k > 1;
    return res;
  }

  // k-means++ seeding
  Mat centers(k, points.cols());
  centers.row(0) = points.row(rng.below(n));
  Vec d2 = dist2_to(points, centers.row(0));
  for (int j = 1; j < k; ++j) {
    const double total = d2.sum();
    int pick;
    if (total <= 0.0) {
      pick = static_cast<int>(rng.below(n));
    } else {
      double r = rng.uniform() * total;
      pick = n - 1;
      for (int i = 0; i < n; ++i) {
        r -= d2(i);
        if (r <= 0.0) {
          pick = i;
          break;
        }
      }
    }
    centers.row(j) = points.row(pick);
    d2 = d2.cwiseMin(dist2_to(points, centers.row(j)));
  }

  // Lloyd iterations; dist2(i, j) = |x_i|^2 + |c_j|^2 - 2 x_i . c_j
  const Vec point_norms = points.rowwise().squaredNorm();
  double prev_obj = -1.0;
  for (int it = 0; it < max_iter; ++it) {
    res.iterations = it + 1;
    Mat dist2 = (-2.0 * points * centers.transpose());
    dist2.colwise() += point_norms;
    dist2.rowwise() += centers.rowwise().squaredNorm().transpose();

    double obj = 0.0;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = dist2(i, 0);
      for (int j = 1; j < k; ++j) {
        if (dist2(i, j) < best_d) {
          best_d = dist2(i, j);
          best = j;
        }
      }
      res.assignment[i] = best;
      obj += std::max(best_d, 0.0);
    }

    Mat sums = Mat::Zero(k, points.cols());
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) {
      sums.row(res.assignment[i]) += points.row(i);
      counts[res.assignment[i]]++;
    }
    for (int j = 0; j < k; ++j) {
      if (counts[j] > 0) centers.row(j) = sums.row(j) / counts[j];  // empty clusters keep their centroid
    }

    if (prev_obj >= 0.0) {
      const double rel = std::abs(prev_obj - obj) / std::max(prev_obj, 1e-30);
      if (rel < rel_tol) {
        prev_obj = obj;
        break;
      }
    }
    prev_obj = obj;
  }
  res.centroids = std::move(centers);
  res.objective = prev_obj;
  return res;
}

}  // namespace bothp
