#pragma once

#include "core/autodiff.hpp"
#include "core/graph.hpp"

#include <doctest.h>

#include <functional>

namespace bothp::testutil {

inline Mat random_mat(int rows, int cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(lo, hi);
  }
  return m;
}

// Random entries bounded away from zero, for ops with kinks at the origin.
inline Mat random_mat_off_kink(int rows, int cols, Rng& rng, double min_abs = 0.2) {
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double mag = rng.uniform(min_abs, 1.0);
      m(i, j) = rng.uniform() < 0.5 ? -mag : mag;
    }
  }
  return m;
}

using Builder = std::function<ad::Var(ad::Tape&, std::vector<ad::Var>&)>;

inline double eval_builder(const Builder& build, const std::vector<Mat>& inputs) {
  ad::Tape t;
  std::vector<ad::Var> vars;
  for (const Mat& m : inputs) vars.push_back(t.leaf(m));
  return t.scalar(build(t, vars));
}

// Central finite differences against the tape gradients for every entry of
// every input. rel error = |ad - fd| / max(|ad|, |fd|, floor).
inline void check_gradients(const Builder& build, std::vector<Mat> inputs, double tol = 1e-5,
                            double step = 1e-5) {
  ad::Tape t;
  std::vector<ad::Var> vars;
  for (const Mat& m : inputs) vars.push_back(t.leaf(m));
  ad::Var out = build(t, vars);
  t.backward(out);

  double max_rel = 0.0;
  for (size_t i = 0; i < inputs.size(); ++i) {
    const Mat analytic = t.grad(vars[i]);
    for (Eigen::Index r = 0; r < inputs[i].rows(); ++r) {
      for (Eigen::Index c = 0; c < inputs[i].cols(); ++c) {
        const double keep = inputs[i](r, c);
        inputs[i](r, c) = keep + step;
        const double up = eval_builder(build, inputs);
        inputs[i](r, c) = keep - step;
        const double down = eval_builder(build, inputs);
        inputs[i](r, c) = keep;
        const double fd = (up - down) / (2.0 * step);
        const double ad = analytic(r, c);
        const double rel = std::abs(ad - fd) / std::max({std::abs(ad), std::abs(fd), 1e-6});
        max_rel = std::max(max_rel, rel);
        if (rel >= tol) {
          CAPTURE(i);
          CAPTURE(r);
          CAPTURE(c);
          CAPTURE(ad);
          CAPTURE(fd);
        }
        REQUIRE(rel < tol);
      }
    }
  }
  (void)max_rel;
}

// Tiny directed multigraph helper.
inline SocialGraph make_graph(int n, const std::vector<std::vector<std::pair<int, int>>>& edges,
                              const std::vector<int>& labels = {}, int feature_dim = 2) {
  SocialGraph g;
  g.num_nodes = n;
  g.features = MatF::Zero(n, feature_dim);
  for (size_t r = 0; r < edges.size(); ++r) g.relations.push_back("rel" + std::to_string(r));
  g.edges = edges;
  g.labels = labels.empty() ? std::vector<int>(n, -1) : labels;
  return g;
}

}  // namespace bothp::testutil
