#pragma once

#include "core/common.hpp"

#include <functional>
#include <memory>
#include <utility>
#include <vector>

namespace bothp::ad {

// Incoming-edge structure of one relation, in the layout the aggregation ops
// want: per-node in-degrees plus a CSR grouping of edge sources by target.
struct RelationStructure {
  int num_nodes = 0;
  std::vector<int> indeg;    // per node
  std::vector<int> offsets;  // size num_nodes + 1
  std::vector<int> in_src;   // edge sources grouped by destination

  static RelationStructure build(const std::vector<std::pair<int, int>>& edges, int num_nodes);
};

// Reverse-mode tape over dense row-major matrices. A Var is an index into the
// tape; ops append nodes, backward() runs the recorded closures in reverse.
// Tapes are built per optimization step and cleared afterwards.
class Tape {
 public:
  struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
  };

  Var leaf(Mat value, bool requires_grad = true);
  Var constant(Mat value) { return leaf(std::move(value), false); }

  const Mat& value(Var v) const { return nodes_[v.id].value; }
  const Mat& grad(Var v) const { return nodes_[v.id].grad; }
  bool needs_grad(Var v) const { return nodes_[v.id].requires_grad; }
  double scalar(Var v) const;

  // Gradient accumulation used by op closures; no-op for no-grad nodes.
  void accum(Var v, const Mat& g) {
    if (nodes_[v.id].requires_grad) nodes_[v.id].grad += g;
  }

  Var matmul(Var a, Var b, bool trans_a = false, bool trans_b = false);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);  // elementwise
  Var add_rowvec(Var a, Var v);
  Var sub_rowvec(Var a, Var v);
  Var div_rowvec(Var a, Var v);
  Var add_colvec(Var a, Var v);
  Var mul_colvec(Var a, Var v);  // scale row i by v(i, 0)
  Var affine(Var a, double scale, double shift);
  Var pow_const(Var a, double exponent);  // requires positive entries
  Var log(Var a);
  Var clamp_min(Var a, double lo);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var leaky_relu(Var a, double slope);
  Var transpose(Var a);
  Var row_select(Var a, std::vector<int> rows);
  Var concat_cols(Var a, Var b);
  Var row_sum(Var a);  // R x 1
  Var col_sum(Var a);  // 1 x C
  Var sum_all(Var a);  // 1 x 1

  // Copy of x with the given rows replaced by the (1 x d) token.
  Var mask_rows(Var x, Var token, std::vector<int> rows);

  // out[i] = mean over in-neighbors j of m[j]; zero row for isolated nodes.
  // `rel` must outlive the tape.
  Var mean_aggregate(Var m, const RelationStructure* rel);

  // Additive attention over in-neighbors: score(j->i) = lrelu(s_dst[i] + s_src[j]),
  // softmax per target node, out[i] = sum_j alpha_j m[j].
  Var attention_aggregate(Var m, Var s_dst, Var s_src, const RelationStructure* rel, double slope);

  // Backpropagate from a 1x1 output.
  void backward(Var output);

  void clear();
  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    Mat grad;
    bool requires_grad = false;
    std::function<void(Tape&)> backprop;  // empty for leaves
  };

  Var emit(Mat value, bool requires_grad);
  void set_backprop(Var v, std::function<void(Tape&)> fn) { nodes_[v.id].backprop = std::move(fn); }

  std::vector<Node> nodes_;
};

using Var = Tape::Var;

}  // namespace bothp::ad
