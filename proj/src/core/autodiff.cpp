#include "core/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bothp::ad {

RelationStructure RelationStructure::build(const std::vector<std::pair<int, int>>& edges, int num_nodes) {
  RelationStructure r;
  r.num_nodes = num_nodes;
  r.indeg.assign(num_nodes, 0);
  for (const auto& [src, dst] : edges) {
    (void)src;
    r.indeg[dst]++;
  }
  r.offsets.assign(num_nodes + 1, 0);
  for (int i = 0; i < num_nodes; ++i) r.offsets[i + 1] = r.offsets[i] + r.indeg[i];
  r.in_src.resize(edges.size());
  std::vector<int> cursor(r.offsets.begin(), r.offsets.end() - 1);
  for (const auto& [src, dst] : edges) r.in_src[cursor[dst]++] = src;
  return r;
}

Var Tape::leaf(Mat value, bool requires_grad) { return emit(std::move(value), requires_grad); }

Var Tape::emit(Mat value, bool requires_grad) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

double Tape::scalar(Var v) const {
  const Mat& m = value(v);
  if (m.rows() != 1 || m.cols() != 1) throw ValidationError("scalar: value is not 1x1");
  return m(0, 0);
}

namespace {
void check_same_shape(const Mat& a, const Mat& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ValidationError(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()) + ")");
  }
}
}  // namespace

Var Tape::matmul(Var a, Var b, bool trans_a, bool trans_b) {
  const Mat& A = value(a);
  const Mat& B = value(b);
  const auto a_cols = trans_a ? A.rows() : A.cols();
  const auto b_rows = trans_b ? B.cols() : B.rows();
  if (a_cols != b_rows) throw ValidationError("matmul: inner dimension mismatch");
  Mat c;
  if (!trans_a && !trans_b) c = A * B;
  else if (trans_a && !trans_b) c = A.transpose() * B;
  else if (!trans_a && trans_b) c = A * B.transpose();
  else c = A.transpose() * B.transpose();

  Var out = emit(std::move(c), needs_grad(a) || needs_grad(b));
  set_backprop(out, [a, b, trans_a, trans_b, out](Tape& t) {
    const Mat& G = t.grad(out);
    const Mat& A = t.value(a);
    const Mat& B = t.value(b);
    if (!trans_a && !trans_b) {
      t.accum(a, G * B.transpose());
      t.accum(b, A.transpose() * G);
    } else if (trans_a && !trans_b) {
      t.accum(a, B * G.transpose());
      t.accum(b, A * G);
    } else if (!trans_a && trans_b) {
      t.accum(a, G * B);
      t.accum(b, G.transpose() * A);
    } else {
      t.accum(a, B.transpose() * G.transpose());
      t.accum(b, G.transpose() * A.transpose());
    }
  });
  return out;
}

Var Tape::add(Var a, Var b) {
  check_same_shape(value(a), value(b), "add");
  Var out = emit(value(a) + value(b), needs_grad(a) || needs_grad(b));
  set_backprop(out, [a, b, out](Tape& t) {
    t.accum(a, t.grad(out));
    t.accum(b, t.grad(out));
  });
  return out;
}

Var Tape::sub(Var a, Var b) {
  check_same_shape(value(a), value(b), "sub");
  Var out = emit(value(a) - value(b), needs_grad(a) || needs_grad(b));
  set_backprop(out, [a, b, out](Tape& t) {
    t.accum(a, t.grad(out));
    t.accum(b, -t.grad(out));
  });
  return out;
}

Var Tape::mul(Var a, Var b) {
  check_same_shape(value(a), value(b), "mul");
  Var out = emit(value(a).cwiseProduct(value(b)), needs_grad(a) || needs_grad(b));
  set_backprop(out, [a, b, out](Tape& t) {
    t.accum(a, t.grad(out).cwiseProduct(t.value(b)));
    t.accum(b, t.grad(out).cwiseProduct(t.value(a)));
  });
  return out;
}

Var Tape::add_rowvec(Var a, Var v) {
  const Mat& A = value(a);
  const Mat& V = value(v);
  if (V.rows() != 1 || V.cols() != A.cols()) {
    throw ValidationError("add_rowvec: expected 1x" + std::to_string(A.cols()));
  }
  Var out = emit(A.rowwise() + V.row(0), needs_grad(a) || needs_grad(v));
  set_backprop(out, [a, v, out](Tape& t) {
    t.accum(a, t.grad(out));
    t.accum(v, t.grad(out).colwise().sum());
  });
  return out;
}

Var Tape::sub_rowvec(Var a, Var v) {
  const Mat& A = value(a);
  const Mat& V = value(v);
  if (V.rows() != 1 || V.cols() != A.cols()) {
    throw ValidationError("sub_rowvec: expected 1x" + std::to_string(A.cols()));
  }
  Var out = emit(A.rowwise() - V.row(0), needs_grad(a) || needs_grad(v));
  set_backprop(out, [a, v, out](Tape& t) {
    t.accum(a, t.grad(out));
    t.accum(v, Mat(-t.grad(out).colwise().sum()));
  });
  return out;
}

Var Tape::div_rowvec(Var a, Var v) {
  const Mat& A = value(a);
  const Mat& V = value(v);
  if (V.rows() != 1 || V.cols() != A.cols()) {
    throw ValidationError("div_rowvec: expected 1x" + std::to_string(A.cols()));
  }
  Mat c = (A.array().rowwise() / V.row(0).array()).matrix();
  Var out = emit(std::move(c), needs_grad(a) || needs_grad(v));
  set_backprop(out, [a, v, out](Tape& t) {
    const Mat& G = t.grad(out);
    const Mat& A = t.value(a);
    const Mat& V = t.value(v);
    t.accum(a, (G.array().rowwise() / V.row(0).array()).matrix());
    Mat dv = -(G.cwiseProduct(A)).colwise().sum();
    dv.array() /= V.row(0).array() * V.row(0).array();
    t.accum(v, dv);
  });
  return out;
}

Var Tape::add_colvec(Var a, Var v) {
  const Mat& A = value(a);
  const Mat& V = value(v);
  if (V.cols() != 1 || V.rows() != A.rows()) {
    throw ValidationError("add_colvec: expected " + std::to_string(A.rows()) + "x1");
  }
  Var out = emit(A.colwise() + V.col(0), needs_grad(a) || needs_grad(v));
  set_backprop(out, [a, v, out](Tape& t) {
    t.accum(a, t.grad(out));
    t.accum(v, t.grad(out).rowwise().sum());
  });
  return out;
}

Var Tape::mul_colvec(Var a, Var v) {
  const Mat& A = value(a);
  const Mat& V = value(v);
  if (V.cols() != 1 || V.rows() != A.rows()) {
    throw ValidationError("mul_colvec: expected " + std::to_string(A.rows()) + "x1");
  }
  Mat c = (A.array().colwise() * V.col(0).array()).matrix();
  Var out = emit(std::move(c), needs_grad(a) || needs_grad(v));
  set_backprop(out, [a, v, out](Tape& t) {
    const Mat& G = t.grad(out);
    t.accum(a, (G.array().colwise() * t.value(v).col(0).array()).matrix());
    t.accum(v, G.cwiseProduct(t.value(a)).rowwise().sum());
  });
  return out;
}

Var Tape::affine(Var a, double scale, double shift) {
  Mat c = (scale * value(a).array() + shift).matrix();
  Var out = emit(std::move(c), needs_grad(a));
  set_backprop(out, [a, scale, out](Tape& t) { t.accum(a, Mat(scale * t.grad(out))); });
  return out;
}

Var Tape::pow_const(Var a, double exponent) {
  Mat c = value(a).array().pow(exponent).matrix();
  Var out = emit(std::move(c), needs_grad(a));
  set_backprop(out, [a, exponent, out](Tape& t) {
    Mat d = (exponent * t.value(a).array().pow(exponent - 1.0)).matrix();
    t.accum(a, t.grad(out).cwiseProduct(d));
  });
  return out;
}

Var Tape::log(Var a) {
  Mat c = value(a).array().log().matrix();
  Var out = emit(std::move(c), needs_grad(a));
  set_backprop(out, [a, out](Tape& t) {
    t.accum(a, (t.grad(out).array() / t.value(a).array()).matrix());
  });
  return out;
}

Var Tape::clamp_min(Var a, double lo) {
  Mat c = value(a).array().max(lo).matrix();
  Var out = emit(std::move(c), needs_grad(a));
  set_backprop(out, [a, lo, out](Tape& t) {
    Mat pass = (t.value(a).array() > lo).cast<double>().matrix();
    t.accum(a, t.grad(out).cwiseProduct(pass));
  });
  return out;
}

Var Tape::tanh(Var a) {
  Mat c = value(a).array().tanh().matrix();
  Var out = emit(std::move(c), needs_grad(a));
  set_backprop(out, [a, out](Tape& t) {
    const Mat& C = t.value(out);
    t.accum(a, (t.grad(out).array() * (1.0 - C.array() * C.array())).matrix());
  });
  return out;
}

Var Tape::sigmoid(Var a) {
  Mat c = (1.0 / (1.0 + (-value(a).array()).exp())).matrix();
  Var out = emit(std::move(c), needs_grad(a));
  set_backprop(out, [a, out](Tape& t) {
    const Mat& C = t.value(out);
    t.accum(a, (t.grad(out).array() * C.array() * (1.0 - C.array())).matrix());
  });
  return out;
}

Var Tape::leaky_relu(Var a, double slope) {
  const Mat& A = value(a);
  Mat c = A.array().max(slope * A.array()).matrix();
  Var out = emit(std::move(c), needs_grad(a));
  set_backprop(out, [a, slope, out](Tape& t) {
    const Mat& G = t.grad(out);
    Mat d = ((t.value(a).array() > 0.0).cast<double>() * (1.0 - slope) + slope).matrix();
    t.accum(a, G.cwiseProduct(d));
  });
  return out;
}

Var Tape::transpose(Var a) {
  Mat c = value(a).transpose();
  Var out = emit(std::move(c), needs_grad(a));
  set_backprop(out, [a, out](Tape& t) { t.accum(a, t.grad(out).transpose()); });
  return out;
}

Var Tape::row_select(Var a, std::vector<int> rows) {
  const Mat& A = value(a);
  Mat c(static_cast<Eigen::Index>(rows.size()), A.cols());
  for (size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] < 0 || rows[k] >= A.rows()) throw ValidationError("row_select: index out of range");
    c.row(static_cast<Eigen::Index>(k)) = A.row(rows[k]);
  }
  Var out = emit(std::move(c), needs_grad(a));
  set_backprop(out, [a, rows = std::move(rows), out](Tape& t) {
    if (!t.needs_grad(a)) return;
    const Mat& G = t.grad(out);
    Mat d = Mat::Zero(t.value(a).rows(), t.value(a).cols());
    for (size_t k = 0; k < rows.size(); ++k) d.row(rows[k]) += G.row(static_cast<Eigen::Index>(k));
    t.accum(a, d);
  });
  return out;
}

Var Tape::concat_cols(Var a, Var b) {
  const Mat& A = value(a);
  const Mat& B = value(b);
  if (A.rows() != B.rows()) throw ValidationError("concat_cols: row count mismatch");
  Mat c(A.rows(), A.cols() + B.cols());
  c.leftCols(A.cols()) = A;
  c.rightCols(B.cols()) = B;
  Var out = emit(std::move(c), needs_grad(a) || needs_grad(b));
  set_backprop(out, [a, b, out](Tape& t) {
    const Mat& G = t.grad(out);
    const auto ac = t.value(a).cols();
    t.accum(a, G.leftCols(ac));
    t.accum(b, G.rightCols(G.cols() - ac));
  });
  return out;
}

Var Tape::row_sum(Var a) {
  Var out = emit(value(a).rowwise().sum(), needs_grad(a));
  set_backprop(out, [a, out](Tape& t) {
    t.accum(a, Mat(t.grad(out) * Mat::Ones(1, t.value(a).cols())));
  });
  return out;
}

Var Tape::col_sum(Var a) {
  Var out = emit(value(a).colwise().sum(), needs_grad(a));
  set_backprop(out, [a, out](Tape& t) {
    t.accum(a, Mat(Mat::Ones(t.value(a).rows(), 1) * t.grad(out)));
  });
  return out;
}

Var Tape::sum_all(Var a) {
  Mat c(1, 1);
  c(0, 0) = value(a).sum();
  Var out = emit(std::move(c), needs_grad(a));
  set_backprop(out, [a, out](Tape& t) {
    const double g = t.grad(out)(0, 0);
    t.accum(a, Mat(Mat::Constant(t.value(a).rows(), t.value(a).cols(), g)));
  });
  return out;
}

Var Tape::mask_rows(Var x, Var token, std::vector<int> rows) {
  const Mat& X = value(x);
  const Mat& T = value(token);
  if (T.rows() != 1 || T.cols() != X.cols()) {
    throw ValidationError("mask_rows: token must be 1x" + std::to_string(X.cols()));
  }
  Mat c = X;
  for (int r : rows) {
    if (r < 0 || r >= X.rows()) throw ValidationError("mask_rows: index out of range");
    c.row(r) = T.row(0);
  }
  Var out = emit(std::move(c), needs_grad(x) || needs_grad(token));
  set_backprop(out, [x, token, rows = std::move(rows), out](Tape& t) {
    const Mat& G = t.grad(out);
    if (t.needs_grad(token)) {
      Mat dt = Mat::Zero(1, G.cols());
      for (int r : rows) dt += G.row(r);
      t.accum(token, dt);
    }
    if (t.needs_grad(x)) {
      Mat dx = G;
      for (int r : rows) dx.row(r).setZero();
      t.accum(x, dx);
    }
  });
  return out;
}

Var Tape::mean_aggregate(Var m, const RelationStructure* rel) {
  const Mat& M = value(m);
  if (M.rows() != rel->num_nodes) throw ValidationError("mean_aggregate: row count mismatch");
  Mat c = Mat::Zero(M.rows(), M.cols());
  for (int i = 0; i < rel->num_nodes; ++i) {
    const int deg = rel->indeg[i];
    if (deg == 0) continue;
    for (int e = rel->offsets[i]; e < rel->offsets[i + 1]; ++e) c.row(i) += M.row(rel->in_src[e]);
    c.row(i) /= static_cast<double>(deg);
  }
  Var out = emit(std::move(c), needs_grad(m));
  set_backprop(out, [m, rel, out](Tape& t) {
    if (!t.needs_grad(m)) return;
    const Mat& G = t.grad(out);
    Mat d = Mat::Zero(G.rows(), G.cols());
    for (int i = 0; i < rel->num_nodes; ++i) {
      const int deg = rel->indeg[i];
      if (deg == 0) continue;
      const double inv = 1.0 / static_cast<double>(deg);
      for (int e = rel->offsets[i]; e < rel->offsets[i + 1]; ++e) d.row(rel->in_src[e]) += inv * G.row(i);
    }
    t.accum(m, d);
  });
  return out;
}

Var Tape::attention_aggregate(Var m, Var s_dst, Var s_src, const RelationStructure* rel, double slope) {
  const Mat& M = value(m);
  const Mat& Sd = value(s_dst);
  const Mat& Ss = value(s_src);
  if (M.rows() != rel->num_nodes || Sd.rows() != rel->num_nodes || Ss.rows() != rel->num_nodes ||
      Sd.cols() != 1 || Ss.cols() != 1) {
    throw ValidationError("attention_aggregate: shape mismatch");
  }
  const size_t num_edges = rel->in_src.size();
  auto alpha = std::make_shared<std::vector<double>>(num_edges, 0.0);
  auto positive = std::make_shared<std::vector<char>>(num_edges, 0);

  Mat c = Mat::Zero(M.rows(), M.cols());
  for (int i = 0; i < rel->num_nodes; ++i) {
    const int begin = rel->offsets[i];
    const int end = rel->offsets[i + 1];
    if (begin == end) continue;
    double max_score = -std::numeric_limits<double>::infinity();
    for (int e = begin; e < end; ++e) {
      const double z = Sd(i, 0) + Ss(rel->in_src[e], 0);
      (*positive)[e] = z > 0.0 ? 1 : 0;
      (*alpha)[e] = z > 0.0 ? z : slope * z;  // raw activated scores first
      max_score = std::max(max_score, (*alpha)[e]);
    }
    double denom = 0.0;
    for (int e = begin; e < end; ++e) {
      (*alpha)[e] = std::exp((*alpha)[e] - max_score);
      denom += (*alpha)[e];
    }
    for (int e = begin; e < end; ++e) {
      (*alpha)[e] /= denom;
      c.row(i) += (*alpha)[e] * M.row(rel->in_src[e]);
    }
  }
  Var out = emit(std::move(c), needs_grad(m) || needs_grad(s_dst) || needs_grad(s_src));
  set_backprop(out, [m, s_dst, s_src, rel, slope, alpha, positive, out](Tape& t) {
    const Mat& G = t.grad(out);
    const Mat& M = t.value(m);
    Mat dm = Mat::Zero(M.rows(), M.cols());
    Mat dsd = Mat::Zero(M.rows(), 1);
    Mat dss = Mat::Zero(M.rows(), 1);
    for (int i = 0; i < rel->num_nodes; ++i) {
      const int begin = rel->offsets[i];
      const int end = rel->offsets[i + 1];
      if (begin == end) continue;
      double dot_sum = 0.0;  // sum_e alpha_e * dalpha_e for the softmax Jacobian
      std::vector<double> dalpha(end - begin);
      for (int e = begin; e < end; ++e) {
        const int j = rel->in_src[e];
        dalpha[e - begin] = G.row(i).dot(M.row(j));
        dm.row(j) += (*alpha)[e] * G.row(i);
        dot_sum += (*alpha)[e] * dalpha[e - begin];
      }
      for (int e = begin; e < end; ++e) {
        const double de = (*alpha)[e] * (dalpha[e - begin] - dot_sum);
        const double dz = de * ((*positive)[e] ? 1.0 : slope);
        dsd(i, 0) += dz;
        dss(rel->in_src[e], 0) += dz;
      }
    }
    t.accum(m, dm);
    t.accum(s_dst, dsd);
    t.accum(s_src, dss);
  });
  return out;
}

void Tape::backward(Var output) {
  Node& last = nodes_[output.id];
  if (last.value.rows() != 1 || last.value.cols() != 1) {
    throw ValidationError("backward: output must be a 1x1 scalar");
  }
  if (!last.requires_grad) return;
  last.grad(0, 0) = 1.0;
  for (int i = output.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.requires_grad && n.backprop) n.backprop(*this);
  }
}

void Tape::clear() { nodes_.clear(); }

}  // namespace bothp::ad
