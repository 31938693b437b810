#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bothp {

MetricsReport compute_metrics(const std::vector<int>& predicted, const std::vector<int>& actual) {
  if (predicted.size() != actual.size()) throw ValidationError("compute_metrics: length mismatch");
  MetricsReport r;
  for (size_t i = 0; i < predicted.size(); ++i) {
    if (actual[i] != 0 && actual[i] != 1) {
      throw ValidationError("compute_metrics: label at " + std::to_string(i) + " is not binary");
    }
    if (predicted[i] == 1) {
      actual[i] == 1 ? ++r.tp : ++r.fp;
    } else {
      actual[i] == 1 ? ++r.fn : ++r.tn;
    }
  }
  const long long total = r.tp + r.fp + r.fn + r.tn;
  r.accuracy = total > 0 ? static_cast<double>(r.tp + r.tn) / total : 0.0;
  if (r.tp + r.fp > 0) {
    r.precision = static_cast<double>(r.tp) / (r.tp + r.fp);
  } else {
    r.precision_degenerate = true;
  }
  if (r.tp + r.fn > 0) {
    r.recall = static_cast<double>(r.tp) / (r.tp + r.fn);
  } else {
    r.recall_degenerate = true;
  }
  if (r.precision + r.recall > 0.0) {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  } else {
    r.f1_degenerate = true;
  }
  return r;
}

namespace {

// Average ranks of |d| (1-based), stable under ties.
std::vector<double> average_ranks(const std::vector<double>& abs_d) {
  const int n = static_cast<int>(abs_d.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return abs_d[a] < abs_d[b]; });
  std::vector<double> ranks(n, 0.0);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && abs_d[order[j + 1]] == abs_d[order[i]]) ++j;
    const double avg = (i + j + 2) / 2.0;  // mean of 1-based positions i+1 .. j+1
    for (int k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

// Exact P(W+ >= observed) by dynamic programming over doubled ranks
// (average ranks are half-integers, so 2r is integral).
double exact_p_greater(const std::vector<double>& ranks, double w_plus) {
  std::vector<long long> r2(ranks.size());
  long long total = 0;
  for (size_t i = 0; i < ranks.size(); ++i) {
    r2[i] = std::llround(2.0 * ranks[i]);
    total += r2[i];
  }
  // count[s] = number of sign assignments whose positive rank sum (doubled) is s
  std::vector<double> count(total + 1, 0.0);
  count[0] = 1.0;
  for (long long r : r2) {
    for (long long s = total; s >= r; --s) count[s] += count[s - r];
  }
  const long long obs = std::llround(2.0 * w_plus);
  double tail = 0.0;
  for (long long s = obs; s <= total; ++s) tail += count[s];
  return tail / std::pow(2.0, static_cast<double>(ranks.size()));
}

double normal_tail_p(const std::vector<double>& ranks, double w_plus) {
  const double n = static_cast<double>(ranks.size());
  const double mean = n * (n + 1.0) / 4.0;
  double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
  // tie correction: subtract sum(t^3 - t)/48 per tied group
  std::vector<double> sorted(ranks);
  std::sort(sorted.begin(), sorted.end());
  size_t i = 0;
  while (i < sorted.size()) {
    size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    var -= (t * t * t - t) / 48.0;
    i = j + 1;
  }
  if (var <= 0.0) return 1.0;
  const double z = (w_plus - mean - 0.5) / std::sqrt(var);
  return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank_greater(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw ValidationError("wilcoxon: length mismatch");
  std::vector<double> diffs;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double d = a(i) - b(i);
    if (d != 0.0) diffs.push_back(d);
  }
  WilcoxonResult res;
  res.n_used = static_cast<int>(diffs.size());
  if (diffs.empty()) return res;  // no evidence: p = 1

  std::vector<double> abs_d(diffs.size());
  for (size_t i = 0; i < diffs.size(); ++i) abs_d[i] = std::abs(diffs[i]);
  const std::vector<double> ranks = average_ranks(abs_d);
  double w_plus = 0.0;
  for (size_t i = 0; i < diffs.size(); ++i) {
    if (diffs[i] > 0.0) w_plus += ranks[i];
  }
  res.statistic = w_plus;
  if (res.n_used <= 20) {
    res.p_value = exact_p_greater(ranks, w_plus);
  } else {
    res.p_value = normal_tail_p(ranks, w_plus);
    res.approximate = true;
  }
  return res;
}

StdComparison compare_embedding_std(const Mat& h_g, const Mat& h_l) {
  if (h_g.cols() != h_l.cols()) throw ValidationError("compare_embedding_std: dimension mismatch");
  if (h_g.cols() < 5) throw ValidationError("compare_embedding_std: need hidden_dim >= 5");
  auto col_std = [](const Mat& m) {
    Vec out(m.cols());
    const double n = static_cast<double>(m.rows());
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double mean = m.col(j).mean();
      const double ss = (m.col(j).array() - mean).square().sum();
      out(j) = n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    }
    return out;
  };
  StdComparison cmp;
  cmp.sigma_g = col_std(h_g);
  cmp.sigma_l = col_std(h_l);
  const WilcoxonResult w = wilcoxon_signed_rank_greater(cmp.sigma_l, cmp.sigma_g);
  cmp.wilcoxon_statistic = w.statistic;
  cmp.p_value = w.p_value;
  return cmp;
}

}  // namespace bothp
