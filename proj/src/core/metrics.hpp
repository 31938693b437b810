#pragma once

#include "core/common.hpp"

namespace bothp {

struct MetricsReport {
  double accuracy = 0.0, f1 = 0.0, precision = 0.0, recall = 0.0;
  long long tp = 0, fp = 0, fn = 0, tn = 0;
  // Set when a zero denominator forced the metric to 0.
  bool precision_degenerate = false, recall_degenerate = false, f1_degenerate = false;
};

// Bot (label 1) is the positive class.
MetricsReport compute_metrics(const std::vector<int>& predicted, const std::vector<int>& actual);

struct WilcoxonResult {
  double statistic = 0.0;  // W+, sum of ranks of positive differences
  double p_value = 1.0;    // one-sided, H1: a > b
  int n_used = 0;          // pairs left after dropping zero differences
  bool approximate = false;
};

// One-sided Wilcoxon signed-rank test of H1: a > b on paired samples.
// Zero differences dropped, tied |d| get average ranks; exact distribution
// (dynamic program over rank sums) for n <= 20, normal approximation with
// tie correction and continuity correction beyond.
WilcoxonResult wilcoxon_signed_rank_greater(const Vec& a, const Vec& b);

struct StdComparison {
  Vec sigma_g, sigma_l;  // per-dimension standard deviations
  double wilcoxon_statistic = 0.0;
  double p_value = 1.0;  // one-sided, H1: sigma_l > sigma_g
};

// Per-dimension stds of the two embedding matrices plus the paired test.
StdComparison compare_embedding_std(const Mat& h_g, const Mat& h_l);

}  // namespace bothp
