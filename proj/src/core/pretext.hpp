#pragma once

#include "core/encoder.hpp"
#include "core/kmeans.hpp"

namespace bothp {

struct MaskSchedule {
  double p_start = 0.3;
  double p_end = 0.7;
  int total_epochs = 1;
};

// Linear ramp from p_start to p_end; epoch is 0-based.
double mask_rate_at(const MaskSchedule& s, int epoch);

struct PrototypeSet {
  Mat centers;  // K x embed_dim (2*d_h for the dual arm)
  double alpha = 1.0;
  int update_interval = 1;
  bool initialized = false;
  bool degenerate_init = false;

  int count() const { return static_cast<int>(centers.rows()); }
};

struct PretrainConfig {
  MaskSchedule schedule;  // total_epochs must equal epochs
  double dropout_p = 0.3;
  double w_neighbor = 1.0, w_ego = 1.0, w_semantic = 1.0, w_cluster = 1.0;
  int warmup_epochs = -1;  // -1: 10% of epochs
  double learning_rate = 2e-3;
  int epochs = 100;
  int num_prototypes = 8;
  double student_alpha = 1.0;
  int update_interval = 5;
  bool standardize_semantic = false;
  EncoderArm arm = EncoderArm::Dual;
  uint64_t seed = 1;

  int effective_warmup() const { return warmup_epochs >= 0 ? warmup_epochs : epochs / 10; }
};

// ---- masking / corruption ----

// floor(rate * n) distinct indices, at least 1 when rate > 0 and n >= 1.
std::vector<int> sample_mask_indices(int n, double rate, Rng& rng);

// Returns (masked matrix, masked row indices).
std::pair<Mat, std::vector<int>> apply_feature_mask(const Mat& x, double rate, const Mat& token, Rng& rng);

// Entry-wise corruption: each scalar zeroed with probability p, survivors unscaled.
Mat apply_feature_dropout(const Mat& x, double p, Rng& rng);

// ---- losses, plain (values) and taped (training) ----

double loss_neighbor_recon(const Mat& x, const Mat& z, const std::vector<int>& masked);
ad::Var loss_neighbor_recon(ad::Tape& t, const Mat& x, ad::Var z, const std::vector<int>& masked);

double loss_ego_recon(const Mat& x, const Mat& z);
ad::Var loss_ego_recon(ad::Tape& t, const Mat& x, ad::Var z);

double loss_semantic_consistency(const Mat& hg, const Mat& hl, bool standardize = false);
ad::Var loss_semantic_consistency(ad::Tape& t, ad::Var hg, ad::Var hl, bool standardize = false);

Mat soft_assignment(const Mat& h, const Mat& centers, double alpha);
Mat soft_assignment(const Mat& h, const PrototypeSet& protos);
ad::Var soft_assignment(ad::Tape& t, ad::Var h, ad::Var centers, double alpha);

// Sharpened self-training target; throws TrainingError on an empty soft cluster.
Mat target_distribution(const Mat& q);

double loss_cluster(const Mat& p, const Mat& q);
ad::Var loss_cluster(ad::Tape& t, const Mat& p, ad::Var q);

// K-means++ initialization of the prototype centers (Lloyd refined).
PrototypeSet kmeans_init(const Mat& h, int k, double alpha, int update_interval, Rng& rng);

// ---- the pre-training loop ----

struct LossTraceRow {
  int epoch = 0;  // 1-based
  double l_n = 0, l_e = 0, l_s = 0, l_c = 0, l_p = 0;
};

struct PretrainCheckpoint {
  EncoderConfig encoder_config;
  PretrainConfig config;
  GraphAwareParams graph_aware;        // empty for the graph-agnostic-only arm
  GraphAgnosticParams graph_agnostic;  // zero-sized for the graph-aware-only arm
  DecoderParams decoders;
  Mat mask_token;  // 1 x d
  PrototypeSet prototypes;
  std::vector<LossTraceRow> trace;
  std::vector<int> refresh_epochs;  // 1-based epochs where the target distribution was recomputed

  bool has_graph_aware() const { return !graph_aware.layers.empty(); }
  bool has_graph_agnostic() const { return graph_agnostic.w0.size() > 0; }
};

PretrainCheckpoint pretrain(const SocialGraph& g, const PretrainConfig& cfg,
                            const EncoderConfig& enc_cfg);

}  // namespace bothp
