#pragma once

#include "core/pretext.hpp"

namespace bothp {

struct FusionParams {
  Mat w;  // d_h x d_a
  Mat b;  // 1 x d_a
  Mat q;  // d_a x 1

  bool present() const { return w.size() > 0; }
};

enum class InitFrom { Checkpoint, Random };

struct FinetuneConfig {
  double l2_lambda = 1e-5;
  double learning_rate = 5e-3;
  int epochs = 200;
  int patience = 30;       // early stop when val F1 stalls this long; <= 0 disables
  int attention_dim = -1;  // -1: d_h
  InitFrom init_from = InitFrom::Checkpoint;
  EncoderArm arm = EncoderArm::Dual;
  uint64_t seed = 1;
};

struct EpochTraceRow {
  int epoch = 0;  // 1-based
  double loss = 0.0;
  double val_f1 = -1.0;  // -1 when there is no validation split
};

struct TrainedModel {
  EncoderConfig encoder_config;
  FinetuneConfig config;
  GraphAwareParams graph_aware;
  GraphAgnosticParams graph_agnostic;
  FusionParams fusion;
  Mat head_w;  // d_h x 1
  Mat head_b;  // 1 x 1
  std::vector<EpochTraceRow> trace;
  int best_epoch = 0;

  bool has_graph_aware() const { return !graph_aware.layers.empty(); }
  bool has_graph_agnostic() const { return graph_agnostic.w0.size() > 0; }
};

struct FusionVars {
  ad::Var w, b, q;
};

FusionVars lift(FusionParams& p, Lifter& lift);

// Attention fusion: alpha-weighted convex combination of the two embeddings.
ad::Var fuse(ad::Tape& t, ad::Var hg, ad::Var hl, const FusionVars& p);
Mat fuse(const Mat& hg, const Mat& hl, const FusionParams& p);

// Per-row fusion weights (alpha_g, alpha_l), for inspection and tests.
std::pair<Vec, Vec> fusion_weights(const Mat& hg, const Mat& hl, const FusionParams& p);

// Clean forward -> fuse -> linear head -> logistic; probability per node.
Vec predict(const TrainedModel& model, const SocialGraph& g);

// BCE over the given labels plus lambda * sum of squared parameter entries.
// y_prob must already be in (0, 1) after the 1e-7 clipping convention.
double loss_finetune(const Vec& y_prob, const std::vector<int>& y,
                     const std::vector<const Mat*>& theta, double lambda);

// checkpoint may be null only when cfg.init_from == Random.
TrainedModel finetune(const SocialGraph& g, const PretrainCheckpoint* checkpoint,
                      const FinetuneConfig& cfg, const EncoderConfig& enc_cfg);

}  // namespace bothp
