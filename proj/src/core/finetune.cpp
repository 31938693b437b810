#include "core/finetune.hpp"

#include "core/optim.hpp"

#include <cmath>

namespace bothp {

namespace {

constexpr double kProbEps = 1e-7;

Mat uniform_fan_in_mat(int rows, int cols, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-bound, bound);
  }
  return m;
}

// Clamp probabilities into [eps, 1 - eps] on the tape.
ad::Var clip_probs(ad::Tape& t, ad::Var p) {
  ad::Var lo = t.clamp_min(p, kProbEps);
  return t.affine(t.clamp_min(t.affine(lo, -1.0, 1.0), kProbEps), -1.0, 1.0);
}

double f1_of(const std::vector<int>& pred, const std::vector<int>& truth) {
  long long tp = 0, fp = 0, fn = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == 1 && truth[i] == 1) ++tp;
    else if (pred[i] == 1 && truth[i] == 0) ++fp;
    else if (pred[i] == 0 && truth[i] == 1) ++fn;
  }
  const double denom = 2.0 * tp + fp + fn;
  return denom > 0.0 ? 2.0 * tp / denom : 0.0;
}

}  // namespace

FusionVars lift(FusionParams& p, Lifter& L) { return FusionVars{L(p.w), L(p.b), L(p.q)}; }

ad::Var fuse(ad::Tape& t, ad::Var hg, ad::Var hl, const FusionVars& p) {
  const Mat& a = t.value(hg);
  const Mat& b = t.value(hl);
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ValidationError("fuse: shape mismatch");
  auto score = [&](ad::Var h) {
    return t.matmul(t.tanh(t.add_rowvec(t.matmul(h, p.w), p.b)), p.q);  // N x 1
  };
  ad::Var alpha_g = t.sigmoid(t.sub(score(hg), score(hl)));  // two-way softmax
  ad::Var alpha_l = t.affine(alpha_g, -1.0, 1.0);
  return t.add(t.mul_colvec(hg, alpha_g), t.mul_colvec(hl, alpha_l));
}

Mat fuse(const Mat& hg, const Mat& hl, const FusionParams& p) {
  ad::Tape t;
  Lifter L(t);
  FusionVars pv = lift(const_cast<FusionParams&>(p), L);
  return t.value(fuse(t, t.constant(hg), t.constant(hl), pv));
}

std::pair<Vec, Vec> fusion_weights(const Mat& hg, const Mat& hl, const FusionParams& p) {
  auto score = [&](const Mat& h) -> Vec {
    return ((h * p.w).rowwise() + p.b.row(0)).array().tanh().matrix() * p.q;
  };
  const Vec sg = score(hg);
  const Vec sl = score(hl);
  Vec ag(sg.size()), al(sg.size());
  for (Eigen::Index i = 0; i < sg.size(); ++i) {
    ag(i) = 1.0 / (1.0 + std::exp(sl(i) - sg(i)));
    al(i) = 1.0 - ag(i);
  }
  return {ag, al};
}

Vec predict(const TrainedModel& model, const SocialGraph& g) {
  if (g.feature_dim() != model.encoder_config.feature_dim) {
    throw ValidationError("predict: feature dim mismatch");
  }
  const Mat feats = g.features_as_double();
  Mat u;
  if (model.has_graph_aware() && model.has_graph_agnostic()) {
    const Mat hg = graph_aware_forward(model.graph_aware, model.encoder_config, g, feats);
    const Mat hl = graph_agnostic_forward(model.graph_agnostic, model.encoder_config, feats);
    u = fuse(hg, hl, model.fusion);
  } else if (model.has_graph_aware()) {
    u = graph_aware_forward(model.graph_aware, model.encoder_config, g, feats);
  } else {
    u = graph_agnostic_forward(model.graph_agnostic, model.encoder_config, feats);
  }
  const Vec logits = (u * model.head_w).col(0).array() + model.head_b(0, 0);
  Vec probs(logits.size());
  for (Eigen::Index i = 0; i < logits.size(); ++i) probs(i) = 1.0 / (1.0 + std::exp(-logits(i)));
  return probs;
}

double loss_finetune(const Vec& y_prob, const std::vector<int>& y,
                     const std::vector<const Mat*>& theta, double lambda) {
  if (static_cast<size_t>(y_prob.size()) != y.size()) throw ValidationError("loss_finetune: length mismatch");
  double bce = 0.0;
  for (Eigen::Index i = 0; i < y_prob.size(); ++i) {
    const double p = std::min(std::max(y_prob(i), kProbEps), 1.0 - kProbEps);
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("loss_finetune: probability outside (0, 1)");
    bce -= y[i] == 1 ? std::log(p) : std::log(1.0 - p);
  }
  bce /= static_cast<double>(y.size());
  double reg = 0.0;
  for (const Mat* w : theta) reg += w->squaredNorm();
  return bce + lambda * reg;
}

TrainedModel finetune(const SocialGraph& g, const PretrainCheckpoint* checkpoint,
                      const FinetuneConfig& cfg, const EncoderConfig& enc_cfg) {
  check_config(enc_cfg);
  {
    const auto violations = validate(g);
    if (!violations.empty()) throw ValidationError("finetune: invalid graph: " + violations.front());
  }
  if (g.train_idx.empty()) throw ValidationError("finetune: empty train split");
  for (int i : g.train_idx) {
    if (g.labels[i] == -1) throw ValidationError("finetune: unlabeled train node " + std::to_string(i));
  }
  if (cfg.epochs < 1) throw ValidationError("finetune: epochs must be >= 1");
  if (cfg.l2_lambda < 0.0) throw ValidationError("finetune: l2_lambda must be >= 0");

  const bool has_aware = cfg.arm != EncoderArm::GraphAgnosticOnly;
  const bool has_agnostic = cfg.arm != EncoderArm::GraphAwareOnly;

  TrainedModel model;
  model.encoder_config = enc_cfg;
  model.config = cfg;

  Rng rng(cfg.seed);
  if (cfg.init_from == InitFrom::Checkpoint) {
    if (!checkpoint) throw ValidationError("finetune: checkpoint required but not provided");
    if (has_aware && !checkpoint->has_graph_aware()) {
      throw ValidationError("finetune: checkpoint is missing the graph-aware encoder");
    }
    if (has_agnostic && !checkpoint->has_graph_agnostic()) {
      throw ValidationError("finetune: checkpoint is missing the graph-agnostic encoder");
    }
    if (checkpoint->encoder_config.feature_dim != enc_cfg.feature_dim ||
        checkpoint->encoder_config.hidden_dim != enc_cfg.hidden_dim) {
      throw ValidationError("finetune: checkpoint dimensions do not match encoder config");
    }
    if (has_aware) model.graph_aware = checkpoint->graph_aware;
    if (has_agnostic) model.graph_agnostic = checkpoint->graph_agnostic;
  } else {
    init_params(enc_cfg, rng.fork(0).next(), has_aware ? &model.graph_aware : nullptr,
                has_agnostic ? &model.graph_agnostic : nullptr, nullptr);
  }

  // Downstream decoder (fusion + head) always starts fresh.
  Rng head_rng = rng.fork(1);
  const int dh = enc_cfg.hidden_dim;
  const int da = cfg.attention_dim > 0 ? cfg.attention_dim : dh;
  if (has_aware && has_agnostic) {
    model.fusion.w = uniform_fan_in_mat(dh, da, head_rng);
    model.fusion.b = Mat::Zero(1, da);
    model.fusion.q = uniform_fan_in_mat(da, 1, head_rng);
  }
  model.head_w = uniform_fan_in_mat(dh, 1, head_rng);
  model.head_b = Mat::Zero(1, 1);

  const Mat feats = g.features_as_double();
  const GraphContext ctx = GraphContext::build(g);
  Adam opt(cfg.learning_rate);

  std::vector<int> y_train(g.train_idx.size());
  for (size_t k = 0; k < g.train_idx.size(); ++k) y_train[k] = g.labels[g.train_idx[k]];
  Mat y_col(static_cast<Eigen::Index>(y_train.size()), 1);
  Mat one_minus_y(static_cast<Eigen::Index>(y_train.size()), 1);
  for (size_t k = 0; k < y_train.size(); ++k) {
    y_col(static_cast<Eigen::Index>(k), 0) = y_train[k];
    one_minus_y(static_cast<Eigen::Index>(k), 0) = 1.0 - y_train[k];
  }

  std::vector<int> y_val(g.val_idx.size());
  for (size_t k = 0; k < g.val_idx.size(); ++k) y_val[k] = g.labels[g.val_idx[k]];
  const bool has_val = !g.val_idx.empty();

  struct Snapshot {
    GraphAwareParams aware;
    GraphAgnosticParams agnostic;
    FusionParams fusion;
    Mat head_w, head_b;
  };
  Snapshot best;
  double best_f1 = -1.0;
  int best_epoch = 0;
  int stall = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    ad::Tape tape;
    Lifter lifter(tape);
    GraphAwareVars aware_vars;
    GraphAgnosticVars agnostic_vars;
    FusionVars fusion_vars;
    if (has_aware) aware_vars = lift(model.graph_aware, lifter);
    if (has_agnostic) agnostic_vars = lift(model.graph_agnostic, lifter);
    if (model.fusion.present()) fusion_vars = lift(model.fusion, lifter);
    ad::Var head_w = lifter(model.head_w);
    ad::Var head_b = lifter(model.head_b);

    ad::Var feats_const = tape.constant(feats);
    ad::Var u;
    if (has_aware && has_agnostic) {
      ad::Var hg = graph_aware_forward(tape, aware_vars, enc_cfg, ctx, feats_const);
      ad::Var hl = graph_agnostic_forward(tape, agnostic_vars, enc_cfg, feats_const);
      u = fuse(tape, hg, hl, fusion_vars);
    } else if (has_aware) {
      u = graph_aware_forward(tape, aware_vars, enc_cfg, ctx, feats_const);
    } else {
      u = graph_agnostic_forward(tape, agnostic_vars, enc_cfg, feats_const);
    }
    ad::Var logits = tape.add_rowvec(tape.matmul(u, head_w), head_b);
    ad::Var probs = tape.sigmoid(logits);

    ad::Var p_train = clip_probs(tape, tape.row_select(probs, g.train_idx));
    ad::Var ll = tape.add(tape.mul(tape.constant(y_col), tape.log(p_train)),
                          tape.mul(tape.constant(one_minus_y), tape.log(tape.affine(p_train, -1.0, 1.0))));
    ad::Var loss = tape.affine(tape.sum_all(ll), -1.0 / static_cast<double>(y_train.size()), 0.0);
    if (cfg.l2_lambda > 0.0) {
      ad::Var reg;
      for (const ad::Var& v : lifter.vars) {
        ad::Var sq = tape.sum_all(tape.mul(v, v));
        reg = reg.valid() ? tape.add(reg, sq) : sq;
      }
      loss = tape.add(loss, tape.affine(reg, cfg.l2_lambda, 0.0));
    }

    EpochTraceRow row;
    row.epoch = epoch;
    row.loss = tape.scalar(loss);
    if (!std::isfinite(row.loss)) {
      throw TrainingError("finetune: non-finite loss at epoch " + std::to_string(epoch));
    }

    tape.backward(loss);
    std::vector<Mat> grads;
    grads.reserve(lifter.vars.size());
    for (const ad::Var& v : lifter.vars) grads.push_back(tape.grad(v));
    opt.step(lifter.tensors, grads);

    if (has_val) {
      const Vec val_probs = predict(model, g);
      std::vector<int> pred(g.val_idx.size());
      for (size_t k = 0; k < g.val_idx.size(); ++k) pred[k] = val_probs(g.val_idx[k]) > 0.5 ? 1 : 0;
      row.val_f1 = f1_of(pred, y_val);
      if (row.val_f1 > best_f1) {
        best_f1 = row.val_f1;
        best_epoch = epoch;
        best = Snapshot{model.graph_aware, model.graph_agnostic, model.fusion, model.head_w, model.head_b};
        stall = 0;
      } else {
        ++stall;
      }
    }
    model.trace.push_back(row);
    if (has_val && cfg.patience > 0 && stall >= cfg.patience) break;
  }

  if (has_val && best_epoch > 0) {
    model.graph_aware = std::move(best.aware);
    model.graph_agnostic = std::move(best.agnostic);
    model.fusion = std::move(best.fusion);
    model.head_w = std::move(best.head_w);
    model.head_b = std::move(best.head_b);
    model.best_epoch = best_epoch;
  } else {
    model.best_epoch = static_cast<int>(model.trace.size());
  }
  return model;
}

}  // namespace bothp
