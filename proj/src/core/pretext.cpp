#include "core/pretext.hpp"

#include "core/optim.hpp"

#include <cmath>

namespace bothp {

double mask_rate_at(const MaskSchedule& s, int epoch) {
  if (s.total_epochs < 1) throw ValidationError("MaskSchedule: total_epochs must be >= 1");
  if (!(0.0 <= s.p_start && s.p_start <= s.p_end && s.p_end <= 1.0)) {
    throw ValidationError("MaskSchedule: need 0 <= p_start <= p_end <= 1");
  }
  if (epoch < 0 || epoch >= s.total_epochs) {
    throw ValidationError("mask_rate_at: epoch " + std::to_string(epoch) + " outside [0, " +
                          std::to_string(s.total_epochs) + ")");
  }
  if (s.total_epochs == 1) return s.p_start;
  return s.p_start + (s.p_end - s.p_start) * static_cast<double>(epoch) /
                         static_cast<double>(s.total_epochs - 1);
}

std::vector<int> sample_mask_indices(int n, double rate, Rng& rng) {
  if (rate < 0.0 || rate > 1.0) throw ValidationError("mask rate must be in [0, 1]");
  int count = static_cast<int>(std::floor(rate * n));
  if (rate > 0.0 && n >= 1 && count == 0) count = 1;
  return rng.sample(n, count);
}

std::pair<Mat, std::vector<int>> apply_feature_mask(const Mat& x, double rate, const Mat& token,
                                                    Rng& rng) {
  if (token.rows() != 1 || token.cols() != x.cols()) {
    throw ValidationError("apply_feature_mask: token must be 1x" + std::to_string(x.cols()));
  }
  auto masked = sample_mask_indices(static_cast<int>(x.rows()), rate, rng);
  Mat out = x;
  for (int r : masked) out.row(r) = token.row(0);
  return {std::move(out), std::move(masked)};
}

Mat apply_feature_dropout(const Mat& x, double p, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw ValidationError("apply_feature_dropout: need 0 <= p < 1");
  Mat out = x;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      if (rng.uniform() < p) out(i, j) = 0.0;
    }
  }
  return out;
}

double loss_neighbor_recon(const Mat& x, const Mat& z, const std::vector<int>& masked) {
  if (masked.empty()) throw ValidationError("loss_neighbor_recon: empty masked set");
  if (x.rows() != z.rows() || x.cols() != z.cols()) {
    throw ValidationError("loss_neighbor_recon: shape mismatch");
  }
  double sum = 0.0;
  for (int r : masked) sum += (x.row(r) - z.row(r)).squaredNorm();
  return sum / static_cast<double>(masked.size());
}

ad::Var loss_neighbor_recon(ad::Tape& t, const Mat& x, ad::Var z, const std::vector<int>& masked) {
  if (masked.empty()) throw ValidationError("loss_neighbor_recon: empty masked set");
  Mat xm(static_cast<Eigen::Index>(masked.size()), x.cols());
  for (size_t k = 0; k < masked.size(); ++k) xm.row(static_cast<Eigen::Index>(k)) = x.row(masked[k]);
  ad::Var diff = t.sub(t.row_select(z, masked), t.constant(std::move(xm)));
  return t.affine(t.sum_all(t.mul(diff, diff)), 1.0 / static_cast<double>(masked.size()), 0.0);
}

double loss_ego_recon(const Mat& x, const Mat& z) {
  if (x.rows() != z.rows() || x.cols() != z.cols()) throw ValidationError("loss_ego_recon: shape mismatch");
  return (x - z).squaredNorm() / static_cast<double>(x.rows());
}

ad::Var loss_ego_recon(ad::Tape& t, const Mat& x, ad::Var z) {
  if (x.rows() != t.value(z).rows() || x.cols() != t.value(z).cols()) {
    throw ValidationError("loss_ego_recon: shape mismatch");
  }
  ad::Var diff = t.sub(z, t.constant(x));
  return t.affine(t.sum_all(t.mul(diff, diff)), 1.0 / static_cast<double>(x.rows()), 0.0);
}

namespace {

// Column standardization in the canonical-correlation style:
// (h - mean) / (std + eps) / sqrt(N), applied on the tape.
ad::Var standardize_cols(ad::Tape& t, ad::Var h) {
  const double n = static_cast<double>(t.value(h).rows());
  ad::Var mean = t.affine(t.col_sum(h), 1.0 / n, 0.0);
  ad::Var centered = t.sub_rowvec(h, mean);
  ad::Var var = t.affine(t.col_sum(t.mul(centered, centered)), 1.0 / n, 1e-12);
  ad::Var stddev = t.pow_const(var, 0.5);
  return t.affine(t.div_rowvec(centered, stddev), 1.0 / std::sqrt(n), 0.0);
}

}  // namespace

ad::Var loss_semantic_consistency(ad::Tape& t, ad::Var hg, ad::Var hl, bool standardize) {
  const Mat& a = t.value(hg);
  const Mat& b = t.value(hl);
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ValidationError("loss_semantic_consistency: shape mismatch");
  }
  if (standardize) {
    hg = standardize_cols(t, hg);
    hl = standardize_cols(t, hl);
  }
  const Eigen::Index dh = t.value(hg).cols();
  ad::Var eye = t.constant(Mat::Identity(dh, dh));
  ad::Var diff = t.sub(hg, hl);
  ad::Var invariance = t.sum_all(t.mul(diff, diff));
  ad::Var gram_g = t.sub(t.matmul(hg, hg, true, false), eye);
  ad::Var gram_l = t.sub(t.matmul(hl, hl, true, false), eye);
  ad::Var decor = t.add(t.sum_all(t.mul(gram_g, gram_g)), t.sum_all(t.mul(gram_l, gram_l)));
  return t.add(invariance, decor);
}

double loss_semantic_consistency(const Mat& hg, const Mat& hl, bool standardize) {
  ad::Tape t;
  return t.scalar(loss_semantic_consistency(t, t.constant(hg), t.constant(hl), standardize));
}

ad::Var soft_assignment(ad::Tape& t, ad::Var h, ad::Var centers, double alpha) {
  if (alpha <= 0.0) throw ValidationError("soft_assignment: alpha must be positive");
  if (t.value(h).cols() != t.value(centers).cols()) {
    throw ValidationError("soft_assignment: embedding dim mismatch");
  }
  ad::Var hn = t.row_sum(t.mul(h, h));            // N x 1
  ad::Var cn = t.row_sum(t.mul(centers, centers)); // K x 1
  ad::Var cross = t.matmul(h, centers, false, true);
  ad::Var d2 = t.add_colvec(t.add_rowvec(t.affine(cross, -2.0, 0.0), t.transpose(cn)), hn);
  d2 = t.clamp_min(d2, 0.0);
  ad::Var kernel = t.pow_const(t.affine(d2, 1.0 / alpha, 1.0), -(alpha + 1.0) / 2.0);
  ad::Var inv_rowsum = t.pow_const(t.row_sum(kernel), -1.0);
  return t.mul_colvec(kernel, inv_rowsum);
}

Mat soft_assignment(const Mat& h, const Mat& centers, double alpha) {
  ad::Tape t;
  return t.value(soft_assignment(t, t.constant(h), t.constant(centers), alpha));
}

Mat soft_assignment(const Mat& h, const PrototypeSet& protos) {
  if (!protos.initialized) throw ValidationError("soft_assignment: prototypes not initialized");
  return soft_assignment(h, protos.centers, protos.alpha);
}

Mat target_distribution(const Mat& q) {
  const Eigen::Index n = q.rows();
  const Eigen::Index k = q.cols();
  Eigen::RowVectorXd freq = q.colwise().sum();
  for (Eigen::Index j = 0; j < k; ++j) {
    if (freq(j) <= 0.0) {
      throw TrainingError("target_distribution: empty soft cluster " + std::to_string(j));
    }
  }
  Mat p(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    double denom = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      p(i, j) = q(i, j) * q(i, j) / freq(j);
      denom += p(i, j);
    }
    p.row(i) /= denom;
  }
  return p;
}

double loss_cluster(const Mat& p, const Mat& q) {
  if (p.rows() != q.rows() || p.cols() != q.cols()) throw ValidationError("loss_cluster: shape mismatch");
  double kl = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      const double pij = p(i, j);
      if (pij <= 0.0) continue;  // 0 log 0 := 0
      const double qij = q(i, j);
      if (qij <= 0.0) throw ValidationError("loss_cluster: support violation at (" + std::to_string(i) +
                                            ", " + std::to_string(j) + ")");
      kl += pij * std::log(pij / std::max(qij, 1e-12));
    }
  }
  return kl;
}

ad::Var loss_cluster(ad::Tape& t, const Mat& p, ad::Var q) {
  const Mat& qv = t.value(q);
  if (p.rows() != qv.rows() || p.cols() != qv.cols()) throw ValidationError("loss_cluster: shape mismatch");
  double entropy = 0.0;  // sum p log p, the constant part
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      if (p(i, j) > 0.0) entropy += p(i, j) * std::log(p(i, j));
    }
  }
  ad::Var log_q = t.log(t.clamp_min(q, 1e-12));
  ad::Var cross = t.sum_all(t.mul(t.constant(p), log_q));
  return t.affine(cross, -1.0, entropy);
}

PrototypeSet kmeans_init(const Mat& h, int k, double alpha, int update_interval, Rng& rng) {
  if (update_interval < 1) throw ValidationError("kmeans_init: update_interval must be >= 1");
  KmeansResult km = kmeans(h, k, rng);
  PrototypeSet out;
  out.centers = std::move(km.centroids);
  out.alpha = alpha;
  out.update_interval = update_interval;
  out.initialized = true;
  out.degenerate_init = km.degenerate;
  return out;
}

PretrainCheckpoint pretrain(const SocialGraph& g, const PretrainConfig& cfg,
                            const EncoderConfig& enc_cfg) {
  check_config(enc_cfg);
  if (enc_cfg.feature_dim != g.feature_dim()) {
    throw ValidationError("pretrain: encoder feature_dim does not match dataset");
  }
  if (enc_cfg.num_relations != g.num_relations()) {
    throw ValidationError("pretrain: encoder num_relations does not match dataset");
  }
  {
    const auto violations = validate(g);
    if (!violations.empty()) throw ValidationError("pretrain: invalid graph: " + violations.front());
  }
  if (cfg.epochs < 1) throw ValidationError("pretrain: epochs must be >= 1");
  if (cfg.schedule.total_epochs != cfg.epochs) {
    throw ValidationError("pretrain: schedule.total_epochs must equal epochs");
  }
  const int warmup = cfg.effective_warmup();
  if (warmup >= cfg.epochs) throw ValidationError("pretrain: warmup_epochs must be < epochs");

  const bool has_aware = cfg.arm != EncoderArm::GraphAgnosticOnly;
  const bool has_agnostic = cfg.arm != EncoderArm::GraphAwareOnly;
  const double w_n = has_aware ? cfg.w_neighbor : 0.0;
  const double w_e = has_agnostic ? cfg.w_ego : 0.0;
  const double w_s = (has_aware && has_agnostic) ? cfg.w_semantic : 0.0;
  const double w_c = cfg.w_cluster;
  if (w_n <= 0.0 && w_e <= 0.0 && w_s <= 0.0 && w_c <= 0.0) {
    throw ValidationError("pretrain: no active pretext objective");
  }
  if (w_c > 0.0 && cfg.num_prototypes > g.num_nodes) {
    throw ValidationError("pretrain: num_prototypes exceeds num_nodes");
  }
  if (w_c > 0.0 && cfg.num_prototypes < 1) throw ValidationError("pretrain: num_prototypes must be >= 1");

  PretrainCheckpoint ckpt;
  ckpt.encoder_config = enc_cfg;
  ckpt.config = cfg;

  Rng base(cfg.seed);
  init_params(enc_cfg, base.fork(0).next(), has_aware ? &ckpt.graph_aware : nullptr,
              has_agnostic ? &ckpt.graph_agnostic : nullptr, &ckpt.decoders);
  if (!has_aware) {
    ckpt.decoders.g_w0.resize(0, 0);
    ckpt.decoders.g_b0.resize(0, 0);
    ckpt.decoders.g_w1.resize(0, 0);
    ckpt.decoders.g_b1.resize(0, 0);
  }
  if (!has_agnostic) {
    ckpt.decoders.l_w.resize(0, 0);
    ckpt.decoders.l_b.resize(0, 0);
  }
  ckpt.mask_token = has_aware ? Mat::Zero(1, enc_cfg.feature_dim) : Mat(0, 0);

  const int embed_dim = (has_aware && has_agnostic) ? 2 * enc_cfg.hidden_dim : enc_cfg.hidden_dim;
  ckpt.prototypes.alpha = cfg.student_alpha;
  ckpt.prototypes.update_interval = cfg.update_interval;
  if (w_c > 0.0) ckpt.prototypes.centers = Mat::Zero(cfg.num_prototypes, embed_dim);

  Rng mask_rng = base.fork(1);
  Rng drop_rng = base.fork(2);
  Rng kmeans_rng = base.fork(3);

  const Mat features = g.features_as_double();
  const GraphContext ctx = GraphContext::build(g);
  Adam opt(cfg.learning_rate);
  Mat target;  // current P, constant between refreshes

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const bool cluster_active = w_c > 0.0 && epoch > warmup;

    // Prototype centers come from k-means over clean embeddings the first
    // time the cluster objective turns on.
    if (cluster_active && !ckpt.prototypes.initialized) {
      Mat h_cat;
      if (has_aware && has_agnostic) {
        Mat hg = graph_aware_forward(ckpt.graph_aware, enc_cfg, g, features);
        Mat hl = graph_agnostic_forward(ckpt.graph_agnostic, enc_cfg, features);
        h_cat.resize(hg.rows(), hg.cols() + hl.cols());
        h_cat.leftCols(hg.cols()) = hg;
        h_cat.rightCols(hl.cols()) = hl;
      } else if (has_aware) {
        h_cat = graph_aware_forward(ckpt.graph_aware, enc_cfg, g, features);
      } else {
        h_cat = graph_agnostic_forward(ckpt.graph_agnostic, enc_cfg, features);
      }
      PrototypeSet init =
          kmeans_init(h_cat, cfg.num_prototypes, cfg.student_alpha, cfg.update_interval, kmeans_rng);
      ckpt.prototypes = std::move(init);
    }

    ad::Tape tape;
    Lifter lifter(tape);
    GraphAwareVars aware_vars;
    GraphAgnosticVars agnostic_vars;
    if (has_aware) aware_vars = lift(ckpt.graph_aware, lifter);
    if (has_agnostic) agnostic_vars = lift(ckpt.graph_agnostic, lifter);
    DecoderVars dec_vars = lift(ckpt.decoders, lifter);
    ad::Var token_var, proto_var;
    if (has_aware) token_var = lifter(ckpt.mask_token);
    if (w_c > 0.0) proto_var = lifter(ckpt.prototypes.centers);

    ad::Var feats_const = tape.constant(features);
    LossTraceRow row;
    row.epoch = epoch;
    ad::Var total;

    auto add_term = [&](ad::Var term, double weight) {
      ad::Var weighted = tape.affine(term, weight, 0.0);
      total = total.valid() ? tape.add(total, weighted) : weighted;
    };

    if (w_n > 0.0) {
      const double rate = mask_rate_at(cfg.schedule, epoch - 1);
      const auto masked = sample_mask_indices(g.num_nodes, rate, mask_rng);
      if (!masked.empty()) {
        ad::Var x_tilde = tape.mask_rows(feats_const, token_var, masked);
        ad::Var h_masked = graph_aware_forward(tape, aware_vars, enc_cfg, ctx, x_tilde);
        ad::Var z_g = decode_g(tape, dec_vars, enc_cfg, h_masked);
        ad::Var l_n = loss_neighbor_recon(tape, features, z_g, masked);
        row.l_n = tape.scalar(l_n);
        add_term(l_n, w_n);
      }
    }

    if (w_e > 0.0) {
      const Mat corrupted = apply_feature_dropout(features, cfg.dropout_p, drop_rng);
      ad::Var h_bar = graph_agnostic_forward(tape, agnostic_vars, enc_cfg, tape.constant(corrupted));
      ad::Var z_l = decode_l(tape, dec_vars, h_bar);
      ad::Var l_e = loss_ego_recon(tape, features, z_l);
      row.l_e = tape.scalar(l_e);
      add_term(l_e, w_e);
    }

    ad::Var h_g_clean, h_l_clean;
    const bool need_clean = w_s > 0.0 || cluster_active;
    if (need_clean) {
      if (has_aware) h_g_clean = graph_aware_forward(tape, aware_vars, enc_cfg, ctx, feats_const);
      if (has_agnostic) h_l_clean = graph_agnostic_forward(tape, agnostic_vars, enc_cfg, feats_const);
    }

    if (w_s > 0.0) {
      ad::Var l_s = loss_semantic_consistency(tape, h_g_clean, h_l_clean, cfg.standardize_semantic);
      row.l_s = tape.scalar(l_s);
      add_term(l_s, w_s);
    }

    if (cluster_active) {
      ad::Var h_cat = (has_aware && has_agnostic) ? tape.concat_cols(h_g_clean, h_l_clean)
                                                  : (has_aware ? h_g_clean : h_l_clean);
      ad::Var q = soft_assignment(tape, h_cat, proto_var, cfg.student_alpha);
      const int since_warmup = epoch - warmup;  // 1-based
      if ((since_warmup - 1) % cfg.update_interval == 0) {
        target = target_distribution(tape.value(q));
        ckpt.refresh_epochs.push_back(epoch);
      }
      ad::Var l_c = loss_cluster(tape, target, q);
      row.l_c = tape.scalar(l_c);
      add_term(l_c, w_c);
    }

    if (!total.valid()) {
      // Possible when the only active term is masking with rate 0 this epoch.
      ckpt.trace.push_back(row);
      continue;
    }
    row.l_p = tape.scalar(total);

    const struct {
      const char* name;
      double v;
    } checks[] = {{"L_N", row.l_n}, {"L_E", row.l_e}, {"L_S", row.l_s}, {"L_C", row.l_c}, {"L_P", row.l_p}};
    for (const auto& c : checks) {
      if (!std::isfinite(c.v)) {
        throw TrainingError(std::string("pretrain: ") + c.name + " non-finite at epoch " +
                            std::to_string(epoch));
      }
    }

    tape.backward(total);
    std::vector<Mat> grads;
    grads.reserve(lifter.vars.size());
    for (const ad::Var& v : lifter.vars) grads.push_back(tape.grad(v));
    opt.step(lifter.tensors, grads);
    ckpt.trace.push_back(row);
  }
  return ckpt;
}

}  // namespace bothp
