#include "core/encoder.hpp"

namespace bothp {

void check_config(const EncoderConfig& cfg) {
  if (cfg.feature_dim < 1) throw ValidationError("EncoderConfig: feature_dim must be >= 1");
  if (cfg.hidden_dim < 1) throw ValidationError("EncoderConfig: hidden_dim must be >= 1");
  if (cfg.num_layers < 1) throw ValidationError("EncoderConfig: num_layers must be >= 1");
  if (cfg.num_relations < 1) throw ValidationError("EncoderConfig: num_relations must be >= 1");
}

Activation activation_from_name(const std::string& name) {
  if (name == "identity") return Activation::Identity;
  if (name == "relu") return Activation::ReLU;
  if (name == "leaky_relu") return Activation::LeakyReLU;
  if (name == "tanh") return Activation::Tanh;
  throw ValidationError("unknown activation '" + name + "'");
}

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::ReLU: return "relu";
    case Activation::LeakyReLU: return "leaky_relu";
    case Activation::Tanh: return "tanh";
  }
  return "leaky_relu";
}

namespace {

Mat uniform_fan_in(int rows, int cols, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-bound, bound);
  }
  return m;
}

}  // namespace

void init_params(const EncoderConfig& cfg, uint64_t seed, GraphAwareParams* aware,
                 GraphAgnosticParams* agnostic, DecoderParams* decoders) {
  check_config(cfg);
  Rng rng(seed);
  const int d = cfg.feature_dim;
  const int dh = cfg.hidden_dim;

  if (aware) {
    aware->layers.clear();
    for (int k = 0; k < cfg.num_layers; ++k) {
      const int d_in = k == 0 ? d : dh;
      GraphAwareLayer layer;
      layer.self_weight = uniform_fan_in(d_in, dh, rng);
      layer.bias = Mat::Zero(1, dh);
      for (int r = 0; r < cfg.num_relations; ++r) layer.rel_weight.push_back(uniform_fan_in(d_in, dh, rng));
      if (cfg.variant == GraphAwareVariant::RelationalAttention) {
        for (int r = 0; r < cfg.num_relations; ++r) {
          layer.attn_dst.push_back(uniform_fan_in(dh, 1, rng));
          layer.attn_src.push_back(uniform_fan_in(dh, 1, rng));
        }
      }
      aware->layers.push_back(std::move(layer));
    }
  }
  if (agnostic) {
    agnostic->w0 = uniform_fan_in(d, dh, rng);
    agnostic->b0 = Mat::Zero(1, dh);
    agnostic->w1 = uniform_fan_in(dh, dh, rng);
    agnostic->b1 = Mat::Zero(1, dh);
  }
  if (decoders) {
    decoders->g_w0 = uniform_fan_in(dh, dh, rng);
    decoders->g_b0 = Mat::Zero(1, dh);
    decoders->g_w1 = uniform_fan_in(dh, d, rng);
    decoders->g_b1 = Mat::Zero(1, d);
    decoders->l_w = uniform_fan_in(dh, d, rng);
    decoders->l_b = Mat::Zero(1, d);
  }
}

GraphContext GraphContext::build(const SocialGraph& g) {
  GraphContext ctx;
  ctx.num_nodes = g.num_nodes;
  for (const auto& rel : g.edges) ctx.rels.push_back(ad::RelationStructure::build(rel, g.num_nodes));
  return ctx;
}

GraphAwareVars lift(GraphAwareParams& p, Lifter& L) {
  GraphAwareVars out;
  for (auto& layer : p.layers) {
    GraphAwareVars::Layer lv;
    lv.self_w = L(layer.self_weight);
    for (auto& w : layer.rel_weight) lv.rel_w.push_back(L(w));
    for (auto& a : layer.attn_dst) lv.attn_dst.push_back(L(a));
    for (auto& a : layer.attn_src) lv.attn_src.push_back(L(a));
    lv.bias = L(layer.bias);
    out.layers.push_back(std::move(lv));
  }
  return out;
}

GraphAgnosticVars lift(GraphAgnosticParams& p, Lifter& L) {
  return GraphAgnosticVars{L(p.w0), L(p.b0), L(p.w1), L(p.b1)};
}

DecoderVars lift(DecoderParams& p, Lifter& L) {
  return DecoderVars{L(p.g_w0), L(p.g_b0), L(p.g_w1), L(p.g_b1), L(p.l_w), L(p.l_b)};
}

ad::Var apply_activation(ad::Tape& t, ad::Var x, Activation act) {
  switch (act) {
    case Activation::Identity: return x;
    case Activation::ReLU: return t.leaky_relu(x, 0.0);
    case Activation::LeakyReLU: return t.leaky_relu(x, kLeakySlope);
    case Activation::Tanh: return t.tanh(x);
  }
  return x;
}

ad::Var graph_aware_forward(ad::Tape& t, const GraphAwareVars& p, const EncoderConfig& cfg,
                            const GraphContext& ctx, ad::Var feats) {
  if (static_cast<int>(ctx.rels.size()) != cfg.num_relations) {
    throw ValidationError("graph_aware_forward: relation count mismatch");
  }
  ad::Var h = feats;
  for (size_t k = 0; k < p.layers.size(); ++k) {
    const auto& layer = p.layers[k];
    ad::Var z = t.matmul(h, layer.self_w);
    for (int r = 0; r < cfg.num_relations; ++r) {
      ad::Var m = t.matmul(h, layer.rel_w[r]);
      ad::Var agg;
      if (cfg.variant == GraphAwareVariant::RelationalMean) {
        agg = t.mean_aggregate(m, &ctx.rels[r]);
      } else {
        ad::Var s_dst = t.matmul(m, layer.attn_dst[r]);
        ad::Var s_src = t.matmul(m, layer.attn_src[r]);
        agg = t.attention_aggregate(m, s_dst, s_src, &ctx.rels[r], kLeakySlope);
      }
      z = t.add(z, agg);
    }
    z = t.add_rowvec(z, layer.bias);
    h = apply_activation(t, z, cfg.activation);
  }
  return h;
}

ad::Var graph_agnostic_forward(ad::Tape& t, const GraphAgnosticVars& p, const EncoderConfig& cfg,
                               ad::Var feats) {
  ad::Var hidden = apply_activation(t, t.add_rowvec(t.matmul(feats, p.w0), p.b0), cfg.activation);
  return t.add_rowvec(t.matmul(hidden, p.w1), p.b1);
}

ad::Var decode_g(ad::Tape& t, const DecoderVars& p, const EncoderConfig& cfg, ad::Var h) {
  ad::Var hidden = apply_activation(t, t.add_rowvec(t.matmul(h, p.g_w0), p.g_b0), cfg.activation);
  return t.add_rowvec(t.matmul(hidden, p.g_w1), p.g_b1);
}

ad::Var decode_l(ad::Tape& t, const DecoderVars& p, ad::Var h) {
  return t.add_rowvec(t.matmul(h, p.l_w), p.l_b);
}

Mat graph_aware_forward(const GraphAwareParams& p, const EncoderConfig& cfg, const SocialGraph& g,
                        const Mat& feats) {
  ad::Tape t;
  Lifter L(t);
  GraphAwareVars pv = lift(const_cast<GraphAwareParams&>(p), L);
  const GraphContext ctx = GraphContext::build(g);
  return t.value(graph_aware_forward(t, pv, cfg, ctx, t.constant(feats)));
}

Mat graph_agnostic_forward(const GraphAgnosticParams& p, const EncoderConfig& cfg, const Mat& feats) {
  ad::Tape t;
  Lifter L(t);
  GraphAgnosticVars pv = lift(const_cast<GraphAgnosticParams&>(p), L);
  return t.value(graph_agnostic_forward(t, pv, cfg, t.constant(feats)));
}

Mat decode_g(const DecoderParams& p, const EncoderConfig& cfg, const Mat& h) {
  ad::Tape t;
  Lifter L(t);
  DecoderVars pv = lift(const_cast<DecoderParams&>(p), L);
  return t.value(decode_g(t, pv, cfg, t.constant(h)));
}

Mat decode_l(const DecoderParams& p, const Mat& h) {
  ad::Tape t;
  Lifter L(t);
  DecoderVars pv = lift(const_cast<DecoderParams&>(p), L);
  return t.value(decode_l(t, pv, t.constant(h)));
}

}  // namespace bothp
