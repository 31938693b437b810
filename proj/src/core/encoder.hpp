#pragma once

#include "core/autodiff.hpp"
#include "core/graph.hpp"

namespace bothp {

enum class Activation { Identity, ReLU, LeakyReLU, Tanh };
enum class GraphAwareVariant { RelationalMean, RelationalAttention };

// Which encoder branches an experiment arm keeps.
enum class EncoderArm { Dual, GraphAwareOnly, GraphAgnosticOnly };

inline constexpr double kLeakySlope = 0.01;

struct EncoderConfig {
  int feature_dim = 0;
  int hidden_dim = 32;
  int num_layers = 2;  // message-passing depth of the graph-aware encoder
  int num_relations = 1;
  Activation activation = Activation::LeakyReLU;
  GraphAwareVariant variant = GraphAwareVariant::RelationalMean;
};

void check_config(const EncoderConfig& cfg);

Activation activation_from_name(const std::string& name);
std::string activation_name(Activation a);

struct GraphAwareLayer {
  Mat self_weight;              // d_in x d_h
  std::vector<Mat> rel_weight;  // per relation, d_in x d_h
  Mat bias;                     // 1 x d_h
  // Attention variant only: per-relation score vectors, d_h x 1 each.
  std::vector<Mat> attn_dst, attn_src;
};

struct GraphAwareParams {
  std::vector<GraphAwareLayer> layers;
};

struct GraphAgnosticParams {
  Mat w0, b0, w1, b1;  // h = act(x W0 + b0) W1 + b1, row convention
};

struct DecoderParams {
  Mat g_w0, g_b0, g_w1, g_b1;  // 2-layer MLP d_h -> d_h -> d
  Mat l_w, l_b;                // single affine d_h -> d
};

// Uniform fan-in-scaled weights, zero biases; deterministic in (config, seed).
void init_params(const EncoderConfig& cfg, uint64_t seed, GraphAwareParams* aware,
                 GraphAgnosticParams* agnostic, DecoderParams* decoders);

// Per-relation incoming-edge structures; built once per graph and shared by
// every forward pass over it.
struct GraphContext {
  int num_nodes = 0;
  std::vector<ad::RelationStructure> rels;

  static GraphContext build(const SocialGraph& g);
};

// ---- tape forms (used inside training loops) ----

struct GraphAwareVars {
  struct Layer {
    ad::Var self_w, bias;
    std::vector<ad::Var> rel_w, attn_dst, attn_src;
  };
  std::vector<Layer> layers;
};

struct GraphAgnosticVars {
  ad::Var w0, b0, w1, b1;
};

struct DecoderVars {
  ad::Var g_w0, g_b0, g_w1, g_b1, l_w, l_b;
};

// Puts every tensor of a parameter struct on the tape and records the
// (master tensor, tape var) pairing so the optimizer can pull gradients back.
struct Lifter {
  explicit Lifter(ad::Tape& t) : tape(&t) {}
  ad::Tape* tape;
  std::vector<Mat*> tensors;
  std::vector<ad::Var> vars;

  ad::Var operator()(Mat& m) {
    tensors.push_back(&m);
    vars.push_back(tape->leaf(m));
    return vars.back();
  }
};

GraphAwareVars lift(GraphAwareParams& p, Lifter& lift);
GraphAgnosticVars lift(GraphAgnosticParams& p, Lifter& lift);
DecoderVars lift(DecoderParams& p, Lifter& lift);

ad::Var apply_activation(ad::Tape& t, ad::Var x, Activation act);

ad::Var graph_aware_forward(ad::Tape& t, const GraphAwareVars& p, const EncoderConfig& cfg,
                            const GraphContext& ctx, ad::Var feats);
ad::Var graph_agnostic_forward(ad::Tape& t, const GraphAgnosticVars& p, const EncoderConfig& cfg,
                               ad::Var feats);
ad::Var decode_g(ad::Tape& t, const DecoderVars& p, const EncoderConfig& cfg, ad::Var h);
ad::Var decode_l(ad::Tape& t, const DecoderVars& p, ad::Var h);

// ---- plain forms (inference and unit oracles) ----

Mat graph_aware_forward(const GraphAwareParams& p, const EncoderConfig& cfg, const SocialGraph& g,
                        const Mat& feats);
Mat graph_agnostic_forward(const GraphAgnosticParams& p, const EncoderConfig& cfg, const Mat& feats);
Mat decode_g(const DecoderParams& p, const EncoderConfig& cfg, const Mat& h);
Mat decode_l(const DecoderParams& p, const Mat& h);

}  // namespace bothp
