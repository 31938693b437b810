#include "core/encoder.hpp"

#include "test_util.hpp"

#include <doctest.h>

using namespace bothp;
using testutil::make_graph;
using testutil::random_mat;

namespace {

EncoderConfig tiny_config(int d = 2, int dh = 2, int layers = 1, int relations = 1,
                          Activation act = Activation::Identity) {
  EncoderConfig cfg;
  cfg.feature_dim = d;
  cfg.hidden_dim = dh;
  cfg.num_layers = layers;
  cfg.num_relations = relations;
  cfg.activation = act;
  return cfg;
}

// All tensors equal entrywise.
bool params_equal(const GraphAwareParams& a, const GraphAwareParams& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (size_t k = 0; k < a.layers.size(); ++k) {
    if (a.layers[k].self_weight != b.layers[k].self_weight) return false;
    if (a.layers[k].bias != b.layers[k].bias) return false;
    for (size_t r = 0; r < a.layers[k].rel_weight.size(); ++r) {
      if (a.layers[k].rel_weight[r] != b.layers[k].rel_weight[r]) return false;
    }
  }
  return true;
}

}  // namespace

TEST_SUITE_BEGIN("encoders");

TEST_CASE("init_params is deterministic in the seed") {
  const EncoderConfig cfg = tiny_config(4, 8, 2, 3);
  GraphAwareParams a1, a2, a3;
  GraphAgnosticParams g1, g2, g3;
  DecoderParams d1, d2, d3;
  init_params(cfg, 42, &a1, &g1, &d1);
  init_params(cfg, 42, &a2, &g2, &d2);
  init_params(cfg, 43, &a3, &g3, &d3);
  CHECK(params_equal(a1, a2));
  CHECK(g1.w0 == g2.w0);
  CHECK(d1.g_w1 == d2.g_w1);
  CHECK(!params_equal(a1, a3));
  CHECK(g1.w0 != g3.w0);
}

TEST_CASE("init_params shape contract") {
  const EncoderConfig cfg = tiny_config(4, 8, 2, 2);
  GraphAwareParams aware;
  GraphAgnosticParams agnostic;
  DecoderParams dec;
  init_params(cfg, 1, &aware, &agnostic, &dec);
  CHECK(agnostic.w0.rows() == 4);
  CHECK(agnostic.w0.cols() == 8);
  CHECK(agnostic.w1.rows() == 8);
  CHECK(aware.layers.size() == 2);
  CHECK(aware.layers[0].self_weight.rows() == 4);
  CHECK(aware.layers[1].self_weight.rows() == 8);
  CHECK(aware.layers[0].rel_weight.size() == 2);
  CHECK(aware.layers[0].attn_dst.empty());  // mean variant
  CHECK(dec.g_w0.rows() == 8);
  CHECK(dec.g_w1.cols() == 4);
  CHECK(dec.l_w.rows() == 8);
  CHECK(dec.l_w.cols() == 4);
  CHECK(agnostic.b0.isZero());
  CHECK(aware.layers[0].bias.isZero());
}

TEST_CASE("graph_agnostic_forward follows the two-layer formula") {
  EncoderConfig cfg = tiny_config(2, 2, 1, 1, Activation::ReLU);
  GraphAgnosticParams p;
  p.w0 = Mat::Identity(2, 2);
  p.b0 = Mat::Zero(1, 2);
  p.w1 = Mat::Identity(2, 2);
  p.b1 = Mat::Zero(1, 2);

  Mat x(2, 2);
  x << 0.5, 1.5, 2.0, 0.0;
  CHECK(graph_agnostic_forward(p, cfg, x) == x);  // identity composition on nonnegative input

  p.b1 = Mat::Constant(1, 2, 3.0);
  const Mat zero_row = Mat::Zero(1, 2);
  CHECK(graph_agnostic_forward(p, cfg, zero_row) == Mat::Constant(1, 2, 3.0));
}

TEST_CASE("graph_agnostic_forward scalar hand evaluation") {
  EncoderConfig cfg = tiny_config(1, 1, 1, 1, Activation::ReLU);
  GraphAgnosticParams p;
  p.w0 = Mat::Constant(1, 1, 2.0);
  p.b0 = Mat::Constant(1, 1, -1.0);
  p.w1 = Mat::Constant(1, 1, 3.0);
  p.b1 = Mat::Zero(1, 1);
  const Mat x = Mat::Constant(1, 1, 2.0);
  CHECK(graph_agnostic_forward(p, cfg, x)(0, 0) == doctest::Approx(9.0));  // 3 * relu(2*2 - 1)
}

TEST_CASE("graph_agnostic_forward row locality under permutation of other rows") {
  Rng rng(5);
  EncoderConfig cfg = tiny_config(3, 4, 1, 1, Activation::LeakyReLU);
  GraphAgnosticParams p;
  DecoderParams dec;
  init_params(cfg, 7, nullptr, &p, &dec);
  const Mat x = random_mat(6, 3, rng);
  const Mat h = graph_agnostic_forward(p, cfg, x);

  Mat x_perm = x;
  x_perm.row(1).swap(x_perm.row(4));
  x_perm.row(2).swap(x_perm.row(5));
  const Mat h_perm = graph_agnostic_forward(p, cfg, x_perm);
  CHECK(h.row(0) == h_perm.row(0));
  CHECK(h.row(3) == h_perm.row(3));
}

namespace {

GraphAwareParams identity_aware(int relations = 1) {
  GraphAwareParams p;
  GraphAwareLayer layer;
  layer.self_weight = Mat::Identity(2, 2);
  layer.bias = Mat::Zero(1, 2);
  for (int r = 0; r < relations; ++r) layer.rel_weight.push_back(Mat::Identity(2, 2));
  p.layers.push_back(layer);
  return p;
}

}  // namespace

TEST_CASE("graph_aware_forward: isolated node passes only the self path") {
  const EncoderConfig cfg = tiny_config();
  const SocialGraph g = make_graph(1, {{}});
  Mat x(1, 2);
  x << 0.7, -0.3;
  CHECK(graph_aware_forward(identity_aware(), cfg, g, x) == x);
}

TEST_CASE("graph_aware_forward: one mean-aggregation layer, hand evaluated") {
  const EncoderConfig cfg = tiny_config();
  const SocialGraph g = make_graph(2, {{{0, 1}, {1, 0}}});
  const Mat x = Mat::Identity(2, 2);
  Mat expect(2, 2);
  expect << 1, 1, 1, 1;
  CHECK(graph_aware_forward(identity_aware(), cfg, g, x) == expect);
}

TEST_CASE("graph_aware_forward: all-zero weights give all-zero output") {
  EncoderConfig cfg = tiny_config(2, 2, 2, 1, Activation::LeakyReLU);
  GraphAwareParams p;
  for (int k = 0; k < 2; ++k) {
    GraphAwareLayer layer;
    layer.self_weight = Mat::Zero(2, 2);
    layer.bias = Mat::Zero(1, 2);
    layer.rel_weight.push_back(Mat::Zero(2, 2));
    p.layers.push_back(layer);
  }
  Rng rng(8);
  const SocialGraph g = make_graph(3, {{{0, 1}, {1, 2}}});
  CHECK(graph_aware_forward(p, cfg, g, random_mat(3, 2, rng)).isZero());
}

TEST_CASE("graph_aware_forward is permutation equivariant") {
  Rng rng(9);
  for (GraphAwareVariant variant :
       {GraphAwareVariant::RelationalMean, GraphAwareVariant::RelationalAttention}) {
    EncoderConfig cfg = tiny_config(3, 4, 2, 2, Activation::LeakyReLU);
    cfg.variant = variant;
    GraphAwareParams p;
    init_params(cfg, 11, &p, nullptr, nullptr);

    const int n = 6;
    const SocialGraph g =
        make_graph(n, {{{0, 1}, {1, 2}, {3, 1}, {4, 5}}, {{2, 0}, {5, 1}, {1, 4}}}, {}, 3);
    const Mat x = random_mat(n, 3, rng);
    const Mat h = graph_aware_forward(p, cfg, g, x);

    std::vector<int> perm = {3, 0, 5, 1, 4, 2};  // new index of each old node
    SocialGraph gp = g;
    for (auto& rel : gp.edges) {
      for (auto& [s, d] : rel) {
        s = perm[s];
        d = perm[d];
      }
    }
    Mat xp(n, 3);
    for (int i = 0; i < n; ++i) xp.row(perm[i]) = x.row(i);
    const Mat hp = graph_aware_forward(p, cfg, gp, xp);
    for (int i = 0; i < n; ++i) {
      CHECK((h.row(i) - hp.row(perm[i])).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("decoders: zero input with zero biases decodes to zero") {
  EncoderConfig cfg = tiny_config(3, 4);
  DecoderParams dec;
  init_params(cfg, 3, nullptr, nullptr, &dec);
  dec.g_b0.setZero();
  dec.g_b1.setZero();
  dec.l_b.setZero();
  const Mat h = Mat::Zero(5, 4);
  CHECK(decode_g(dec, cfg, h).isZero());
  CHECK(decode_l(dec, h).isZero());
}

TEST_CASE("decode_l with identity weights is the identity") {
  DecoderParams dec;
  dec.l_w = Mat::Identity(3, 3);
  dec.l_b = Mat::Zero(1, 3);
  Rng rng(4);
  const Mat h = random_mat(4, 3, rng);
  CHECK(decode_l(dec, h) == h);
}

TEST_CASE("decode_g scalar hand evaluation") {
  EncoderConfig cfg = tiny_config(1, 1, 1, 1, Activation::ReLU);
  DecoderParams dec;
  dec.g_w0 = Mat::Constant(1, 1, 2.0);
  dec.g_b0 = Mat::Zero(1, 1);
  dec.g_w1 = Mat::Constant(1, 1, 0.5);
  dec.g_b1 = Mat::Constant(1, 1, 1.0);
  const Mat h = Mat::Constant(1, 1, 3.0);
  CHECK(decode_g(dec, cfg, h)(0, 0) == doctest::Approx(4.0));  // 0.5 * relu(2*3) + 1
}

TEST_CASE("encoder forwards match finite differences through every parameter") {
  Rng rng(21);
  const SocialGraph g = make_graph(5, {{{0, 1}, {1, 2}, {3, 4}, {4, 0}}, {{2, 0}, {0, 3}}}, {}, 3);
  const Mat x = random_mat(5, 3, rng);
  const GraphContext ctx = GraphContext::build(g);

  for (GraphAwareVariant variant :
       {GraphAwareVariant::RelationalMean, GraphAwareVariant::RelationalAttention}) {
    EncoderConfig cfg = tiny_config(3, 4, 2, 2, Activation::Tanh);
    cfg.variant = variant;
    GraphAwareParams aware;
    GraphAgnosticParams agnostic;
    DecoderParams dec;
    init_params(cfg, 33, &aware, &agnostic, &dec);

    ad::Tape tape;
    Lifter lifter(tape);
    GraphAwareVars av = lift(aware, lifter);
    DecoderVars dv = lift(dec, lifter);
    ad::Var feats = tape.leaf(x);
    ad::Var h = graph_aware_forward(tape, av, cfg, ctx, feats);
    ad::Var z = decode_g(tape, dv, cfg, h);
    ad::Var loss = tape.sum_all(tape.mul(z, z));
    tape.backward(loss);

    auto eval = [&]() {
      ad::Tape t2;
      Lifter l2(t2);
      GraphAwareVars av2 = lift(aware, l2);
      DecoderVars dv2 = lift(dec, l2);
      ad::Var z2 = decode_g(t2, dv2, cfg, graph_aware_forward(t2, av2, cfg, ctx, t2.constant(x)));
      return t2.scalar(t2.sum_all(t2.mul(z2, z2)));
    };
    const double step = 1e-5;
    for (size_t ti = 0; ti < lifter.tensors.size(); ++ti) {
      Mat& tensor = *lifter.tensors[ti];
      const Mat analytic = tape.grad(lifter.vars[ti]);
      for (Eigen::Index r = 0; r < tensor.rows(); ++r) {
        for (Eigen::Index c = 0; c < tensor.cols(); ++c) {
          const double keep = tensor(r, c);
          tensor(r, c) = keep + step;
          const double up = eval();
          tensor(r, c) = keep - step;
          const double down = eval();
          tensor(r, c) = keep;
          const double fd = (up - down) / (2.0 * step);
          const double ad_g = analytic(r, c);
          const double rel = std::abs(ad_g - fd) / std::max({std::abs(ad_g), std::abs(fd), 1e-6});
          REQUIRE(rel < 1e-4);
        }
      }
    }
    // gradient with respect to the features themselves
    const Mat feat_grad = tape.grad(feats);
    CHECK(feat_grad.rows() == 5);
    CHECK(feat_grad.allFinite());
  }

  // graph-agnostic chain through its decoder
  {
    EncoderConfig cfg = tiny_config(3, 4, 1, 1, Activation::LeakyReLU);
    GraphAgnosticParams agnostic;
    DecoderParams dec;
    init_params(cfg, 17, nullptr, &agnostic, &dec);
    testutil::check_gradients(
        [&](ad::Tape& t, std::vector<ad::Var>& v) {
          GraphAgnosticVars pv{v[0], v[1], v[2], v[3]};
          DecoderVars dv{v[4], v[5], v[6], v[7], v[8], v[9]};
          ad::Var z = decode_l(t, dv, graph_agnostic_forward(t, pv, cfg, t.constant(x)));
          return t.sum_all(t.mul(z, z));
        },
        {agnostic.w0, agnostic.b0, agnostic.w1, agnostic.b1, dec.g_w0, dec.g_b0, dec.g_w1, dec.g_b1,
         dec.l_w, dec.l_b},
        1e-4);
  }
}

TEST_CASE("config validation") {
  EncoderConfig bad = tiny_config();
  bad.hidden_dim = 0;
  CHECK_THROWS_AS(check_config(bad), ValidationError);
  CHECK_THROWS_AS(activation_from_name("swish"), ValidationError);
  CHECK(activation_from_name("tanh") == Activation::Tanh);
}

TEST_SUITE_END();
