#include "core/pretext.hpp"

#include "core/checkpoint.hpp"
#include "core/synth.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace bothp;
using testutil::make_graph;
using testutil::random_mat;

TEST_SUITE_BEGIN("pretext");

TEST_CASE("mask_rate_at endpoints and midpoint") {
  const MaskSchedule s{0.2, 0.8, 7};
  CHECK(mask_rate_at(s, 0) == doctest::Approx(0.2));
  CHECK(mask_rate_at(s, 6) == doctest::Approx(0.8));
  CHECK(mask_rate_at(s, 3) == doctest::Approx(0.5));
  CHECK(mask_rate_at(MaskSchedule{0.3, 0.9, 1}, 0) == doctest::Approx(0.3));
  CHECK_THROWS_AS(mask_rate_at(s, 7), ValidationError);
  CHECK_THROWS_AS(mask_rate_at(s, -1), ValidationError);
}

TEST_CASE("mask rate trace is exactly linear") {
  const MaskSchedule s{0.1, 0.7, 13};
  for (int e = 0; e < 13; ++e) {
    const double expect = 0.1 + (0.7 - 0.1) * e / 12.0;
    CHECK(std::abs(mask_rate_at(s, e) - expect) < 1e-15);
  }
}

TEST_CASE("apply_feature_mask") {
  Rng rng(1);
  const Mat x = random_mat(4, 3, rng);
  Mat token(1, 3);
  token << 9, 9, 9;

  SUBCASE("rate 0 is a no-op") {
    Rng r(2);
    auto [xm, idx] = apply_feature_mask(x, 0.0, token, r);
    CHECK(xm == x);
    CHECK(idx.empty());
  }
  SUBCASE("rate 1 replaces every row") {
    Rng r(2);
    auto [xm, idx] = apply_feature_mask(x, 1.0, token, r);
    CHECK(idx.size() == 4);
    for (int i = 0; i < 4; ++i) CHECK(xm.row(i) == token.row(0));
  }
  SUBCASE("rate 0.5 on 4 rows masks exactly 2") {
    Rng r(2);
    auto [xm, idx] = apply_feature_mask(x, 0.5, token, r);
    CHECK(idx.size() == 2);
    for (int i : idx) CHECK(xm.row(i) == token.row(0));
  }
  SUBCASE("tiny positive rate still masks at least one row") {
    Rng r(2);
    auto [xm, idx] = apply_feature_mask(x, 0.01, token, r);
    (void)xm;
    CHECK(idx.size() == 1);
  }
  SUBCASE("deterministic given the rng state") {
    Rng r1(7), r2(7);
    auto [a, ia] = apply_feature_mask(x, 0.5, token, r1);
    auto [b, ib] = apply_feature_mask(x, 0.5, token, r2);
    CHECK(a == b);
    CHECK(ia == ib);
  }
}

TEST_CASE("loss_neighbor_recon oracle values") {
  Mat x = Mat::Zero(3, 2);
  Mat z = Mat::Zero(3, 2);
  z.row(1) << 3, 4;
  CHECK(loss_neighbor_recon(x, z, {1}) == doctest::Approx(25.0));
  CHECK(loss_neighbor_recon(x, x, {0, 1, 2}) == doctest::Approx(0.0));

  // two masked rows with squared errors 2 and 4 -> mean 3
  Mat z2 = Mat::Zero(3, 2);
  z2.row(0) << 1, 1;                  // ||.||^2 = 2
  z2.row(2) << 2, 0;                  // ||.||^2 = 4
  CHECK(loss_neighbor_recon(x, z2, {0, 2}) == doctest::Approx(3.0));
  CHECK_THROWS_AS(loss_neighbor_recon(x, z, {}), ValidationError);
}

TEST_CASE("masked loss ignores unmasked rows") {
  Rng rng(3);
  const Mat x = random_mat(5, 3, rng);
  Mat z = random_mat(5, 3, rng);
  const std::vector<int> masked = {1, 4};
  const double before = loss_neighbor_recon(x, z, masked);
  z.row(2) << 100, -50, 3;  // unmasked row
  CHECK(loss_neighbor_recon(x, z, masked) == doctest::Approx(before));
}

TEST_CASE("apply_feature_dropout") {
  Rng rng(5);
  SUBCASE("p = 0 keeps everything") {
    const Mat x = random_mat(4, 4, rng);
    Rng r(1);
    CHECK(apply_feature_dropout(x, 0.0, r) == x);
  }
  SUBCASE("zero matrix is a fixed point") {
    Rng r(1);
    CHECK(apply_feature_dropout(Mat::Zero(5, 5), 0.7, r).isZero());
  }
  SUBCASE("empirical drop rate matches p") {
    const Mat x = Mat::Ones(400, 250);  // 1e5 entries
    Rng r(9);
    const Mat dropped = apply_feature_dropout(x, 0.5, r);
    const double kept = dropped.sum() / (400.0 * 250.0);
    CHECK(std::abs((1.0 - kept) - 0.5) < 0.01);
  }
  SUBCASE("survivors are unscaled") {
    const Mat x = Mat::Constant(50, 50, 3.0);
    Rng r(11);
    const Mat dropped = apply_feature_dropout(x, 0.3, r);
    for (Eigen::Index i = 0; i < dropped.size(); ++i) {
      const double v = dropped.data()[i];
      CHECK((v == 0.0 || v == 3.0));
    }
  }
}

TEST_CASE("loss_ego_recon oracle values") {
  Mat x(1, 3), z(1, 3);
  x << 0, 0, 0;
  z << 1, 2, 2;
  CHECK(loss_ego_recon(x, z) == doctest::Approx(9.0));
  CHECK(loss_ego_recon(x, x) == doctest::Approx(0.0));
  CHECK(loss_ego_recon(x, 2.0 * z) == doctest::Approx(4.0 * 9.0));  // degree-2 homogeneity
}

TEST_CASE("loss_semantic_consistency oracle values") {
  SUBCASE("aligned orthonormal inputs give zero") {
    const Mat eye = Mat::Identity(3, 3);
    CHECK(loss_semantic_consistency(eye, eye) == doctest::Approx(0.0));
  }
  SUBCASE("swapped identity case totals 4") {
    Mat hg = Mat::Identity(2, 2);
    Mat hl(2, 2);
    hl << 0, 1, 1, 0;
    CHECK(loss_semantic_consistency(hg, hl) == doctest::Approx(4.0));
  }
  SUBCASE("identical inputs contribute no invariance term") {
    Rng rng(2);
    const Mat h = random_mat(4, 3, rng);
    const Mat gram = (h.transpose() * h - Mat::Identity(3, 3));
    CHECK(loss_semantic_consistency(h, h) == doctest::Approx(2.0 * gram.squaredNorm()));
  }
}

TEST_CASE("soft_assignment oracle values") {
  SUBCASE("single prototype gives probability 1") {
    Rng rng(1);
    const Mat h = random_mat(5, 3, rng);
    const Mat c = random_mat(1, 3, rng);
    const Mat q = soft_assignment(h, c, 1.0);
    for (int i = 0; i < 5; ++i) CHECK(q(i, 0) == doctest::Approx(1.0));
  }
  SUBCASE("scalar hand evaluation: kernels 1 and 0.5") {
    Mat h = Mat::Zero(1, 1);
    Mat c(2, 1);
    c << 0, 1;
    const Mat q = soft_assignment(h, c, 1.0);
    CHECK(q(0, 0) == doctest::Approx(2.0 / 3.0));
    CHECK(q(0, 1) == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("equidistant prototypes give a uniform row") {
    Mat h = Mat::Zero(1, 2);
    Mat c(4, 2);
    c << 1, 0, -1, 0, 0, 1, 0, -1;
    const Mat q = soft_assignment(h, c, 2.5);
    for (int j = 0; j < 4; ++j) CHECK(q(0, j) == doctest::Approx(0.25));
  }
  SUBCASE("rows always sum to 1") {
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 1 + static_cast<int>(rng.below(8));
      const int k = 1 + static_cast<int>(rng.below(5));
      const int d = 1 + static_cast<int>(rng.below(6));
      const Mat q = soft_assignment(random_mat(n, d, rng), random_mat(k, d, rng),
                                    rng.uniform(0.5, 3.0));
      for (int i = 0; i < n; ++i) CHECK(q.row(i).sum() == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(q.minCoeff() >= 0.0);
    }
  }
  SUBCASE("uninitialized prototypes are rejected") {
    PrototypeSet protos;
    protos.centers = Mat::Zero(2, 2);
    CHECK_THROWS_AS(soft_assignment(Mat::Zero(3, 2), protos), ValidationError);
  }
}

TEST_CASE("target_distribution oracle values") {
  SUBCASE("uniform Q is a fixed point") {
    const Mat q = Mat::Constant(4, 3, 1.0 / 3.0);
    CHECK((target_distribution(q) - q).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("single cluster gives all ones") {
    const Mat q = Mat::Ones(5, 1);
    CHECK(target_distribution(q) == Mat::Ones(5, 1));
  }
  SUBCASE("worked two-row example") {
    Mat q(2, 2);
    q << 2.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0;
    const Mat p = target_distribution(q);
    for (int i = 0; i < 2; ++i) {
      CHECK(p(i, 0) == doctest::Approx(2.0 / 3.0));
      CHECK(p(i, 1) == doctest::Approx(1.0 / 3.0));
    }
  }
  SUBCASE("empty soft cluster aborts") {
    Mat q(2, 2);
    q << 1, 0, 1, 0;
    CHECK_THROWS_WITH_AS(target_distribution(q), doctest::Contains("empty soft cluster"), TrainingError);
  }
  SUBCASE("rows sum to 1 and sharpening holds at equalized frequencies") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
      const int k = 2 + static_cast<int>(rng.below(4));
      // Build Q whose columns have equal frequency by stacking a random row
      // with its cyclic shifts: every column sums to the same value.
      Mat row = random_mat(1, k, rng, 0.05, 1.0);
      row /= row.sum();
      Mat q(k, k);
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) q(i, j) = row(0, (j + i) % k);
      }
      const Mat p = target_distribution(q);
      for (int i = 0; i < k; ++i) {
        CHECK(p.row(i).sum() == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(p.row(i).maxCoeff() >= q.row(i).maxCoeff() - 1e-12);
      }
    }
  }
}

TEST_CASE("loss_cluster oracle values") {
  SUBCASE("KL(P, P) = 0") {
    Rng rng(19);
    Mat q = random_mat(3, 4, rng, 0.05, 1.0);
    for (int i = 0; i < 3; ++i) q.row(i) /= q.row(i).sum();
    CHECK(loss_cluster(q, q) == doctest::Approx(0.0));
  }
  SUBCASE("hard target against a fair coin is log 2") {
    Mat p(1, 2), q(1, 2);
    p << 1, 0;
    q << 0.5, 0.5;
    CHECK(loss_cluster(p, q) == doctest::Approx(std::log(2.0)));
  }
  SUBCASE("additivity over identical rows") {
    Mat p(1, 2), q(1, 2);
    p << 0.9, 0.1;
    q << 0.4, 0.6;
    const double single = loss_cluster(p, q);
    Mat p2(2, 2), q2(2, 2);
    p2 << 0.9, 0.1, 0.9, 0.1;
    q2 << 0.4, 0.6, 0.4, 0.6;
    CHECK(loss_cluster(p2, q2) == doctest::Approx(2.0 * single));
  }
  SUBCASE("KL is nonnegative on random distributions") {
    Rng rng(23);
    for (int trial = 0; trial < 100; ++trial) {
      const int k = 2 + static_cast<int>(rng.below(5));
      Mat p = random_mat(2, k, rng, 0.01, 1.0);
      Mat q = random_mat(2, k, rng, 0.01, 1.0);
      for (int i = 0; i < 2; ++i) {
        p.row(i) /= p.row(i).sum();
        q.row(i) /= q.row(i).sum();
      }
      CHECK(loss_cluster(p, q) >= -1e-12);
    }
  }
  SUBCASE("support violation is rejected") {
    Mat p(1, 2), q(1, 2);
    p << 0.5, 0.5;
    q << 1.0, 0.0;
    CHECK_THROWS_AS(loss_cluster(p, q), ValidationError);
  }
}

TEST_CASE("kmeans oracles") {
  Rng rng(29);
  SUBCASE("identical rows, k = 1") {
    const Mat pts = Mat::Ones(6, 3) * 2.5;
    Rng r(1);
    const KmeansResult res = kmeans(pts, 1, r);
    CHECK(res.centroids.row(0) == pts.row(0));
    CHECK(!res.degenerate);
  }
  SUBCASE("identical rows, k > 1 is degenerate") {
    const Mat pts = Mat::Ones(6, 3);
    Rng r(1);
    const KmeansResult res = kmeans(pts, 3, r);
    CHECK(res.degenerate);
    CHECK(res.centroids.rows() == 3);
    for (int j = 0; j < 3; ++j) CHECK(res.centroids.row(j) == pts.row(0));
  }
  SUBCASE("k = n with distinct rows reaches objective 0") {
    const Mat pts = random_mat(5, 2, rng);
    Rng r(2);
    const KmeansResult res = kmeans(pts, 5, r);
    CHECK(res.objective == doctest::Approx(0.0).epsilon(1e-9));
    std::vector<bool> hit(5, false);
    for (int j = 0; j < 5; ++j) {
      for (int i = 0; i < 5; ++i) {
        if ((res.centroids.row(j) - pts.row(i)).norm() < 1e-12) hit[i] = true;
      }
    }
    for (int i = 0; i < 5; ++i) CHECK(hit[i]);  // centroids are a permutation of the rows
  }
  SUBCASE("two separated blobs: centroids match the blob means") {
    // Brute-force oracle: best 2-partition of 12 points by exhaustive search.
    Mat pts(12, 2);
    Rng r(3);
    for (int i = 0; i < 6; ++i) pts.row(i) << 10.0 + r.uniform(-0.5, 0.5), r.uniform(-0.5, 0.5);
    for (int i = 6; i < 12; ++i) pts.row(i) << -10.0 + r.uniform(-0.5, 0.5), r.uniform(-0.5, 0.5);

    double best_obj = 1e18;
    Mat best_centroids(2, 2);
    for (int mask = 1; mask < (1 << 12) - 1; ++mask) {
      Mat sums = Mat::Zero(2, 2);
      int counts[2] = {0, 0};
      for (int i = 0; i < 12; ++i) {
        const int c = (mask >> i) & 1;
        sums.row(c) += pts.row(i);
        counts[c]++;
      }
      if (counts[0] == 0 || counts[1] == 0) continue;
      Mat centroids(2, 2);
      centroids.row(0) = sums.row(0) / counts[0];
      centroids.row(1) = sums.row(1) / counts[1];
      double obj = 0.0;
      for (int i = 0; i < 12; ++i) {
        const int c = (mask >> i) & 1;
        obj += (pts.row(i) - centroids.row(c)).squaredNorm();
      }
      if (obj < best_obj) {
        best_obj = obj;
        best_centroids = centroids;
      }
    }
    Rng r2(7);
    const KmeansResult res = kmeans(pts, 2, r2);
    CHECK(res.objective == doctest::Approx(best_obj).epsilon(1e-9));
    const bool direct = (res.centroids.row(0) - best_centroids.row(0)).norm() < 1e-6 &&
                        (res.centroids.row(1) - best_centroids.row(1)).norm() < 1e-6;
    const bool swapped = (res.centroids.row(0) - best_centroids.row(1)).norm() < 1e-6 &&
                         (res.centroids.row(1) - best_centroids.row(0)).norm() < 1e-6;
    CHECK((direct || swapped));
  }
  SUBCASE("k > n is rejected") {
    Rng r(1);
    CHECK_THROWS_AS(kmeans(Mat::Zero(2, 2), 3, r), ValidationError);
  }
}

TEST_CASE("pretext loss gradients match finite differences end to end") {
  // 6-node instance through both encoders, both decoders, the mask token,
  // and 2 prototypes, per loss term.
  Rng rng(31);
  const SocialGraph g = make_graph(6, {{{0, 1}, {1, 2}, {2, 3}, {4, 5}, {5, 0}}, {{3, 0}, {0, 4}}},
                                   {}, 3);
  const Mat x = random_mat(6, 3, rng);
  const GraphContext ctx = GraphContext::build(g);
  EncoderConfig cfg;
  cfg.feature_dim = 3;
  cfg.hidden_dim = 4;
  cfg.num_layers = 2;
  cfg.num_relations = 2;
  cfg.activation = Activation::Tanh;

  GraphAwareParams aware;
  GraphAgnosticParams agnostic;
  DecoderParams dec;
  init_params(cfg, 41, &aware, &agnostic, &dec);
  Mat token = random_mat(1, 3, rng);
  Mat protos = random_mat(2, 8, rng);
  const std::vector<int> masked = {1, 3, 4};
  const Mat corrupted = apply_feature_dropout(x, 0.3, rng);

  // The target distribution is a constant during backpropagation, so the
  // finite-difference oracle must hold it fixed as well.
  Mat p_target;
  {
    ad::Tape tp;
    Lifter lp(tp);
    GraphAwareVars av2 = lift(aware, lp);
    GraphAgnosticVars gv2 = lift(agnostic, lp);
    ad::Var hg2 = graph_aware_forward(tp, av2, cfg, ctx, tp.constant(x));
    ad::Var hl2 = graph_agnostic_forward(tp, gv2, cfg, tp.constant(x));
    p_target =
        target_distribution(tp.value(soft_assignment(tp, tp.concat_cols(hg2, hl2), lp(protos), 1.0)));
  }

  // One builder per loss; all parameters lifted each time so FD covers them.
  struct Scenario {
    const char* name;
    int which;  // 0 = L_N, 1 = L_E, 2 = L_S, 3 = L_C
  };
  for (const Scenario sc : {Scenario{"L_N", 0}, Scenario{"L_E", 1}, Scenario{"L_S", 2}, Scenario{"L_C", 3}}) {
    CAPTURE(sc.name);
    auto build_loss = [&](ad::Tape& t, Lifter& lifter) {
      GraphAwareVars av = lift(aware, lifter);
      GraphAgnosticVars gv = lift(agnostic, lifter);
      DecoderVars dv = lift(dec, lifter);
      ad::Var token_v = lifter(token);
      ad::Var protos_v = lifter(protos);
      switch (sc.which) {
        case 0: {
          ad::Var xt = t.mask_rows(t.constant(x), token_v, masked);
          ad::Var z = decode_g(t, dv, cfg, graph_aware_forward(t, av, cfg, ctx, xt));
          return loss_neighbor_recon(t, x, z, masked);
        }
        case 1: {
          ad::Var z = decode_l(t, dv, graph_agnostic_forward(t, gv, cfg, t.constant(corrupted)));
          return loss_ego_recon(t, x, z);
        }
        case 2: {
          ad::Var hg = graph_aware_forward(t, av, cfg, ctx, t.constant(x));
          ad::Var hl = graph_agnostic_forward(t, gv, cfg, t.constant(x));
          return loss_semantic_consistency(t, hg, hl, false);
        }
        default: {
          ad::Var hg = graph_aware_forward(t, av, cfg, ctx, t.constant(x));
          ad::Var hl = graph_agnostic_forward(t, gv, cfg, t.constant(x));
          ad::Var q = soft_assignment(t, t.concat_cols(hg, hl), protos_v, 1.0);
          return loss_cluster(t, p_target, q);
        }
      }
    };

    ad::Tape tape;
    Lifter lifter(tape);
    ad::Var loss = build_loss(tape, lifter);
    tape.backward(loss);

    auto eval = [&]() {
      ad::Tape t2;
      Lifter l2(t2);
      return t2.scalar(build_loss(t2, l2));
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
          if (rel >= 1e-4) {
            CAPTURE(ti);
            CAPTURE(r);
            CAPTURE(c);
            CAPTURE(ad_g);
            CAPTURE(fd);
          }
          REQUIRE(rel < 1e-4);
        }
      }
    }
  }
}

namespace {

SocialGraph tiny_pretrain_graph(int n, uint64_t seed) {
  SynthConfig cfg;
  cfg.num_nodes = n;
  cfg.bot_fraction = 0.4;
  cfg.target_homophily = 0.6;
  cfg.num_bot_clusters = 2;
  cfg.num_topo_communities = 2;
  cfg.feature_dim = 6;
  cfg.mean_degree = 4.0;
  cfg.relations = 2;
  cfg.seed = seed;
  return generate(cfg).first.graph;
}

}  // namespace

TEST_CASE("pretrain is deterministic given the seed") {
  const SocialGraph g = tiny_pretrain_graph(30, 3);
  EncoderConfig enc;
  enc.feature_dim = 6;
  enc.hidden_dim = 8;
  enc.num_relations = 2;
  PretrainConfig cfg;
  cfg.epochs = 2;
  cfg.schedule.total_epochs = 2;
  cfg.warmup_epochs = 0;
  cfg.num_prototypes = 3;
  cfg.seed = 99;

  PretrainCheckpoint a = pretrain(g, cfg, enc);
  PretrainCheckpoint b = pretrain(g, cfg, enc);
  const auto ta = named_tensors(a);
  const auto tb = named_tensors(b);
  REQUIRE(ta.size() == tb.size());
  for (size_t i = 0; i < ta.size(); ++i) {
    CHECK(ta[i].first == tb[i].first);
    CHECK(*ta[i].second == *tb[i].second);  // bit-identical
  }
}

TEST_CASE("pretrain reduces the combined loss on a 200-node graph") {
  const SocialGraph g = tiny_pretrain_graph(200, 5);
  EncoderConfig enc;
  enc.feature_dim = 6;
  enc.hidden_dim = 8;
  enc.num_relations = 2;
  PretrainConfig cfg;
  cfg.epochs = 50;
  cfg.schedule.total_epochs = 50;
  cfg.num_prototypes = 4;
  cfg.seed = 7;

  const PretrainCheckpoint ckpt = pretrain(g, cfg, enc);
  REQUIRE(ckpt.trace.size() == 50);
  CHECK(ckpt.trace.back().l_p < ckpt.trace.front().l_p);
  for (const auto& row : ckpt.trace) {
    CHECK(std::isfinite(row.l_p));
    CHECK(row.l_n >= 0.0);
    CHECK(row.l_e >= 0.0);
    CHECK(row.l_c >= -1e-12);
  }
}

TEST_CASE("target distribution refreshes follow the interval") {
  const SocialGraph g = tiny_pretrain_graph(40, 11);
  EncoderConfig enc;
  enc.feature_dim = 6;
  enc.hidden_dim = 4;
  enc.num_relations = 2;
  PretrainConfig cfg;
  cfg.epochs = 20;
  cfg.schedule.total_epochs = 20;
  cfg.warmup_epochs = 0;
  cfg.update_interval = 5;
  cfg.num_prototypes = 3;

  const PretrainCheckpoint ckpt = pretrain(g, cfg, enc);
  CHECK(ckpt.refresh_epochs == std::vector<int>{1, 6, 11, 16});
}

TEST_CASE("zeroed cluster weight keeps the L_C trace column at zero") {
  const SocialGraph g = tiny_pretrain_graph(40, 13);
  EncoderConfig enc;
  enc.feature_dim = 6;
  enc.hidden_dim = 4;
  enc.num_relations = 2;
  PretrainConfig cfg;
  cfg.epochs = 6;
  cfg.schedule.total_epochs = 6;
  cfg.w_cluster = 0.0;

  const PretrainCheckpoint ckpt = pretrain(g, cfg, enc);
  for (const auto& row : ckpt.trace) CHECK(row.l_c == 0.0);
  CHECK(!ckpt.prototypes.initialized);
}

TEST_CASE("pretrain validates its inputs") {
  const SocialGraph g = tiny_pretrain_graph(20, 17);
  EncoderConfig enc;
  enc.feature_dim = 6;
  enc.hidden_dim = 4;
  enc.num_relations = 2;
  PretrainConfig cfg;
  cfg.epochs = 4;
  cfg.schedule.total_epochs = 4;

  SUBCASE("prototype count above n") {
    cfg.num_prototypes = 21;
    CHECK_THROWS_AS(pretrain(g, cfg, enc), ValidationError);
  }
  SUBCASE("warmup not below epochs") {
    cfg.warmup_epochs = 4;
    CHECK_THROWS_AS(pretrain(g, cfg, enc), ValidationError);
  }
  SUBCASE("schedule epochs must match") {
    cfg.schedule.total_epochs = 5;
    CHECK_THROWS_AS(pretrain(g, cfg, enc), ValidationError);
  }
  SUBCASE("feature dim mismatch") {
    enc.feature_dim = 7;
    CHECK_THROWS_AS(pretrain(g, cfg, enc), ValidationError);
  }
}

TEST_SUITE_END();
