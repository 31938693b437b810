#include "core/harness.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

namespace bothp {

namespace fs = std::filesystem;

RunConfig default_run_config() {
  RunConfig rc;
  rc.encoder.hidden_dim = 32;
  rc.encoder.num_layers = 2;
  rc.pretrain.epochs = 100;
  rc.pretrain.schedule.total_epochs = rc.pretrain.epochs;
  rc.finetune.epochs = 200;
  rc.finetune.patience = 30;
  return rc;
}

std::string arm_label(Arm arm) {
  switch (arm) {
    case Arm::BotHP: return "bothp";
    case Arm::SupervisedGraphAware: return "supervised-graph-aware";
    case Arm::SupervisedGraphAgnostic: return "supervised-graph-agnostic";
    case Arm::NoPretrainDual: return "no-pretrain-dual";
  }
  return "bothp";
}

Arm arm_from_label(const std::string& label) {
  if (label == "bothp") return Arm::BotHP;
  if (label == "supervised-graph-aware") return Arm::SupervisedGraphAware;
  if (label == "supervised-graph-agnostic") return Arm::SupervisedGraphAgnostic;
  if (label == "no-pretrain-dual") return Arm::NoPretrainDual;
  throw ValidationError("unknown arm '" + label + "'");
}

std::string variant_label(AblationVariant v) {
  switch (v) {
    case AblationVariant::Full: return "full";
    case AblationVariant::NoGraphAware: return "no-graph-aware";
    case AblationVariant::NoGraphAgnostic: return "no-graph-agnostic";
    case AblationVariant::NoNFR: return "no-NFR";
    case AblationVariant::NoEFR: return "no-EFR";
    case AblationVariant::NoSC: return "no-SC";
    case AblationVariant::NoPGCD: return "no-PGCD";
  }
  return "full";
}

AblationVariant variant_from_label(const std::string& label) {
  for (AblationVariant v : {AblationVariant::Full, AblationVariant::NoGraphAware,
                            AblationVariant::NoGraphAgnostic, AblationVariant::NoNFR,
                            AblationVariant::NoEFR, AblationVariant::NoSC, AblationVariant::NoPGCD}) {
    if (variant_label(v) == label) return v;
  }
  throw ValidationError("unknown ablation variant '" + label + "'");
}

namespace {

EncoderConfig encoder_for(const SocialGraph& g, const RunConfig& rc) {
  EncoderConfig enc = rc.encoder;
  enc.feature_dim = g.feature_dim();
  enc.num_relations = g.num_relations();
  return enc;
}

}  // namespace

PretrainCheckpoint pretrain_for_arm(const SocialGraph& g, const RunConfig& rc, uint64_t seed) {
  PretrainConfig cfg = rc.pretrain;
  cfg.seed = seed;
  cfg.arm = EncoderArm::Dual;
  return pretrain(g, cfg, encoder_for(g, rc));
}

TrainedModel train_arm(const SocialGraph& g, Arm arm, const RunConfig& rc, uint64_t seed,
                       const PretrainCheckpoint* shared_checkpoint) {
  const EncoderConfig enc = encoder_for(g, rc);
  FinetuneConfig fcfg = rc.finetune;
  fcfg.seed = seed;
  switch (arm) {
    case Arm::BotHP: {
      fcfg.arm = EncoderArm::Dual;
      fcfg.init_from = InitFrom::Checkpoint;
      if (shared_checkpoint) return finetune(g, shared_checkpoint, fcfg, enc);
      const PretrainCheckpoint ckpt = pretrain_for_arm(g, rc, seed);
      return finetune(g, &ckpt, fcfg, enc);
    }
    case Arm::SupervisedGraphAware:
      fcfg.arm = EncoderArm::GraphAwareOnly;
      fcfg.init_from = InitFrom::Random;
      return finetune(g, nullptr, fcfg, enc);
    case Arm::SupervisedGraphAgnostic:
      fcfg.arm = EncoderArm::GraphAgnosticOnly;
      fcfg.init_from = InitFrom::Random;
      return finetune(g, nullptr, fcfg, enc);
    case Arm::NoPretrainDual:
      fcfg.arm = EncoderArm::Dual;
      fcfg.init_from = InitFrom::Random;
      return finetune(g, nullptr, fcfg, enc);
  }
  throw ValidationError("train_arm: unreachable");
}

MetricsReport evaluate_on_split(const TrainedModel& model, const SocialGraph& g,
                                const std::string& split) {
  const std::vector<int>* idx = nullptr;
  if (split == "train") idx = &g.train_idx;
  else if (split == "val") idx = &g.val_idx;
  else if (split == "test") idx = &g.test_idx;
  else throw ValidationError("evaluate_on_split: unknown split '" + split + "'");
  if (idx->empty()) throw ValidationError("evaluate_on_split: split '" + split + "' is empty");

  const Vec probs = predict(model, g);
  std::vector<int> pred, truth;
  pred.reserve(idx->size());
  truth.reserve(idx->size());
  for (int i : *idx) {
    pred.push_back(probs(i) > 0.5 ? 1 : 0);
    truth.push_back(g.labels[i]);
  }
  return compute_metrics(pred, truth);
}

std::vector<int> subsample_train_split(const SocialGraph& g, double fraction, Rng& rng) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ValidationError("subsample_train_split: fraction must be in (0, 1]");
  }
  if (fraction == 1.0) return g.train_idx;
  std::vector<int> out;
  for (int cls = 0; cls <= 1; ++cls) {
    std::vector<int> members;
    for (int i : g.train_idx) {
      if (g.labels[i] == cls) members.push_back(i);
    }
    if (members.empty()) continue;
    const int keep = static_cast<int>(std::floor(fraction * members.size()));
    if (keep == 0) {
      throw ValidationError("subsample_train_split: fraction " + std::to_string(fraction) +
                            " empties class " + std::to_string(cls));
    }
    rng.shuffle(members);
    members.resize(keep);
    out.insert(out.end(), members.begin(), members.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<LabelEfficiencyRow> label_efficiency_sweep(const DatasetBundle& ds,
                                                       const std::vector<double>& fractions,
                                                       const std::vector<Arm>& arms,
                                                       const std::vector<uint64_t>& seeds,
                                                       const RunConfig& rc) {
  const SocialGraph& g = ds.graph;
  if (fractions.empty() || arms.empty() || seeds.empty()) {
    throw ValidationError("label_efficiency_sweep: fractions, arms, and seeds must be nonempty");
  }
  const bool needs_pretrain =
      std::find(arms.begin(), arms.end(), Arm::BotHP) != arms.end();
  std::map<uint64_t, PretrainCheckpoint> checkpoints;
  if (needs_pretrain) {
    for (uint64_t seed : seeds) checkpoints.emplace(seed, pretrain_for_arm(g, rc, seed));
  }

  std::vector<LabelEfficiencyRow> rows;
  for (size_t fi = 0; fi < fractions.size(); ++fi) {
    for (Arm arm : arms) {
      for (uint64_t seed : seeds) {
        Rng sub_rng = Rng(seed).fork(100 + fi);
        SocialGraph sub = g;
        sub.train_idx = subsample_train_split(g, fractions[fi], sub_rng);
        const PretrainCheckpoint* ckpt = arm == Arm::BotHP ? &checkpoints.at(seed) : nullptr;
        const TrainedModel model = train_arm(sub, arm, rc, seed, ckpt);
        LabelEfficiencyRow row;
        row.fraction = fractions[fi];
        row.arm = arm;
        row.seed = seed;
        row.train_size = static_cast<int>(sub.train_idx.size());
        row.metrics = evaluate_on_split(model, sub, "test");
        rows.push_back(row);
      }
    }
  }
  return rows;
}

CrossCommunityResult cross_community_eval(const DatasetBundle& ds, int num_folds_cap,
                                          const std::vector<Arm>& arms,
                                          const std::vector<uint64_t>& seeds, const RunConfig& rc) {
  const SocialGraph& g = ds.graph;
  if (arms.empty() || seeds.empty()) {
    throw ValidationError("cross_community_eval: arms and seeds must be nonempty");
  }
  if (num_folds_cap < 2) throw ValidationError("cross_community_eval: num_folds_cap must be >= 2");

  CrossCommunityResult result;
  const LouvainResult louvain = louvain_partition(g, seeds.front());
  if (louvain.partition.num_communities < 2) {
    throw ValidationError("cross_community_eval: Louvain found a single community");
  }

  // Rank communities by size, keep those where both classes can survive a
  // 7/2/1 split, cap the count.
  std::vector<std::vector<int>> members(louvain.partition.num_communities);
  for (int i = 0; i < g.num_nodes; ++i) members[louvain.partition.assignment[i]].push_back(i);
  std::vector<int> order(members.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return members[a].size() > members[b].size(); });
  constexpr int kMinPerClass = 4;
  for (int c : order) {
    if (static_cast<int>(result.fold_community_ids.size()) >= num_folds_cap) break;
    int bots = 0, humans = 0;
    for (int i : members[c]) {
      if (g.labels[i] == 1) ++bots;
      else if (g.labels[i] == 0) ++humans;
    }
    if (bots < kMinPerClass || humans < kMinPerClass) {
      result.notices.push_back("community " + std::to_string(c) + " skipped (" +
                               std::to_string(bots) + " bots, " + std::to_string(humans) + " humans)");
      continue;
    }
    result.fold_community_ids.push_back(c);
    result.fold_sizes.push_back(static_cast<int>(members[c].size()));
  }
  const int folds = static_cast<int>(result.fold_community_ids.size());
  if (folds < 2) {
    throw ValidationError("cross_community_eval: fewer than two usable folds after class filtering");
  }

  // Build fold subgraphs with their own stratified splits.
  std::vector<SocialGraph> fold_graphs;
  for (int f = 0; f < folds; ++f) {
    SocialGraph sub = subgraph_by_communities(g, louvain.partition, {result.fold_community_ids[f]});
    std::vector<int> ids(sub.num_nodes);
    std::iota(ids.begin(), ids.end(), 0);
    Rng split_rng = Rng(seeds.front()).fork(200 + f);
    const SplitResult split = stratified_split(ids, sub.labels, 0.2, 0.1, split_rng);
    sub.train_idx = split.train;
    sub.val_idx = split.val;
    sub.test_idx = split.test;
    fold_graphs.push_back(std::move(sub));
  }

  for (Arm arm : arms) {
    Mat acc = Mat::Zero(folds, folds);
    for (uint64_t seed : seeds) {
      PretrainCheckpoint whole_graph_ckpt;
      const bool gsl = arm == Arm::BotHP;
      if (gsl) whole_graph_ckpt = pretrain_for_arm(g, rc, seed);
      for (int i = 0; i < folds; ++i) {
        const TrainedModel model =
            train_arm(fold_graphs[i], arm, rc, seed, gsl ? &whole_graph_ckpt : nullptr);
        for (int j = 0; j < folds; ++j) {
          const MetricsReport m = evaluate_on_split(model, fold_graphs[j], "test");
          acc(i, j) += m.accuracy / static_cast<double>(seeds.size());
        }
      }
    }
    CrossCommunityResult::ArmMatrix am;
    am.arm = arm;
    am.accuracy = acc;
    double off_sum = 0.0;
    int off_count = 0;
    for (int i = 0; i < folds; ++i) {
      for (int j = 0; j < folds; ++j) {
        if (i != j) {
          off_sum += acc(i, j);
          ++off_count;
        }
      }
    }
    am.off_diagonal_mean = off_count > 0 ? off_sum / off_count : 0.0;
    result.arms.push_back(std::move(am));
  }
  return result;
}

std::vector<SensitivityRow> sensitivity_sweep(const DatasetBundle& ds, SweepAxis axis,
                                              const std::vector<int>& values,
                                              const std::vector<uint64_t>& seeds, const RunConfig& rc) {
  if (values.empty() || seeds.empty()) {
    throw ValidationError("sensitivity_sweep: values and seeds must be nonempty");
  }
  const SocialGraph& g = ds.graph;
  std::vector<SensitivityRow> rows;
  for (int value : values) {
    RunConfig cell_rc = rc;
    if (axis == SweepAxis::Prototypes) cell_rc.pretrain.num_prototypes = value;
    else cell_rc.pretrain.update_interval = value;
    for (uint64_t seed : seeds) {
      const TrainedModel model = train_arm(g, Arm::BotHP, cell_rc, seed);
      SensitivityRow row;
      row.value = value;
      row.seed = seed;
      row.metrics = evaluate_on_split(model, g, "test");
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<AblationRow> ablation_run(const DatasetBundle& ds,
                                      const std::vector<AblationVariant>& variants,
                                      const std::vector<uint64_t>& seeds, const RunConfig& rc) {
  if (variants.empty() || seeds.empty()) {
    throw ValidationError("ablation_run: variants and seeds must be nonempty");
  }
  const SocialGraph& g = ds.graph;
  std::vector<AblationRow> rows;
  for (AblationVariant variant : variants) {
    RunConfig cell_rc = rc;
    EncoderArm arm = EncoderArm::Dual;
    switch (variant) {
      case AblationVariant::Full: break;
      case AblationVariant::NoGraphAware: arm = EncoderArm::GraphAgnosticOnly; break;
      case AblationVariant::NoGraphAgnostic: arm = EncoderArm::GraphAwareOnly; break;
      case AblationVariant::NoNFR: cell_rc.pretrain.w_neighbor = 0.0; break;
      case AblationVariant::NoEFR: cell_rc.pretrain.w_ego = 0.0; break;
      case AblationVariant::NoSC: cell_rc.pretrain.w_semantic = 0.0; break;
      case AblationVariant::NoPGCD: cell_rc.pretrain.w_cluster = 0.0; break;
    }
    cell_rc.pretrain.arm = arm;
    cell_rc.finetune.arm = arm;
    for (uint64_t seed : seeds) {
      PretrainConfig pcfg = cell_rc.pretrain;
      pcfg.seed = seed;
      const PretrainCheckpoint ckpt = pretrain(g, pcfg, encoder_for(g, cell_rc));
      FinetuneConfig fcfg = cell_rc.finetune;
      fcfg.seed = seed;
      fcfg.init_from = InitFrom::Checkpoint;
      const TrainedModel model = finetune(g, &ckpt, fcfg, encoder_for(g, cell_rc));
      AblationRow row;
      row.variant = variant;
      row.seed = seed;
      row.metrics = evaluate_on_split(model, g, "test");
      rows.push_back(row);
    }
  }
  return rows;
}

MetricsReport median_metrics(const std::vector<AblationRow>& rows, AblationVariant variant) {
  std::vector<MetricsReport> hits;
  for (const auto& r : rows) {
    if (r.variant == variant) hits.push_back(r.metrics);
  }
  if (hits.empty()) throw ValidationError("median_metrics: no rows for variant");
  std::sort(hits.begin(), hits.end(),
            [](const MetricsReport& a, const MetricsReport& b) { return a.accuracy < b.accuracy; });
  return hits[hits.size() / 2];
}

namespace {

std::pair<Mat, Mat> clean_embeddings(const GraphAwareParams& aware, const GraphAgnosticParams& agnostic,
                                     const EncoderConfig& enc, const SocialGraph& g) {
  const Mat feats = g.features_as_double();
  Mat hg = graph_aware_forward(aware, enc, g, feats);
  Mat hl = graph_agnostic_forward(agnostic, enc, feats);
  return {std::move(hg), std::move(hl)};
}

}  // namespace

StdComparison embedding_std_analysis(const PretrainCheckpoint& ckpt, const SocialGraph& g) {
  if (!ckpt.has_graph_aware() || !ckpt.has_graph_agnostic()) {
    throw ValidationError("embedding_std_analysis: needs both encoders");
  }
  auto [hg, hl] = clean_embeddings(ckpt.graph_aware, ckpt.graph_agnostic, ckpt.encoder_config, g);
  return compare_embedding_std(hg, hl);
}

StdComparison embedding_std_analysis(const TrainedModel& model, const SocialGraph& g) {
  if (!model.has_graph_aware() || !model.has_graph_agnostic()) {
    throw ValidationError("embedding_std_analysis: needs both encoders");
  }
  auto [hg, hl] = clean_embeddings(model.graph_aware, model.graph_agnostic, model.encoder_config, g);
  return compare_embedding_std(hg, hl);
}

void export_embeddings(const TrainedModel& model, const SocialGraph& g, const fs::path& csv_path) {
  if (!model.has_graph_aware() || !model.has_graph_agnostic()) {
    throw ValidationError("export_embeddings: needs the dual model");
  }
  auto [hg, hl] = clean_embeddings(model.graph_aware, model.graph_agnostic, model.encoder_config, g);
  const Mat u = fuse(hg, hl, model.fusion);
  const Eigen::Index dh = hg.cols();

  std::ofstream out(csv_path);
  if (!out) throw ValidationError("cannot open " + csv_path.string() + " for writing");
  out << "label";
  for (const char* block : {"u", "g", "l"}) {
    for (Eigen::Index k = 0; k < dh; ++k) out << ',' << block << k;
  }
  out << '\n';
  out.precision(9);  // float32 round-trip
  for (int i = 0; i < g.num_nodes; ++i) {
    out << g.labels[i];
    for (Eigen::Index k = 0; k < dh; ++k) out << ',' << static_cast<float>(u(i, k));
    for (Eigen::Index k = 0; k < dh; ++k) out << ',' << static_cast<float>(hg(i, k));
    for (Eigen::Index k = 0; k < dh; ++k) out << ',' << static_cast<float>(hl(i, k));
    out << '\n';
  }
}

void export_predictions(const TrainedModel& model, const SocialGraph& g, const fs::path& csv_path) {
  const Vec probs = predict(model, g);
  std::ofstream out(csv_path);
  if (!out) throw ValidationError("cannot open " + csv_path.string() + " for writing");
  out << "node,probability,label\n";
  out.precision(9);
  for (int i = 0; i < g.num_nodes; ++i) {
    out << i << ',' << probs(i) << ',' << (probs(i) > 0.5 ? 1 : 0) << '\n';
  }
}

namespace {

void write_metric_columns(std::ostream& out, const MetricsReport& m) {
  out << m.accuracy << ',' << m.f1 << ',' << m.precision << ',' << m.recall << ',' << m.tp << ','
      << m.fp << ',' << m.fn << ',' << m.tn;
}

struct MeanStd {
  double mean = 0.0, stddev = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd ms;
  if (xs.empty()) return ms;
  ms.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  double ss = 0.0;
  for (double x : xs) ss += (x - ms.mean) * (x - ms.mean);
  ms.stddev = xs.size() > 1 ? std::sqrt(ss / (xs.size() - 1)) : 0.0;
  return ms;
}

}  // namespace

void write_label_efficiency_reports(const std::vector<LabelEfficiencyRow>& rows, const fs::path& dir) {
  fs::create_directories(dir);
  std::ofstream out(dir / "label_efficiency.csv");
  out.precision(10);
  out << "fraction,arm,seed,train_size,accuracy,f1,precision,recall,tp,fp,fn,tn\n";
  for (const auto& r : rows) {
    out << r.fraction << ',' << arm_label(r.arm) << ',' << r.seed << ',' << r.train_size << ',';
    write_metric_columns(out, r.metrics);
    out << '\n';
  }

  // plot data: mean +- std per (fraction, arm)
  std::map<std::pair<double, std::string>, std::vector<std::pair<double, double>>> cells;
  for (const auto& r : rows) {
    cells[{r.fraction, arm_label(r.arm)}].push_back({r.metrics.accuracy, r.metrics.f1});
  }
  std::ofstream plot(dir / "label_efficiency_plot.csv");
  plot.precision(10);
  plot << "fraction,arm,mean_accuracy,std_accuracy,mean_f1,std_f1\n";
  for (const auto& [key, vals] : cells) {
    std::vector<double> accs, f1s;
    for (const auto& [a, f] : vals) {
      accs.push_back(a);
      f1s.push_back(f);
    }
    const MeanStd a = mean_std(accs);
    const MeanStd f = mean_std(f1s);
    plot << key.first << ',' << key.second << ',' << a.mean << ',' << a.stddev << ',' << f.mean << ','
         << f.stddev << '\n';
  }
}

void write_cross_community_reports(const CrossCommunityResult& result, const fs::path& dir) {
  fs::create_directories(dir);
  const int folds = static_cast<int>(result.fold_community_ids.size());
  for (const auto& am : result.arms) {
    std::ofstream out(dir / ("cross_community_" + arm_label(am.arm) + ".csv"));
    out.precision(10);
    out << "train_fold";
    for (int j = 0; j < folds; ++j) out << ",test_fold_" << result.fold_community_ids[j];
    out << '\n';
    for (int i = 0; i < folds; ++i) {
      out << result.fold_community_ids[i];
      for (int j = 0; j < folds; ++j) out << ',' << am.accuracy(i, j);
      out << '\n';
    }
  }
  std::ofstream summary(dir / "cross_community_summary.csv");
  summary.precision(10);
  summary << "arm,num_folds,off_diagonal_mean,delta_vs_supervised-graph-aware\n";
  double supervised = std::numeric_limits<double>::quiet_NaN();
  for (const auto& am : result.arms) {
    if (am.arm == Arm::SupervisedGraphAware) supervised = am.off_diagonal_mean;
  }
  for (const auto& am : result.arms) {
    summary << arm_label(am.arm) << ',' << folds << ',' << am.off_diagonal_mean << ',';
    if (std::isnan(supervised)) summary << "";
    else summary << am.off_diagonal_mean - supervised;
    summary << '\n';
  }
  if (!result.notices.empty()) {
    std::ofstream notes(dir / "cross_community_notices.txt");
    for (const auto& n : result.notices) notes << n << '\n';
  }
}

void write_sensitivity_reports(SweepAxis axis, const std::vector<SensitivityRow>& rows,
                               const fs::path& dir) {
  fs::create_directories(dir);
  const std::string name = axis == SweepAxis::Prototypes ? "prototypes" : "interval";
  std::ofstream out(dir / ("sensitivity_" + name + ".csv"));
  out.precision(10);
  out << "value,seed,accuracy,f1,precision,recall,tp,fp,fn,tn\n";
  for (const auto& r : rows) {
    out << r.value << ',' << r.seed << ',';
    write_metric_columns(out, r.metrics);
    out << '\n';
  }
  std::map<int, std::vector<double>> cells;
  for (const auto& r : rows) cells[r.value].push_back(r.metrics.accuracy);
  std::ofstream plot(dir / ("sensitivity_" + name + "_summary.csv"));
  plot.precision(10);
  plot << "value,mean_accuracy,std_accuracy,runs\n";
  for (const auto& [value, accs] : cells) {
    const MeanStd ms = mean_std(accs);
    plot << value << ',' << ms.mean << ',' << ms.stddev << ',' << accs.size() << '\n';
  }
}

void write_ablation_reports(const std::vector<AblationRow>& rows, const fs::path& dir) {
  fs::create_directories(dir);
  std::ofstream out(dir / "ablation.csv");
  out.precision(10);
  out << "variant,seed,accuracy,f1,precision,recall,tp,fp,fn,tn\n";
  for (const auto& r : rows) {
    out << variant_label(r.variant) << ',' << r.seed << ',';
    write_metric_columns(out, r.metrics);
    out << '\n';
  }
  std::map<std::string, std::vector<double>> cells;
  for (const auto& r : rows) cells[variant_label(r.variant)].push_back(r.metrics.accuracy);
  std::ofstream plot(dir / "ablation_summary.csv");
  plot.precision(10);
  plot << "variant,median_accuracy,mean_accuracy,std_accuracy,runs\n";
  for (auto& [variant, accs] : cells) {
    std::vector<double> sorted = accs;
    std::sort(sorted.begin(), sorted.end());
    const MeanStd ms = mean_std(accs);
    plot << variant << ',' << sorted[sorted.size() / 2] << ',' << ms.mean << ',' << ms.stddev << ','
         << accs.size() << '\n';
  }
}

}  // namespace bothp
