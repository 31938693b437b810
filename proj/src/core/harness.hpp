#pragma once

#include "core/checkpoint.hpp"
#include "core/dataset_io.hpp"
#include "core/metrics.hpp"
#include "core/synth.hpp"

#include <filesystem>
#include <map>

namespace bothp {

// One experiment pipeline configuration (encoder dims are filled in from the
// dataset when a protocol runs).
struct RunConfig {
  EncoderConfig encoder;
  PretrainConfig pretrain;
  FinetuneConfig finetune;
};

RunConfig default_run_config();

// Experiment arms shared by the label-efficiency and cross-community protocols.
enum class Arm { BotHP, SupervisedGraphAware, SupervisedGraphAgnostic, NoPretrainDual };

std::string arm_label(Arm arm);
Arm arm_from_label(const std::string& label);

enum class AblationVariant { Full, NoGraphAware, NoGraphAgnostic, NoNFR, NoEFR, NoSC, NoPGCD };

std::string variant_label(AblationVariant v);
AblationVariant variant_from_label(const std::string& label);

// ---- protocol primitives ----

// Train one arm on `g` (pretraining, when the arm calls for it, runs on
// `pretrain_graph`, which defaults to `g`) and return the fine-tuned model.
TrainedModel train_arm(const SocialGraph& g, Arm arm, const RunConfig& rc, uint64_t seed,
                       const PretrainCheckpoint* shared_checkpoint = nullptr);

// Pretrain the dual encoder for the GSL arms; labels are never consulted.
PretrainCheckpoint pretrain_for_arm(const SocialGraph& g, const RunConfig& rc, uint64_t seed);

MetricsReport evaluate_on_split(const TrainedModel& model, const SocialGraph& g,
                                const std::string& split);

// Stratified per-class floor(fraction * n) subsample of the train split;
// throws when a class would come back empty.
std::vector<int> subsample_train_split(const SocialGraph& g, double fraction, Rng& rng);

// ---- protocols ----

struct LabelEfficiencyRow {
  double fraction = 0.0;
  Arm arm = Arm::BotHP;
  uint64_t seed = 0;
  int train_size = 0;
  MetricsReport metrics;
};

std::vector<LabelEfficiencyRow> label_efficiency_sweep(const DatasetBundle& ds,
                                                       const std::vector<double>& fractions,
                                                       const std::vector<Arm>& arms,
                                                       const std::vector<uint64_t>& seeds,
                                                       const RunConfig& rc);

struct CrossCommunityResult {
  std::vector<int> fold_community_ids;  // Louvain ids of the retained folds
  std::vector<int> fold_sizes;
  std::vector<std::string> notices;  // skipped folds etc.
  struct ArmMatrix {
    Arm arm = Arm::BotHP;
    Mat accuracy;  // folds x folds, averaged over seeds
    double off_diagonal_mean = 0.0;
  };
  std::vector<ArmMatrix> arms;
};

CrossCommunityResult cross_community_eval(const DatasetBundle& ds, int num_folds_cap,
                                          const std::vector<Arm>& arms,
                                          const std::vector<uint64_t>& seeds, const RunConfig& rc);

enum class SweepAxis { Prototypes, Interval };

struct SensitivityRow {
  int value = 0;
  uint64_t seed = 0;
  MetricsReport metrics;
};

std::vector<SensitivityRow> sensitivity_sweep(const DatasetBundle& ds, SweepAxis axis,
                                              const std::vector<int>& values,
                                              const std::vector<uint64_t>& seeds, const RunConfig& rc);

struct AblationRow {
  AblationVariant variant = AblationVariant::Full;
  uint64_t seed = 0;
  MetricsReport metrics;
};

std::vector<AblationRow> ablation_run(const DatasetBundle& ds,
                                      const std::vector<AblationVariant>& variants,
                                      const std::vector<uint64_t>& seeds, const RunConfig& rc);

// Median (by accuracy) of one variant's rows.
MetricsReport median_metrics(const std::vector<AblationRow>& rows, AblationVariant variant);

// ---- analyses and exports ----

StdComparison embedding_std_analysis(const PretrainCheckpoint& ckpt, const SocialGraph& g);
StdComparison embedding_std_analysis(const TrainedModel& model, const SocialGraph& g);

// CSV schema: label,u0..u{dh-1},g0..g{dh-1},l0..l{dh-1}; float32 precision.
void export_embeddings(const TrainedModel& model, const SocialGraph& g,
                       const std::filesystem::path& csv_path);

// CSV schema: node,probability,label (predicted label at threshold 0.5).
void export_predictions(const TrainedModel& model, const SocialGraph& g,
                        const std::filesystem::path& csv_path);

// ---- report writers used by the CLI layer ----

void write_label_efficiency_reports(const std::vector<LabelEfficiencyRow>& rows,
                                    const std::filesystem::path& out_dir);
void write_cross_community_reports(const CrossCommunityResult& result,
                                   const std::filesystem::path& out_dir);
void write_sensitivity_reports(SweepAxis axis, const std::vector<SensitivityRow>& rows,
                               const std::filesystem::path& out_dir);
void write_ablation_reports(const std::vector<AblationRow>& rows,
                            const std::filesystem::path& out_dir);

}  // namespace bothp
