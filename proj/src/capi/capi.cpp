#include "bothp/bothp.h"

#include "core/config_json.hpp"
#include "core/harness.hpp"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>

using nlohmann::json;

struct bothp_dataset_t {
  bothp::DatasetBundle bundle;
};

struct bothp_checkpoint_t {
  bothp::PretrainCheckpoint ckpt;
};

struct bothp_model_t {
  bothp::TrainedModel model;
};

namespace {

thread_local std::string g_last_error;

bothp_status fail(bothp_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
bothp_status guarded(Fn&& fn) {
  try {
    fn();
    return BOTHP_OK;
  } catch (const bothp::ValidationError& e) {
    return fail(BOTHP_ERROR_VALIDATION, e.what());
  } catch (const bothp::TrainingError& e) {
    return fail(BOTHP_ERROR_TRAINING, e.what());
  } catch (const std::exception& e) {
    return fail(BOTHP_ERROR, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json parse_config(const char* config_json) {
  if (config_json == nullptr || config_json[0] == '\0') return json::object();
  json j = json::parse(config_json, nullptr, false);
  if (j.is_discarded()) throw bothp::ValidationError("config is not valid JSON");
  return j;
}

bothp::RunConfig run_config_from(const json& j, const bothp::SocialGraph& g) {
  bothp::RunConfig rc = bothp::default_run_config();
  const json run = j.value("run", j);  // accept flat or nested under "run"
  if (run.contains("encoder")) rc.encoder = bothp::encoder_config_from_json(run["encoder"]);
  if (run.contains("pretrain")) rc.pretrain = bothp::pretrain_config_from_json(run["pretrain"]);
  if (run.contains("finetune")) rc.finetune = bothp::finetune_config_from_json(run["finetune"]);
  rc.encoder.feature_dim = g.feature_dim();
  rc.encoder.num_relations = g.num_relations();
  return rc;
}

std::vector<uint64_t> seeds_from(const json& j) {
  std::vector<uint64_t> seeds;
  if (j.contains("seeds")) {
    for (const auto& s : j["seeds"]) seeds.push_back(s.get<uint64_t>());
  }
  if (seeds.empty()) seeds = {1, 2, 3, 4, 5};
  return seeds;
}

json metrics_json(const bothp::MetricsReport& m) {
  return json{{"accuracy", m.accuracy},
              {"f1", m.f1},
              {"precision", m.precision},
              {"recall", m.recall},
              {"tp", m.tp},
              {"fp", m.fp},
              {"fn", m.fn},
              {"tn", m.tn},
              {"precision_degenerate", m.precision_degenerate},
              {"recall_degenerate", m.recall_degenerate},
              {"f1_degenerate", m.f1_degenerate}};
}

}  // namespace

extern "C" {

const char* bothp_version(void) { return "0.1.0"; }

const char* bothp_last_error(void) { return g_last_error.c_str(); }

void bothp_free_string(char* s) { std::free(s); }

bothp_status bothp_dataset_generate(const char* config_json, bothp_dataset_t** out) {
  if (!out) return fail(BOTHP_ERROR_ARGUMENT, "out is null");
  return guarded([&] {
    const bothp::SynthConfig cfg = bothp::synth_config_from_json(parse_config(config_json));
    auto [bundle, truth] = bothp::generate(cfg);
    (void)truth;
    *out = new bothp_dataset_t{std::move(bundle)};
  });
}

bothp_status bothp_dataset_preset(const char* name, uint64_t seed, bothp_dataset_t** out) {
  if (!out || !name) return fail(BOTHP_ERROR_ARGUMENT, "name/out is null");
  return guarded([&] {
    bothp::SynthConfig cfg = bothp::preset(name);
    cfg.seed = seed;
    auto [bundle, truth] = bothp::generate(cfg);
    (void)truth;
    bundle.meta.name = name;
    *out = new bothp_dataset_t{std::move(bundle)};
  });
}

bothp_status bothp_dataset_load(const char* dir, bothp_dataset_t** out) {
  if (!out || !dir) return fail(BOTHP_ERROR_ARGUMENT, "dir/out is null");
  return guarded([&] { *out = new bothp_dataset_t{bothp::load_dataset(dir)}; });
}

bothp_status bothp_dataset_save(const bothp_dataset_t* ds, const char* dir) {
  if (!ds || !dir) return fail(BOTHP_ERROR_ARGUMENT, "ds/dir is null");
  return guarded([&] { bothp::save_dataset(ds->bundle, dir); });
}

bothp_status bothp_dataset_info(const bothp_dataset_t* ds, char** json_out) {
  if (!ds || !json_out) return fail(BOTHP_ERROR_ARGUMENT, "ds/json_out is null");
  return guarded([&] {
    const bothp::SocialGraph& g = ds->bundle.graph;
    json info;
    info["name"] = ds->bundle.meta.name;
    info["provenance"] = ds->bundle.meta.provenance;
    info["num_nodes"] = g.num_nodes;
    info["feature_dim"] = g.feature_dim();
    info["relations"] = g.relations;
    json edge_counts = json::array();
    for (const auto& rel : g.edges) edge_counts.push_back(rel.size());
    info["edges_per_relation"] = edge_counts;
    info["num_edges"] = g.num_edges();
    info["split_sizes"] = {{"train", g.train_idx.size()},
                           {"val", g.val_idx.size()},
                           {"test", g.test_idx.size()}};
    info["has_ground_truth"] = ds->bundle.ground_truth.has_value();
    bool fully_labeled = g.num_edges() > 0;
    for (const auto& rel : g.edges) {
      for (const auto& [s, d] : rel) {
        if (g.labels[s] == -1 || g.labels[d] == -1) fully_labeled = false;
      }
    }
    if (fully_labeled) info["edge_homophily"] = bothp::edge_homophily(g);
    *json_out = dup_string(info.dump(2));
  });
}

bothp_status bothp_dataset_augment_two_hop(const bothp_dataset_t* ds, int32_t relation,
                                           bothp_dataset_t** out) {
  if (!ds || !out) return fail(BOTHP_ERROR_ARGUMENT, "ds/out is null");
  return guarded([&] {
    bothp::DatasetBundle bundle = ds->bundle;
    bundle.graph = bothp::augment_two_hop(ds->bundle.graph, relation);
    *out = new bothp_dataset_t{std::move(bundle)};
  });
}

void bothp_dataset_free(bothp_dataset_t* ds) { delete ds; }

bothp_status bothp_pretrain(const bothp_dataset_t* ds, const char* config_json,
                            bothp_checkpoint_t** out) {
  if (!ds || !out) return fail(BOTHP_ERROR_ARGUMENT, "ds/out is null");
  return guarded([&] {
    const json j = parse_config(config_json);
    bothp::RunConfig rc = run_config_from(j, ds->bundle.graph);
    *out = new bothp_checkpoint_t{bothp::pretrain(ds->bundle.graph, rc.pretrain, rc.encoder)};
  });
}

bothp_status bothp_checkpoint_save(const bothp_checkpoint_t* ckpt, const char* dir) {
  if (!ckpt || !dir) return fail(BOTHP_ERROR_ARGUMENT, "ckpt/dir is null");
  return guarded([&] { bothp::save_checkpoint(ckpt->ckpt, dir); });
}

bothp_status bothp_checkpoint_load(const char* dir, bothp_checkpoint_t** out) {
  if (!dir || !out) return fail(BOTHP_ERROR_ARGUMENT, "dir/out is null");
  return guarded([&] { *out = new bothp_checkpoint_t{bothp::load_checkpoint(dir)}; });
}

void bothp_checkpoint_free(bothp_checkpoint_t* ckpt) { delete ckpt; }

bothp_status bothp_finetune(const bothp_dataset_t* ds, const bothp_checkpoint_t* ckpt,
                            const char* config_json, bothp_model_t** out) {
  if (!ds || !out) return fail(BOTHP_ERROR_ARGUMENT, "ds/out is null");
  return guarded([&] {
    const json j = parse_config(config_json);
    bothp::RunConfig rc = run_config_from(j, ds->bundle.graph);
    if (!ckpt) rc.finetune.init_from = bothp::InitFrom::Random;
    if (ckpt) {
      rc.encoder = ckpt->ckpt.encoder_config;  // encoder geometry travels with the checkpoint
    }
    *out = new bothp_model_t{
        bothp::finetune(ds->bundle.graph, ckpt ? &ckpt->ckpt : nullptr, rc.finetune, rc.encoder)};
  });
}

bothp_status bothp_model_save(const bothp_model_t* model, const char* dir) {
  if (!model || !dir) return fail(BOTHP_ERROR_ARGUMENT, "model/dir is null");
  return guarded([&] { bothp::save_model(model->model, dir); });
}

bothp_status bothp_model_load(const char* dir, bothp_model_t** out) {
  if (!dir || !out) return fail(BOTHP_ERROR_ARGUMENT, "dir/out is null");
  return guarded([&] { *out = new bothp_model_t{bothp::load_model(dir)}; });
}

void bothp_model_free(bothp_model_t* model) { delete model; }

bothp_status bothp_evaluate(const bothp_model_t* model, const bothp_dataset_t* ds, const char* split,
                            char** report_json_out) {
  if (!model || !ds || !split || !report_json_out) {
    return fail(BOTHP_ERROR_ARGUMENT, "model/ds/split/report_json_out is null");
  }
  return guarded([&] {
    const bothp::MetricsReport m = bothp::evaluate_on_split(model->model, ds->bundle.graph, split);
    json report = metrics_json(m);
    report["split"] = split;
    *report_json_out = dup_string(report.dump(2));
  });
}

bothp_status bothp_predict_csv(const bothp_model_t* model, const bothp_dataset_t* ds,
                               const char* csv_path) {
  if (!model || !ds || !csv_path) return fail(BOTHP_ERROR_ARGUMENT, "model/ds/csv_path is null");
  return guarded([&] { bothp::export_predictions(model->model, ds->bundle.graph, csv_path); });
}

bothp_status bothp_export_embeddings(const bothp_model_t* model, const bothp_dataset_t* ds,
                                     const char* csv_path) {
  if (!model || !ds || !csv_path) return fail(BOTHP_ERROR_ARGUMENT, "model/ds/csv_path is null");
  return guarded([&] { bothp::export_embeddings(model->model, ds->bundle.graph, csv_path); });
}

bothp_status bothp_embedding_std_analysis(const char* artifact_dir, const bothp_dataset_t* ds,
                                          char** report_json_out) {
  if (!artifact_dir || !ds || !report_json_out) {
    return fail(BOTHP_ERROR_ARGUMENT, "artifact_dir/ds/report_json_out is null");
  }
  return guarded([&] {
    const std::string kind = bothp::artifact_kind(artifact_dir);
    bothp::StdComparison cmp;
    if (kind == "pretrain_checkpoint") {
      cmp = bothp::embedding_std_analysis(bothp::load_checkpoint(artifact_dir), ds->bundle.graph);
    } else if (kind == "trained_model") {
      cmp = bothp::embedding_std_analysis(bothp::load_model(artifact_dir), ds->bundle.graph);
    } else {
      throw bothp::ValidationError(std::string(artifact_dir) + ": unknown artifact kind '" + kind + "'");
    }
    json report;
    report["sigma_g"] = std::vector<double>(cmp.sigma_g.data(), cmp.sigma_g.data() + cmp.sigma_g.size());
    report["sigma_l"] = std::vector<double>(cmp.sigma_l.data(), cmp.sigma_l.data() + cmp.sigma_l.size());
    report["wilcoxon_statistic"] = cmp.wilcoxon_statistic;
    report["p_value"] = cmp.p_value;
    report["alternative"] = "sigma_l > sigma_g";
    *report_json_out = dup_string(report.dump(2));
  });
}

bothp_status bothp_sweep(const bothp_dataset_t* ds, const char* kind, const char* config_json,
                         const char* out_dir) {
  if (!ds || !kind || !out_dir) return fail(BOTHP_ERROR_ARGUMENT, "ds/kind/out_dir is null");
  return guarded([&] {
    const json j = parse_config(config_json);
    const bothp::RunConfig rc = run_config_from(j, ds->bundle.graph);
    const std::vector<uint64_t> seeds = seeds_from(j);
    const std::string what = kind;
    const std::filesystem::path out(out_dir);
    std::filesystem::create_directories(out);

    json recorded;
    recorded["kind"] = what;
    recorded["seeds"] = seeds;
    recorded["run"] = {{"encoder", bothp::to_json(rc.encoder)},
                       {"pretrain", bothp::to_json(rc.pretrain)},
                       {"finetune", bothp::to_json(rc.finetune)}};

    if (what == "labels") {
      std::vector<double> fractions;
      if (j.contains("fractions")) {
        for (const auto& f : j["fractions"]) fractions.push_back(f.get<double>());
      }
      if (fractions.empty()) fractions = {0.1, 0.2, 0.4, 0.6, 0.8, 1.0};
      std::vector<bothp::Arm> arms;
      if (j.contains("arms")) {
        for (const auto& a : j["arms"]) arms.push_back(bothp::arm_from_label(a.get<std::string>()));
      }
      if (arms.empty()) arms = {bothp::Arm::BotHP, bothp::Arm::SupervisedGraphAware};
      recorded["fractions"] = fractions;
      const auto rows = bothp::label_efficiency_sweep(ds->bundle, fractions, arms, seeds, rc);
      bothp::write_label_efficiency_reports(rows, out);
    } else if (what == "cross-community") {
      const int cap = j.value("num_folds_cap", 6);
      std::vector<bothp::Arm> arms;
      if (j.contains("arms")) {
        for (const auto& a : j["arms"]) arms.push_back(bothp::arm_from_label(a.get<std::string>()));
      }
      if (arms.empty()) arms = {bothp::Arm::BotHP, bothp::Arm::SupervisedGraphAware};
      recorded["num_folds_cap"] = cap;
      const auto result = bothp::cross_community_eval(ds->bundle, cap, arms, seeds, rc);
      bothp::write_cross_community_reports(result, out);
    } else if (what == "prototypes" || what == "interval") {
      std::vector<int> values;
      if (j.contains("values")) {
        for (const auto& v : j["values"]) values.push_back(v.get<int>());
      }
      if (values.empty()) values = what == "prototypes" ? std::vector<int>{2, 4, 8, 16, 32}
                                                        : std::vector<int>{1, 3, 5, 10, 20};
      recorded["values"] = values;
      const auto axis =
          what == "prototypes" ? bothp::SweepAxis::Prototypes : bothp::SweepAxis::Interval;
      const auto rows = bothp::sensitivity_sweep(ds->bundle, axis, values, seeds, rc);
      bothp::write_sensitivity_reports(axis, rows, out);
    } else if (what == "ablation") {
      std::vector<bothp::AblationVariant> variants;
      if (j.contains("variants")) {
        for (const auto& v : j["variants"]) {
          variants.push_back(bothp::variant_from_label(v.get<std::string>()));
        }
      }
      if (variants.empty()) {
        variants = {bothp::AblationVariant::Full,  bothp::AblationVariant::NoGraphAware,
                    bothp::AblationVariant::NoGraphAgnostic, bothp::AblationVariant::NoNFR,
                    bothp::AblationVariant::NoEFR, bothp::AblationVariant::NoSC,
                    bothp::AblationVariant::NoPGCD};
      }
      const auto rows = bothp::ablation_run(ds->bundle, variants, seeds, rc);
      bothp::write_ablation_reports(rows, out);
    } else {
      throw bothp::ValidationError("unknown sweep kind '" + what +
                                   "' (expected labels|cross-community|prototypes|interval|ablation)");
    }

    std::ofstream cfg_out(out / "run_config.json");
    cfg_out << recorded.dump(2) << "\n";
  });
}

}  // extern "C"
