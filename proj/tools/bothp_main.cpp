// Command-line front end for the bothp shared library. Every core operation
// goes through the C API in bothp/bothp.h; this file only parses arguments,
// merges config files, and maps statuses to exit codes (0 ok, 2 validation
// error, 3 training abort, 1 anything else).

#include <bothp/bothp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

using nlohmann::json;

namespace {

int exit_code_for(bothp_status status) {
  switch (status) {
    case BOTHP_OK: return 0;
    case BOTHP_ERROR_VALIDATION: return 2;
    case BOTHP_ERROR_ARGUMENT: return 2;
    case BOTHP_ERROR_TRAINING: return 3;
    default: return 1;
  }
}

int report_failure(bothp_status status) {
  std::cerr << "error: " << bothp_last_error() << "\n";
  return exit_code_for(status);
}

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open config file " << path << "\n";
    std::exit(2);
  }
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    std::cerr << "error: " << path << " is not valid JSON\n";
    std::exit(2);
  }
  return j;
}

struct DatasetGuard {
  bothp_dataset_t* handle = nullptr;
  ~DatasetGuard() { bothp_dataset_free(handle); }
};

struct CheckpointGuard {
  bothp_checkpoint_t* handle = nullptr;
  ~CheckpointGuard() { bothp_checkpoint_free(handle); }
};

struct ModelGuard {
  bothp_model_t* handle = nullptr;
  ~ModelGuard() { bothp_model_free(handle); }
};

int load_data_or_exit(const std::string& dir, DatasetGuard& ds) {
  const bothp_status st = bothp_dataset_load(dir.c_str(), &ds.handle);
  if (st != BOTHP_OK) return report_failure(st);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bothp: dual-encoder graph self-supervised bot detection pipeline"};
  app.require_subcommand(1);

  // ---- generate ----
  auto* generate = app.add_subcommand("generate", "Generate a synthetic dataset");
  std::string gen_preset, gen_config, gen_out;
  std::optional<uint64_t> gen_seed;
  generate->add_option("--preset", gen_preset, "camouflage|homophilic");
  generate->add_option("--config", gen_config, "generator config JSON file");
  generate->add_option("--out", gen_out, "output dataset directory")->required();
  generate->add_option("--seed", gen_seed, "generator seed");
  generate->callback([&] {
    DatasetGuard ds;
    bothp_status st;
    if (!gen_preset.empty()) {
      st = bothp_dataset_preset(gen_preset.c_str(), gen_seed.value_or(1), &ds.handle);
    } else {
      json cfg = load_config_file(gen_config);
      if (gen_seed) cfg["seed"] = *gen_seed;
      st = bothp_dataset_generate(cfg.dump().c_str(), &ds.handle);
    }
    if (st != BOTHP_OK) std::exit(report_failure(st));
    st = bothp_dataset_save(ds.handle, gen_out.c_str());
    if (st != BOTHP_OK) std::exit(report_failure(st));
    char* info = nullptr;
    if (bothp_dataset_info(ds.handle, &info) == BOTHP_OK) {
      std::cout << info << "\n";
      bothp_free_string(info);
    }
    std::cout << "dataset written to " << gen_out << "\n";
  });

  // ---- pretrain ----
  auto* pretrain = app.add_subcommand("pretrain", "Pre-train the dual encoder");
  std::string pre_data, pre_config, pre_out;
  std::optional<uint64_t> pre_seed;
  pretrain->add_option("--data", pre_data, "dataset directory")->required();
  pretrain->add_option("--config", pre_config, "run config JSON file");
  pretrain->add_option("--out", pre_out, "checkpoint output directory")->required();
  pretrain->add_option("--seed", pre_seed, "pre-training seed");
  pretrain->callback([&] {
    DatasetGuard ds;
    if (int rc = load_data_or_exit(pre_data, ds); rc != 0) std::exit(rc);
    json cfg = load_config_file(pre_config);
    if (pre_seed) cfg["pretrain"]["seed"] = *pre_seed;
    CheckpointGuard ckpt;
    bothp_status st = bothp_pretrain(ds.handle, cfg.dump().c_str(), &ckpt.handle);
    if (st != BOTHP_OK) std::exit(report_failure(st));
    st = bothp_checkpoint_save(ckpt.handle, pre_out.c_str());
    if (st != BOTHP_OK) std::exit(report_failure(st));
    std::cout << "checkpoint written to " << pre_out << "\n";
  });

  // ---- finetune ----
  auto* finetune = app.add_subcommand("finetune", "Fine-tune for bot detection");
  std::string ft_data, ft_config, ft_ckpt, ft_out;
  bool ft_scratch = false;
  std::optional<uint64_t> ft_seed;
  finetune->add_option("--data", ft_data, "dataset directory")->required();
  finetune->add_option("--config", ft_config, "run config JSON file");
  auto* ckpt_opt = finetune->add_option("--ckpt", ft_ckpt, "pre-trained checkpoint directory");
  finetune->add_flag("--from-scratch", ft_scratch, "random initialization (no checkpoint)");
  finetune->add_option("--out", ft_out, "model output directory")->required();
  finetune->add_option("--seed", ft_seed, "fine-tuning seed");
  ckpt_opt->excludes("--from-scratch");
  finetune->callback([&] {
    if (ft_ckpt.empty() && !ft_scratch) {
      std::cerr << "error: pass --ckpt DIR or --from-scratch\n";
      std::exit(2);
    }
    DatasetGuard ds;
    if (int rc = load_data_or_exit(ft_data, ds); rc != 0) std::exit(rc);
    CheckpointGuard ckpt;
    if (!ft_ckpt.empty()) {
      const bothp_status st = bothp_checkpoint_load(ft_ckpt.c_str(), &ckpt.handle);
      if (st != BOTHP_OK) std::exit(report_failure(st));
    }
    json cfg = load_config_file(ft_config);
    if (ft_seed) cfg["finetune"]["seed"] = *ft_seed;
    ModelGuard model;
    bothp_status st = bothp_finetune(ds.handle, ckpt.handle, cfg.dump().c_str(), &model.handle);
    if (st != BOTHP_OK) std::exit(report_failure(st));
    st = bothp_model_save(model.handle, ft_out.c_str());
    if (st != BOTHP_OK) std::exit(report_failure(st));
    std::cout << "model written to " << ft_out << "\n";
  });

  // ---- evaluate ----
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a trained model");
  std::string ev_data, ev_model, ev_report, ev_split = "test", ev_predictions, ev_embeddings;
  evaluate->add_option("--data", ev_data, "dataset directory")->required();
  evaluate->add_option("--model", ev_model, "trained model directory")->required();
  evaluate->add_option("--report", ev_report, "metrics report JSON output path")->required();
  evaluate->add_option("--split", ev_split, "train|val|test (default test)");
  evaluate->add_option("--predictions", ev_predictions, "also write predictions CSV here");
  evaluate->add_option("--embeddings", ev_embeddings, "also write embeddings CSV here");
  evaluate->callback([&] {
    DatasetGuard ds;
    if (int rc = load_data_or_exit(ev_data, ds); rc != 0) std::exit(rc);
    ModelGuard model;
    bothp_status st = bothp_model_load(ev_model.c_str(), &model.handle);
    if (st != BOTHP_OK) std::exit(report_failure(st));
    char* report = nullptr;
    st = bothp_evaluate(model.handle, ds.handle, ev_split.c_str(), &report);
    if (st != BOTHP_OK) std::exit(report_failure(st));
    std::ofstream out(ev_report);
    if (!out) {
      std::cerr << "error: cannot open " << ev_report << " for writing\n";
      bothp_free_string(report);
      std::exit(2);
    }
    out << report << "\n";
    std::cout << report << "\n";
    bothp_free_string(report);
    if (!ev_predictions.empty()) {
      st = bothp_predict_csv(model.handle, ds.handle, ev_predictions.c_str());
      if (st != BOTHP_OK) std::exit(report_failure(st));
    }
    if (!ev_embeddings.empty()) {
      st = bothp_export_embeddings(model.handle, ds.handle, ev_embeddings.c_str());
      if (st != BOTHP_OK) std::exit(report_failure(st));
    }
  });

  // ---- sweep ----
  auto* sweep = app.add_subcommand("sweep", "Run an experiment protocol");
  std::string sw_kind, sw_data, sw_out, sw_config;
  std::optional<uint64_t> sw_seed;
  sweep->add_option("kind", sw_kind, "labels|cross-community|prototypes|interval|ablation")->required();
  sweep->add_option("--data", sw_data, "dataset directory")->required();
  sweep->add_option("--out", sw_out, "report output directory")->required();
  sweep->add_option("--config", sw_config, "sweep config JSON file");
  sweep->add_option("--seed", sw_seed, "base seed (expands to 5 seeds when none configured)");
  sweep->callback([&] {
    DatasetGuard ds;
    if (int rc = load_data_or_exit(sw_data, ds); rc != 0) std::exit(rc);
    json cfg = load_config_file(sw_config);
    if (sw_seed && !cfg.contains("seeds")) {
      json seeds = json::array();
      for (uint64_t s = *sw_seed; s < *sw_seed + 5; ++s) seeds.push_back(s);
      cfg["seeds"] = seeds;
    }
    const bothp_status st = bothp_sweep(ds.handle, sw_kind.c_str(), cfg.dump().c_str(), sw_out.c_str());
    if (st != BOTHP_OK) std::exit(report_failure(st));
    std::cout << "reports written to " << sw_out << "\n";
  });

  // ---- analyze ----
  auto* analyze = app.add_subcommand("analyze", "Analyses over trained artifacts");
  auto* embstd = analyze->add_subcommand("embedding-std", "Per-dimension embedding std comparison");
  std::string an_model, an_data, an_report;
  embstd->add_option("--model", an_model, "checkpoint or model directory")->required();
  embstd->add_option("--data", an_data, "dataset directory")->required();
  embstd->add_option("--report", an_report, "write the JSON report here (default stdout only)");
  embstd->callback([&] {
    DatasetGuard ds;
    if (int rc = load_data_or_exit(an_data, ds); rc != 0) std::exit(rc);
    char* report = nullptr;
    const bothp_status st = bothp_embedding_std_analysis(an_model.c_str(), ds.handle, &report);
    if (st != BOTHP_OK) std::exit(report_failure(st));
    std::cout << report << "\n";
    if (!an_report.empty()) {
      std::ofstream out(an_report);
      out << report << "\n";
    }
    bothp_free_string(report);
  });
  analyze->require_subcommand(1);

  CLI11_PARSE(app, argc, argv);
  return 0;
}
