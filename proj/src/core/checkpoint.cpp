#include "core/checkpoint.hpp"

#include "core/config_json.hpp"

#include <fstream>
#include <sstream>

namespace bothp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void collect(std::vector<std::pair<std::string, Mat*>>& out, GraphAwareParams& p) {
  for (size_t k = 0; k < p.layers.size(); ++k) {
    auto& layer = p.layers[k];
    const std::string prefix = "graph_aware.layer" + std::to_string(k);
    out.push_back({prefix + ".self_w", &layer.self_weight});
    for (size_t r = 0; r < layer.rel_weight.size(); ++r) {
      out.push_back({prefix + ".rel" + std::to_string(r) + ".w", &layer.rel_weight[r]});
    }
    for (size_t r = 0; r < layer.attn_dst.size(); ++r) {
      out.push_back({prefix + ".rel" + std::to_string(r) + ".attn_dst", &layer.attn_dst[r]});
      out.push_back({prefix + ".rel" + std::to_string(r) + ".attn_src", &layer.attn_src[r]});
    }
    out.push_back({prefix + ".b", &layer.bias});
  }
}

void collect(std::vector<std::pair<std::string, Mat*>>& out, GraphAgnosticParams& p) {
  if (p.w0.size() == 0) return;
  out.push_back({"graph_agnostic.w0", &p.w0});
  out.push_back({"graph_agnostic.b0", &p.b0});
  out.push_back({"graph_agnostic.w1", &p.w1});
  out.push_back({"graph_agnostic.b1", &p.b1});
}

void collect(std::vector<std::pair<std::string, Mat*>>& out, DecoderParams& p) {
  if (p.g_w0.size() > 0) {
    out.push_back({"decoder_g.w0", &p.g_w0});
    out.push_back({"decoder_g.b0", &p.g_b0});
    out.push_back({"decoder_g.w1", &p.g_w1});
    out.push_back({"decoder_g.b1", &p.g_b1});
  }
  if (p.l_w.size() > 0) {
    out.push_back({"decoder_l.w", &p.l_w});
    out.push_back({"decoder_l.b", &p.l_b});
  }
}

void write_blob(const fs::path& dir, const std::vector<std::pair<std::string, Mat*>>& tensors,
                json& manifest) {
  json table = json::array();
  std::ofstream blob(dir / "params.f32", std::ios::binary);
  if (!blob) throw ValidationError("cannot open " + (dir / "params.f32").string() + " for writing");
  long long offset = 0;
  for (const auto& [name, mat] : tensors) {
    if (mat->size() == 0) continue;
    table.push_back({{"name", name}, {"rows", mat->rows()}, {"cols", mat->cols()}, {"offset", offset}});
    for (Eigen::Index i = 0; i < mat->rows(); ++i) {
      for (Eigen::Index j = 0; j < mat->cols(); ++j) {
        const float f = static_cast<float>((*mat)(i, j));
        blob.write(reinterpret_cast<const char*>(&f), sizeof(float));
      }
    }
    offset += static_cast<long long>(mat->size()) * static_cast<long long>(sizeof(float));
  }
  manifest["tensors"] = std::move(table);
}

void read_blob(const fs::path& dir, const json& manifest,
               const std::vector<std::pair<std::string, Mat*>>& tensors) {
  std::ifstream blob(dir / "params.f32", std::ios::binary);
  if (!blob) throw ValidationError("cannot open " + (dir / "params.f32").string());
  std::vector<std::pair<std::string, Mat*>> by_name = tensors;
  size_t filled = 0;
  for (const auto& entry : manifest.at("tensors")) {
    const std::string name = entry.at("name").get<std::string>();
    Mat* dst = nullptr;
    for (auto& [n, m] : by_name) {
      if (n == name) {
        dst = m;
        break;
      }
    }
    if (!dst) throw ValidationError("manifest tensor '" + name + "' has no destination");
    const Eigen::Index rows = entry.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = entry.at("cols").get<Eigen::Index>();
    dst->resize(rows, cols);
    blob.seekg(entry.at("offset").get<long long>());
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        float f = 0.0f;
        blob.read(reinterpret_cast<char*>(&f), sizeof(float));
        if (!blob) throw ValidationError((dir / "params.f32").string() + ": truncated at tensor " + name);
        (*dst)(i, j) = static_cast<double>(f);
      }
    }
    ++filled;
  }
  (void)filled;
}

json read_manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw ValidationError("cannot open " + (dir / "manifest.json").string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError((dir / "manifest.json").string() + ": " + e.what());
  }
  return j;
}

void write_manifest(const fs::path& dir, const json& manifest) {
  std::ofstream out(dir / "manifest.json");
  if (!out) throw ValidationError("cannot open " + (dir / "manifest.json").string() + " for writing");
  out << manifest.dump(2) << "\n";
}

}  // namespace

std::vector<std::pair<std::string, Mat*>> named_tensors(PretrainCheckpoint& ckpt) {
  std::vector<std::pair<std::string, Mat*>> out;
  collect(out, ckpt.graph_aware);
  collect(out, ckpt.graph_agnostic);
  collect(out, ckpt.decoders);
  if (ckpt.mask_token.size() > 0) out.push_back({"mask_token", &ckpt.mask_token});
  if (ckpt.prototypes.centers.size() > 0) out.push_back({"prototypes", &ckpt.prototypes.centers});
  return out;
}

std::vector<std::pair<std::string, Mat*>> named_tensors(TrainedModel& model) {
  std::vector<std::pair<std::string, Mat*>> out;
  collect(out, model.graph_aware);
  collect(out, model.graph_agnostic);
  if (model.fusion.present()) {
    out.push_back({"fusion.w", &model.fusion.w});
    out.push_back({"fusion.b", &model.fusion.b});
    out.push_back({"fusion.q", &model.fusion.q});
  }
  out.push_back({"head.w", &model.head_w});
  out.push_back({"head.b", &model.head_b});
  return out;
}

void save_checkpoint(const PretrainCheckpoint& ckpt, const fs::path& dir) {
  fs::create_directories(dir);
  json manifest;
  manifest["kind"] = "pretrain_checkpoint";
  manifest["format_version"] = 1;
  manifest["encoder_config"] = to_json(ckpt.encoder_config);
  manifest["pretrain_config"] = to_json(ckpt.config);
  manifest["seed"] = ckpt.config.seed;
  manifest["refresh_epochs"] = ckpt.refresh_epochs;
  manifest["prototypes_meta"] = {{"alpha", ckpt.prototypes.alpha},
                                 {"update_interval", ckpt.prototypes.update_interval},
                                 {"initialized", ckpt.prototypes.initialized},
                                 {"degenerate_init", ckpt.prototypes.degenerate_init}};
  if (!ckpt.trace.empty()) {
    manifest["loss_summary"] = {{"epochs", ckpt.trace.size()},
                                {"initial_l_p", ckpt.trace.front().l_p},
                                {"final_l_p", ckpt.trace.back().l_p}};
  }
  auto tensors = named_tensors(const_cast<PretrainCheckpoint&>(ckpt));
  write_blob(dir, tensors, manifest);
  write_manifest(dir, manifest);

  std::ostringstream csv;
  csv << "epoch,L_N,L_E,L_S,L_C,L_P\n";
  csv.precision(17);
  for (const auto& row : ckpt.trace) {
    csv << row.epoch << ',' << row.l_n << ',' << row.l_e << ',' << row.l_s << ',' << row.l_c << ','
        << row.l_p << '\n';
  }
  std::ofstream out(dir / "losses.csv");
  out << csv.str();
}

PretrainCheckpoint load_checkpoint(const fs::path& dir) {
  const json manifest = read_manifest(dir);
  if (manifest.value("kind", "") != "pretrain_checkpoint") {
    throw ValidationError(dir.string() + ": not a pretrain checkpoint");
  }
  PretrainCheckpoint ckpt;
  ckpt.encoder_config = encoder_config_from_json(manifest.at("encoder_config"));
  ckpt.config = pretrain_config_from_json(manifest.at("pretrain_config"));
  if (manifest.contains("refresh_epochs")) {
    for (const auto& e : manifest["refresh_epochs"]) ckpt.refresh_epochs.push_back(e.get<int>());
  }

  // Pre-size the containers the registry names route into.
  const EncoderConfig& ec = ckpt.encoder_config;
  const bool has_aware = ckpt.config.arm != EncoderArm::GraphAgnosticOnly;
  if (has_aware) {
    ckpt.graph_aware.layers.resize(ec.num_layers);
    for (auto& layer : ckpt.graph_aware.layers) {
      layer.rel_weight.resize(ec.num_relations);
      if (ec.variant == GraphAwareVariant::RelationalAttention) {
        layer.attn_dst.resize(ec.num_relations);
        layer.attn_src.resize(ec.num_relations);
      }
    }
    ckpt.mask_token.resize(1, ec.feature_dim);
    ckpt.decoders.g_w0.resize(1, 1);  // placeholders so collect() lists them
    ckpt.decoders.g_b0.resize(1, 1);
    ckpt.decoders.g_w1.resize(1, 1);
    ckpt.decoders.g_b1.resize(1, 1);
  }
  const bool has_agnostic = ckpt.config.arm != EncoderArm::GraphAwareOnly;
  if (has_agnostic) {
    ckpt.graph_agnostic.w0.resize(1, 1);
    ckpt.graph_agnostic.b0.resize(1, 1);
    ckpt.graph_agnostic.w1.resize(1, 1);
    ckpt.graph_agnostic.b1.resize(1, 1);
    ckpt.decoders.l_w.resize(1, 1);
    ckpt.decoders.l_b.resize(1, 1);
  }
  if (ckpt.config.w_cluster > 0.0) ckpt.prototypes.centers.resize(1, 1);

  read_blob(dir, manifest, named_tensors(ckpt));

  if (manifest.contains("prototypes_meta")) {
    const json& pm = manifest["prototypes_meta"];
    ckpt.prototypes.alpha = pm.value("alpha", 1.0);
    ckpt.prototypes.update_interval = pm.value("update_interval", 1);
    ckpt.prototypes.initialized = pm.value("initialized", false);
    ckpt.prototypes.degenerate_init = pm.value("degenerate_init", false);
  }

  std::ifstream csv(dir / "losses.csv");
  if (csv) {
    std::string line;
    std::getline(csv, line);  // header
    while (std::getline(csv, line)) {
      if (line.empty()) continue;
      LossTraceRow row;
      char c;
      std::istringstream s(line);
      s >> row.epoch >> c >> row.l_n >> c >> row.l_e >> c >> row.l_s >> c >> row.l_c >> c >> row.l_p;
      ckpt.trace.push_back(row);
    }
  }
  return ckpt;
}

void save_model(const TrainedModel& model, const fs::path& dir) {
  fs::create_directories(dir);
  json manifest;
  manifest["kind"] = "trained_model";
  manifest["format_version"] = 1;
  manifest["encoder_config"] = to_json(model.encoder_config);
  manifest["finetune_config"] = to_json(model.config);
  manifest["seed"] = model.config.seed;
  manifest["best_epoch"] = model.best_epoch;
  auto tensors = named_tensors(const_cast<TrainedModel&>(model));
  write_blob(dir, tensors, manifest);
  write_manifest(dir, manifest);

  std::ostringstream csv;
  csv << "epoch,loss,val_f1\n";
  csv.precision(17);
  for (const auto& row : model.trace) csv << row.epoch << ',' << row.loss << ',' << row.val_f1 << '\n';
  std::ofstream out(dir / "trace.csv");
  out << csv.str();
}

TrainedModel load_model(const fs::path& dir) {
  const json manifest = read_manifest(dir);
  if (manifest.value("kind", "") != "trained_model") {
    throw ValidationError(dir.string() + ": not a trained model");
  }
  TrainedModel model;
  model.encoder_config = encoder_config_from_json(manifest.at("encoder_config"));
  model.config = finetune_config_from_json(manifest.at("finetune_config"));
  model.best_epoch = manifest.value("best_epoch", 0);

  const EncoderConfig& ec = model.encoder_config;
  const bool has_aware = model.config.arm != EncoderArm::GraphAgnosticOnly;
  if (has_aware) {
    model.graph_aware.layers.resize(ec.num_layers);
    for (auto& layer : model.graph_aware.layers) {
      layer.rel_weight.resize(ec.num_relations);
      if (ec.variant == GraphAwareVariant::RelationalAttention) {
        layer.attn_dst.resize(ec.num_relations);
        layer.attn_src.resize(ec.num_relations);
      }
    }
  }
  const bool has_agnostic = model.config.arm != EncoderArm::GraphAwareOnly;
  if (has_agnostic) {
    model.graph_agnostic.w0.resize(1, 1);
    model.graph_agnostic.b0.resize(1, 1);
    model.graph_agnostic.w1.resize(1, 1);
    model.graph_agnostic.b1.resize(1, 1);
  }
  if (has_aware && has_agnostic) {
    model.fusion.w.resize(1, 1);
    model.fusion.b.resize(1, 1);
    model.fusion.q.resize(1, 1);
  }
  model.head_w.resize(1, 1);
  model.head_b.resize(1, 1);

  read_blob(dir, manifest, named_tensors(model));

  std::ifstream csv(dir / "trace.csv");
  if (csv) {
    std::string line;
    std::getline(csv, line);
    while (std::getline(csv, line)) {
      if (line.empty()) continue;
      EpochTraceRow row;
      char c;
      std::istringstream s(line);
      s >> row.epoch >> c >> row.loss >> c >> row.val_f1;
      model.trace.push_back(row);
    }
  }
  return model;
}

std::string artifact_kind(const fs::path& dir) {
  const json manifest = read_manifest(dir);
  return manifest.value("kind", "");
}

}  // namespace bothp
