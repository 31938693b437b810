#pragma once

#include "core/finetune.hpp"

#include <filesystem>

namespace bothp {

// Persistent tensor-registry format shared by checkpoints and models:
//   manifest.json  kind, configs, tensor table [{name, rows, cols, offset}], summaries
//   params.f32     concatenated row-major little-endian float32 blobs, manifest order
//   losses.csv     (checkpoints) epoch,L_N,L_E,L_S,L_C,L_P
//   trace.csv      (models) epoch,loss,val_f1
//
// Registry names:
//   graph_aware.layer{k}.self_w | .b | .rel{r}.w | .rel{r}.attn_dst | .rel{r}.attn_src
//   graph_agnostic.w0 | .b0 | .w1 | .b1
//   decoder_g.w0 | .b0 | .w1 | .b1     decoder_l.w | .b
//   mask_token   prototypes   fusion.w | .b | .q   head.w | .b

void save_checkpoint(const PretrainCheckpoint& ckpt, const std::filesystem::path& dir);
PretrainCheckpoint load_checkpoint(const std::filesystem::path& dir);

void save_model(const TrainedModel& model, const std::filesystem::path& dir);
TrainedModel load_model(const std::filesystem::path& dir);

// "pretrain_checkpoint" or "trained_model", read from manifest.json.
std::string artifact_kind(const std::filesystem::path& dir);

// Ordered (name, tensor) views used by save/load and the persistence tests.
std::vector<std::pair<std::string, Mat*>> named_tensors(PretrainCheckpoint& ckpt);
std::vector<std::pair<std::string, Mat*>> named_tensors(TrainedModel& model);

}  // namespace bothp
