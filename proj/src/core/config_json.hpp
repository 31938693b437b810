#pragma once

#include "core/finetune.hpp"
#include "core/synth.hpp"

#include <json.hpp>

namespace bothp {

// JSON <-> typed configs. Readers apply defaults for missing keys and reject
// unknown enum strings; writers emit every field.

nlohmann::json to_json(const EncoderConfig& cfg);
EncoderConfig encoder_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PretrainConfig& cfg);
PretrainConfig pretrain_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const FinetuneConfig& cfg);
FinetuneConfig finetune_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SynthConfig& cfg);
SynthConfig synth_config_from_json(const nlohmann::json& j);

std::string arm_name(EncoderArm arm);
EncoderArm arm_from_name(const std::string& name);

}  // namespace bothp
