#include "core/config_json.hpp"

namespace bothp {

using nlohmann::json;

std::string arm_name(EncoderArm arm) {
  switch (arm) {
    case EncoderArm::Dual: return "dual";
    case EncoderArm::GraphAwareOnly: return "graph-aware-only";
    case EncoderArm::GraphAgnosticOnly: return "graph-agnostic-only";
  }
  return "dual";
}

EncoderArm arm_from_name(const std::string& name) {
  if (name == "dual") return EncoderArm::Dual;
  if (name == "graph-aware-only") return EncoderArm::GraphAwareOnly;
  if (name == "graph-agnostic-only") return EncoderArm::GraphAgnosticOnly;
  throw ValidationError("unknown encoder arm '" + name + "'");
}

json to_json(const EncoderConfig& cfg) {
  return json{{"feature_dim", cfg.feature_dim},
              {"hidden_dim", cfg.hidden_dim},
              {"num_layers", cfg.num_layers},
              {"num_relations", cfg.num_relations},
              {"activation", activation_name(cfg.activation)},
              {"graph_aware_variant", cfg.variant == GraphAwareVariant::RelationalMean
                                          ? "relational-mean"
                                          : "relational-attention"}};
}

EncoderConfig encoder_config_from_json(const json& j) {
  EncoderConfig cfg;
  cfg.feature_dim = j.value("feature_dim", cfg.feature_dim);
  cfg.hidden_dim = j.value("hidden_dim", cfg.hidden_dim);
  cfg.num_layers = j.value("num_layers", cfg.num_layers);
  cfg.num_relations = j.value("num_relations", cfg.num_relations);
  cfg.activation = activation_from_name(j.value("activation", activation_name(cfg.activation)));
  const std::string variant = j.value("graph_aware_variant", "relational-mean");
  if (variant == "relational-mean") {
    cfg.variant = GraphAwareVariant::RelationalMean;
  } else if (variant == "relational-attention") {
    cfg.variant = GraphAwareVariant::RelationalAttention;
  } else {
    throw ValidationError("unknown graph_aware_variant '" + variant + "'");
  }
  return cfg;
}

json to_json(const PretrainConfig& cfg) {
  return json{{"schedule",
               {{"p_start", cfg.schedule.p_start},
                {"p_end", cfg.schedule.p_end},
                {"total_epochs", cfg.schedule.total_epochs}}},
              {"dropout_p", cfg.dropout_p},
              {"weights",
               {{"neighbor", cfg.w_neighbor},
                {"ego", cfg.w_ego},
                {"semantic", cfg.w_semantic},
                {"cluster", cfg.w_cluster}}},
              {"warmup_epochs", cfg.warmup_epochs},
              {"learning_rate", cfg.learning_rate},
              {"epochs", cfg.epochs},
              {"num_prototypes", cfg.num_prototypes},
              {"student_alpha", cfg.student_alpha},
              {"update_interval", cfg.update_interval},
              {"standardize_semantic", cfg.standardize_semantic},
              {"arm", arm_name(cfg.arm)},
              {"seed", cfg.seed}};
}

PretrainConfig pretrain_config_from_json(const json& j) {
  PretrainConfig cfg;
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.schedule.total_epochs = cfg.epochs;
  if (j.contains("schedule")) {
    const json& s = j["schedule"];
    cfg.schedule.p_start = s.value("p_start", cfg.schedule.p_start);
    cfg.schedule.p_end = s.value("p_end", cfg.schedule.p_end);
    cfg.schedule.total_epochs = s.value("total_epochs", cfg.epochs);
  }
  if (j.contains("weights")) {
    const json& w = j["weights"];
    cfg.w_neighbor = w.value("neighbor", cfg.w_neighbor);
    cfg.w_ego = w.value("ego", cfg.w_ego);
    cfg.w_semantic = w.value("semantic", cfg.w_semantic);
    cfg.w_cluster = w.value("cluster", cfg.w_cluster);
  }
  cfg.dropout_p = j.value("dropout_p", cfg.dropout_p);
  cfg.warmup_epochs = j.value("warmup_epochs", cfg.warmup_epochs);
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.num_prototypes = j.value("num_prototypes", cfg.num_prototypes);
  cfg.student_alpha = j.value("student_alpha", cfg.student_alpha);
  cfg.update_interval = j.value("update_interval", cfg.update_interval);
  cfg.standardize_semantic = j.value("standardize_semantic", cfg.standardize_semantic);
  cfg.arm = arm_from_name(j.value("arm", arm_name(cfg.arm)));
  cfg.seed = j.value("seed", cfg.seed);
  return cfg;
}

json to_json(const FinetuneConfig& cfg) {
  return json{{"l2_lambda", cfg.l2_lambda},
              {"learning_rate", cfg.learning_rate},
              {"epochs", cfg.epochs},
              {"patience", cfg.patience},
              {"attention_dim", cfg.attention_dim},
              {"init_from", cfg.init_from == InitFrom::Checkpoint ? "checkpoint" : "random"},
              {"arm", arm_name(cfg.arm)},
              {"seed", cfg.seed}};
}

FinetuneConfig finetune_config_from_json(const json& j) {
  FinetuneConfig cfg;
  cfg.l2_lambda = j.value("l2_lambda", cfg.l2_lambda);
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.patience = j.value("patience", cfg.patience);
  cfg.attention_dim = j.value("attention_dim", cfg.attention_dim);
  const std::string init = j.value("init_from", "checkpoint");
  if (init == "checkpoint") cfg.init_from = InitFrom::Checkpoint;
  else if (init == "random") cfg.init_from = InitFrom::Random;
  else throw ValidationError("unknown init_from '" + init + "'");
  cfg.arm = arm_from_name(j.value("arm", arm_name(cfg.arm)));
  cfg.seed = j.value("seed", cfg.seed);
  return cfg;
}

json to_json(const SynthConfig& cfg) {
  return json{{"num_nodes", cfg.num_nodes},
              {"bot_fraction", cfg.bot_fraction},
              {"target_homophily", cfg.target_homophily},
              {"num_bot_clusters", cfg.num_bot_clusters},
              {"num_topo_communities", cfg.num_topo_communities},
              {"dispersion", cfg.dispersion},
              {"feature_dim", cfg.feature_dim},
              {"cluster_signal", cfg.cluster_signal},
              {"noise_sigma", cfg.noise_sigma},
              {"mean_degree", cfg.mean_degree},
              {"relations", cfg.relations},
              {"seed", cfg.seed}};
}

SynthConfig synth_config_from_json(const json& j) {
  SynthConfig cfg;
  cfg.num_nodes = j.value("num_nodes", cfg.num_nodes);
  cfg.bot_fraction = j.value("bot_fraction", cfg.bot_fraction);
  cfg.target_homophily = j.value("target_homophily", cfg.target_homophily);
  cfg.num_bot_clusters = j.value("num_bot_clusters", cfg.num_bot_clusters);
  cfg.num_topo_communities = j.value("num_topo_communities", cfg.num_topo_communities);
  cfg.dispersion = j.value("dispersion", cfg.dispersion);
  cfg.feature_dim = j.value("feature_dim", cfg.feature_dim);
  cfg.cluster_signal = j.value("cluster_signal", cfg.cluster_signal);
  cfg.noise_sigma = j.value("noise_sigma", cfg.noise_sigma);
  cfg.mean_degree = j.value("mean_degree", cfg.mean_degree);
  cfg.relations = j.value("relations", cfg.relations);
  cfg.seed = j.value("seed", cfg.seed);
  return cfg;
}

}  // namespace bothp
