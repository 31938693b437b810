#include "core/dataset_io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace bothp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ValidationError("cannot open " + p.string() + " for writing");
  out << text;
}

json read_json(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + p.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError(p.string() + ": " + e.what());
  }
  return j;
}

std::vector<int> int_list(const json& j, const fs::path& p, const char* key) {
  if (!j.contains(key)) throw ValidationError(p.string() + ": missing key '" + key + "'");
  std::vector<int> out;
  for (const auto& v : j.at(key)) out.push_back(v.get<int>());
  return out;
}

}  // namespace

void save_dataset(const DatasetBundle& bundle, const fs::path& dir) {
  const auto violations = validate(bundle.graph);
  if (!violations.empty()) {
    throw ValidationError("save_dataset: invalid graph: " + violations.front());
  }
  fs::create_directories(dir);
  const SocialGraph& g = bundle.graph;

  json meta;
  meta["name"] = bundle.meta.name;
  meta["num_nodes"] = g.num_nodes;
  meta["feature_dim"] = g.feature_dim();
  meta["relations"] = g.relations;
  meta["has_ground_truth"] = bundle.ground_truth.has_value();
  if (bundle.meta.generator_seed) meta["generator_seed"] = *bundle.meta.generator_seed;
  write_text(dir / "meta.json", meta.dump(2) + "\n");

  {
    std::ofstream out(dir / "features.f32", std::ios::binary);
    if (!out) throw ValidationError("cannot open " + (dir / "features.f32").string() + " for writing");
    if (g.features.size() > 0) {
      out.write(reinterpret_cast<const char*>(g.features.data()),
                static_cast<std::streamsize>(sizeof(float) * g.features.size()));
    }
  }

  {
    std::ostringstream out;
    out << "src,dst,relation\n";
    for (size_t r = 0; r < g.edges.size(); ++r) {
      for (const auto& [src, dst] : g.edges[r]) out << src << ',' << dst << ',' << r << '\n';
    }
    write_text(dir / "edges.csv", out.str());
  }

  {
    std::ostringstream out;
    out << "node,label\n";
    for (int i = 0; i < g.num_nodes; ++i) out << i << ',' << g.labels[i] << '\n';
    write_text(dir / "labels.csv", out.str());
  }

  json splits;
  splits["train"] = g.train_idx;
  splits["val"] = g.val_idx;
  splits["test"] = g.test_idx;
  write_text(dir / "splits.json", splits.dump() + "\n");

  if (bundle.ground_truth) {
    json gt;
    gt["labels"] = bundle.ground_truth->labels;
    gt["bot_cluster"] = bundle.ground_truth->bot_cluster;
    gt["topo_community"] = bundle.ground_truth->topo_community;
    write_text(dir / "ground_truth.json", gt.dump() + "\n");
  }
}

DatasetBundle load_dataset(const fs::path& dir) {
  const json meta = read_json(dir / "meta.json");
  DatasetBundle bundle;
  bundle.meta.name = meta.value("name", "");
  const int n = meta.value("num_nodes", -1);
  const int d = meta.value("feature_dim", -1);
  if (n < 0 || d < 0) throw ValidationError((dir / "meta.json").string() + ": missing num_nodes/feature_dim");
  if (meta.contains("generator_seed")) bundle.meta.generator_seed = meta["generator_seed"].get<uint64_t>();

  SocialGraph g;
  g.num_nodes = n;
  if (!meta.contains("relations")) throw ValidationError((dir / "meta.json").string() + ": missing relations");
  for (const auto& r : meta["relations"]) g.relations.push_back(r.get<std::string>());
  g.edges.resize(g.relations.size());

  {
    const fs::path p = dir / "features.f32";
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + p.string());
    g.features.resize(n, d);
    if (g.features.size() > 0) {
      in.read(reinterpret_cast<char*>(g.features.data()),
              static_cast<std::streamsize>(sizeof(float) * g.features.size()));
      if (in.gcount() != static_cast<std::streamsize>(sizeof(float) * g.features.size())) {
        throw ValidationError(p.string() + ": truncated, expected " +
                              std::to_string(sizeof(float) * g.features.size()) + " bytes");
      }
    }
    char extra;
    if (in.read(&extra, 1)) throw ValidationError(p.string() + ": trailing bytes beyond N*d floats");
  }

  {
    const fs::path p = dir / "edges.csv";
    std::ifstream in(p);
    if (!in) throw ValidationError("cannot open " + p.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("src,dst,relation", 0) != 0) {
      throw ValidationError(p.string() + ": bad header, expected 'src,dst,relation'");
    }
    size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      int src = 0, dst = 0, rel = 0;
      char c1 = 0, c2 = 0;
      std::istringstream row(line);
      if (!(row >> src >> c1 >> dst >> c2 >> rel) || c1 != ',' || c2 != ',') {
        throw ValidationError(p.string() + ": malformed record at line " + std::to_string(line_no));
      }
      if (rel < 0 || rel >= static_cast<int>(g.relations.size())) {
        throw ValidationError(p.string() + ": unknown relation " + std::to_string(rel) + " at line " +
                              std::to_string(line_no));
      }
      g.edges[rel].push_back({src, dst});
    }
  }

  {
    const fs::path p = dir / "labels.csv";
    std::ifstream in(p);
    if (!in) throw ValidationError("cannot open " + p.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("node,label", 0) != 0) {
      throw ValidationError(p.string() + ": bad header, expected 'node,label'");
    }
    g.labels.assign(n, -1);
    size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      int node = 0, label = 0;
      char c1 = 0;
      std::istringstream row(line);
      if (!(row >> node >> c1 >> label) || c1 != ',') {
        throw ValidationError(p.string() + ": malformed record at line " + std::to_string(line_no));
      }
      if (node < 0 || node >= n) {
        throw ValidationError(p.string() + ": node " + std::to_string(node) + " out of range at line " +
                              std::to_string(line_no));
      }
      g.labels[node] = label;
    }
  }

  {
    const fs::path p = dir / "splits.json";
    const json splits = read_json(p);
    g.train_idx = int_list(splits, p, "train");
    g.val_idx = int_list(splits, p, "val");
    g.test_idx = int_list(splits, p, "test");
  }

  const bool expect_gt = meta.value("has_ground_truth", false);
  if (expect_gt) {
    const fs::path p = dir / "ground_truth.json";
    const json gt = read_json(p);
    GroundTruth truth;
    truth.labels = int_list(gt, p, "labels");
    truth.bot_cluster = int_list(gt, p, "bot_cluster");
    truth.topo_community = int_list(gt, p, "topo_community");
    if (static_cast<int>(truth.labels.size()) != n || static_cast<int>(truth.bot_cluster.size()) != n ||
        static_cast<int>(truth.topo_community.size()) != n) {
      throw ValidationError(p.string() + ": arrays must all have exactly num_nodes entries");
    }
    bundle.ground_truth = std::move(truth);
  }
  bundle.meta.provenance = expect_gt ? "synthetic" : "loaded";

  const auto violations = validate(g);
  if (!violations.empty()) {
    throw ValidationError("load_dataset(" + dir.string() + "): " + violations.front());
  }
  bundle.graph = std::move(g);
  return bundle;
}

}  // namespace bothp
