#pragma once

#include <qforest/error.hpp>
#include <qforest/forest.hpp>
#include <qforest/pauli.hpp>

#include "json.hpp"

#include <fstream>
#include <sstream>
#include <string>

namespace qforest {

namespace detail {

inline nlohmann::json node_to_json(const DecisionTree& tree, std::uint32_t i, std::size_t n_qubits) {
  const TreeNode& nd = tree.nodes()[i];
  if (nd.is_leaf()) return {{"p", nd.p}, {"n", nd.n}};
  return {{"feature", PauliString::from_index(n_qubits, static_cast<std::size_t>(nd.feature)).str()},
          {"threshold", nd.threshold},
          {"low", node_to_json(tree, nd.low, n_qubits)},
          {"high", node_to_json(tree, nd.high, n_qubits)}};
}

// Appends the subtree in pre-order; internal node counts are the sums below.
inline std::uint32_t node_from_json(const nlohmann::json& j, std::size_t n_qubits, std::vector<TreeNode>& out) {
  const auto id = static_cast<std::uint32_t>(out.size());
  out.emplace_back();
  if (j.contains("p")) {
    out[id].p = j.at("p").get<std::uint32_t>();
    out[id].n = j.at("n").get<std::uint32_t>();
    return id;
  }
  const PauliString f = PauliString::parse(j.at("feature").get<std::string>());
  if (f.size() != n_qubits) throw Error(ErrorCode::Malformed, "feature " + f.str() + " has wrong qubit count");
  const double threshold = j.at("threshold").get<double>();
  const auto low = node_from_json(j.at("low"), n_qubits, out);
  const auto high = node_from_json(j.at("high"), n_qubits, out);
  auto& nd = out[id];
  nd.feature = static_cast<std::int32_t>(f.index());
  nd.threshold = threshold;
  nd.low = low;
  nd.high = high;
  nd.p = out[low].p + out[high].p;
  nd.n = out[low].n + out[high].n;
  return id;
}

}  // namespace detail

inline nlohmann::json model_to_json(const ForestModel& model) {
  const auto& c = model.config;
  nlohmann::json forests = nlohmann::json::array();
  for (const auto& f : model.forests) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : f.trees) trees.push_back(detail::node_to_json(t, 0, model.n_qubits));
    forests.push_back({{"target", PauliString::from_index(model.n_qubits, f.target).str()}, {"trees", std::move(trees)}});
  }
  return {{"version", model.metadata.version},
          {"n_qubits", model.n_qubits},
          {"config",
           {{"n_trees", c.n_trees},
            {"feature_subset_size", c.feature_subset_size},
            {"min_leaf", c.min_leaf},
            {"stop_entropy", c.stop_entropy},
            {"discard_fraction", c.discard_fraction},
            {"min_quorum", c.min_quorum},
            {"prune", c.prune},
            {"seed", c.seed}}},
          {"metadata", {{"samples_per_class", model.metadata.samples_per_class}, {"seed", model.metadata.seed}}},
          {"forests", std::move(forests)}};
}

inline ForestModel model_from_json(const nlohmann::json& j) {
  try {
    const int version = j.at("version").get<int>();
    if (version != kModelVersion)
      throw Error(ErrorCode::VersionMismatch, "model version " + std::to_string(version) + ", expected " +
                                                  std::to_string(kModelVersion));
    ForestModel m;
    m.n_qubits = j.at("n_qubits").get<std::size_t>();
    if (m.n_qubits == 0 || m.n_qubits > kMaxQubits) throw Error(ErrorCode::Malformed, "qubit count");
    const auto& c = j.at("config");
    m.config.n_trees = c.at("n_trees").get<std::size_t>();
    m.config.feature_subset_size = c.at("feature_subset_size").get<std::size_t>();
    m.config.min_leaf = c.at("min_leaf").get<std::size_t>();
    m.config.stop_entropy = c.at("stop_entropy").get<double>();
    m.config.discard_fraction = c.at("discard_fraction").get<double>();
    m.config.min_quorum = c.at("min_quorum").get<std::size_t>();
    m.config.prune = c.at("prune").get<bool>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.metadata.version = version;
    m.metadata.samples_per_class = j.at("metadata").at("samples_per_class").get<std::size_t>();
    m.metadata.seed = j.at("metadata").at("seed").get<std::uint64_t>();

    const auto& forests = j.at("forests");
    if (forests.size() != observable_count(m.n_qubits))
      throw Error(ErrorCode::Malformed, "expected one forest per observable");
    m.forests.resize(forests.size());
    for (const auto& fj : forests) {
      const PauliString target = PauliString::parse(fj.at("target").get<std::string>());
      if (target.size() != m.n_qubits) throw Error(ErrorCode::Malformed, "forest target " + target.str());
      Forest& f = m.forests[target.index()];
      if (!f.trees.empty()) throw Error(ErrorCode::Malformed, "duplicate forest " + target.str());
      f.target = target.index();
      for (const auto& tj : fj.at("trees")) {
        std::vector<TreeNode> nodes;
        detail::node_from_json(tj, m.n_qubits, nodes);
        f.trees.emplace_back(std::move(nodes));
      }
      if (f.trees.empty()) throw Error(ErrorCode::Malformed, "forest " + target.str() + " has no trees");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Malformed, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidLetter) throw Error(ErrorCode::Malformed, e.what());
    throw;
  }
}

inline void save_model(const ForestModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << model_to_json(model).dump() << '\n';
  if (!out) throw Error(ErrorCode::InvalidArgument, "write failed for " + path);
}

inline ForestModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::NotFound, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Malformed, path + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace qforest
