#pragma once

#include <qforest/correlation.hpp>
#include <qforest/decision_tree.hpp>
#include <qforest/error.hpp>
#include <qforest/session.hpp>
#include <qforest/training.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace qforest {

struct ForestConfig {
  std::size_t n_trees = 64;
  std::size_t feature_subset_size = 0;  // 0: ceil(sqrt(3^N - 1))
  std::size_t min_leaf = 5;
  double stop_entropy = 0.1;
  /// Trees with a smaller share of reachable leaves are left out of the median.
  double discard_fraction = 0.5;
  /// Fewer surviving trees than this and the forest reports no score.
  std::size_t min_quorum = 8;
  bool prune = true;
  std::uint64_t seed = 1;

  TreeConfig tree() const { return {feature_subset_size, min_leaf, stop_entropy}; }
};

struct Forest {
  std::size_t target = 0;  // observable index
  std::vector<DecisionTree> trees;
  /// Out-of-bag error rate of each tree after pruning.
  std::vector<double> oob_error;

  friend bool operator==(const Forest& a, const Forest& b) { return a.target == b.target && a.trees == b.trees; }
};

/// Seed for one (instance, tree) pair, independent of scheduling order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

struct BaggedTree {
  DecisionTree tree;
  DecisionTree unpruned;
  std::vector<std::uint32_t> weights;  // bootstrap multiplicities
  std::size_t oob_errors = 0;
  std::size_t unpruned_oob_errors = 0;
  std::size_t oob_size = 0;
};

/// One bagged tree: bootstrap resample, grow, prune on out-of-bag rows, then
/// recount the regions over the whole training set.
inline BaggedTree fit_bagged_tree(const TrainingSet& ts, const ForestConfig& cfg, Rng& rng) {
  BaggedTree out;
  out.weights.assign(ts.size(), 0);
  std::uniform_int_distribution<std::size_t> pick(0, ts.size() - 1);
  for (std::size_t i = 0; i < ts.size(); ++i) ++out.weights[pick(rng)];
  std::vector<std::uint32_t> oob;
  for (std::uint32_t r = 0; r < ts.size(); ++r)
    if (out.weights[r] == 0) oob.push_back(r);
  out.oob_size = oob.size();
  out.unpruned = fit_tree(ts, cfg.tree(), rng, out.weights);
  out.unpruned_oob_errors = classification_errors(out.unpruned, ts, oob);
  out.tree = cfg.prune ? prune_tree(out.unpruned, ts, oob) : out.unpruned;
  out.oob_errors = classification_errors(out.tree, ts, oob);
  // Scoring counts training samples per region, so a balanced set gives every
  // tree a cold-start score of exactly one half.
  out.tree = recount_leaves(out.tree, ts);
  return out;
}

inline Forest fit_forest(const TrainingSet& ts, const ForestConfig& cfg, std::uint64_t instance_seed) {
  if (cfg.n_trees == 0) throw Error(ErrorCode::InvalidArgument, "n_trees must be positive");
  if (ts.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty training set");
  Forest forest;
  forest.target = ts.target_index();
  for (std::size_t t = 0; t < cfg.n_trees; ++t) {
    Rng rng(derive_seed(instance_seed, t));
    BaggedTree bt = fit_bagged_tree(ts, cfg, rng);
    forest.oob_error.push_back(bt.oob_size ? static_cast<double>(bt.oob_errors) / bt.oob_size : 0.0);
    forest.trees.push_back(std::move(bt.tree));
  }
  return forest;
}

/// Median of the tree scores whose reachable share meets the discard
/// threshold; nullopt when fewer than the quorum survive.
inline std::optional<double> forest_score(const Forest& forest, const CorrelationRecord& known, double discard_fraction = 0.5,
                                          std::size_t min_quorum = 8) {
  std::vector<double> scores;
  scores.reserve(forest.trees.size());
  for (const auto& tree : forest.trees) {
    const TreeScore s = tree.score(known);
    if (s.reachable_fraction >= discard_fraction) scores.push_back(s.score);
  }
  if (scores.empty() || scores.size() < min_quorum) return std::nullopt;
  std::sort(scores.begin(), scores.end());
  const std::size_t m = scores.size() / 2;
  return scores.size() % 2 ? scores[m] : 0.5 * (scores[m - 1] + scores[m]);
}

inline constexpr int kModelVersion = 1;

struct ModelMetadata {
  int version = kModelVersion;
  std::size_t samples_per_class = 0;
  std::uint64_t seed = 0;
};

/// One forest per full-weight observable, in canonical order.
struct ForestModel {
  std::size_t n_qubits = 0;
  ForestConfig config;
  ModelMetadata metadata;
  std::vector<Forest> forests;

  std::optional<double> score(std::size_t observable, const CorrelationRecord& known) const {
    return forest_score(forests.at(observable), known, config.discard_fraction, config.min_quorum);
  }
};

struct TrainOptions {
  TrainingDataConfig data;
  ForestConfig forest;
  std::size_t threads = 0;  // 0: hardware concurrency
};

/// Default per-class training size for a qubit count.
inline std::size_t default_samples_per_class(std::size_t n_qubits) { return n_qubits <= 2 ? 2048 : (n_qubits == 3 ? 4096 : 2048); }

inline ForestModel train_model(std::size_t n_qubits, const TrainOptions& opts) {
  if (n_qubits == 0 || n_qubits > 5) throw Error(ErrorCode::CapExceeded, "forest training supports 1 to 5 qubits");
  if (opts.forest.n_trees == 0) throw Error(ErrorCode::InvalidArgument, "n_trees must be positive");
  Rng data_rng(derive_seed(opts.forest.seed, 0xDA7A));
  const TrainingData data = generate_training_data(n_qubits, opts.data, data_rng);

  ForestModel model;
  model.n_qubits = n_qubits;
  model.config = opts.forest;
  model.metadata = {kModelVersion, opts.data.samples_per_class, opts.forest.seed};
  model.forests.resize(data.sets.size());

  std::size_t threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, data.sets.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < data.sets.size(); i = next++)
      model.forests[i] = fit_forest(data.sets[i], opts.forest, derive_seed(opts.forest.seed, 1, i));
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return model;
}

/// Highest-scoring unmeasured observable; unscored forests rank below every
/// numeric score and ties go to canonical order.
inline PauliString recommend(const ForestModel& model, const Session& session) {
  if (session.qubits() != model.n_qubits)
    throw Error(ErrorCode::QubitMismatch, "model for " + std::to_string(model.n_qubits) + " qubits, session has " +
                                              std::to_string(session.qubits()));
  std::optional<std::size_t> best;
  std::optional<double> best_score;
  for (std::size_t i = 0; i < model.forests.size(); ++i) {
    const PauliString p = PauliString::from_index(model.n_qubits, i);
    if (session.measured(p)) continue;
    const auto s = model.score(i, session.record());
    if (!best || (s && (!best_score || *s > *best_score))) {
      best = i;
      best_score = s;
    }
  }
  if (!best) throw Error(ErrorCode::ContractViolation, "no unmeasured observable left");
  return PauliString::from_index(model.n_qubits, *best);
}

class ForestStrategy final : public Strategy {
 public:
  explicit ForestStrategy(std::shared_ptr<const ForestModel> model) : model_(std::move(model)) {}

  std::string name() const override { return "forest"; }
  PauliString recommend(const Session& session) override { return qforest::recommend(*model_, session); }
  const ForestModel& model() const { return *model_; }

 private:
  std::shared_ptr<const ForestModel> model_;
};

}  // namespace qforest
