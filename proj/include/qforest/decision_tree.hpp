#pragma once

#include <qforest/correlation.hpp>
#include <qforest/error.hpp>
#include <qforest/pauli.hpp>
#include <qforest/state.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace qforest {

/// Squared expectations of many training samples, one row of 3^N values per
/// sample, shared by every per-observable training set.
struct TrainingPool {
  std::size_t n_qubits = 0;
  std::size_t width = 0;
  std::vector<float> values;
  /// Originating states, kept only on request (tests and audits).
  std::vector<PureState> states;

  std::size_t size() const { return width ? values.size() / width : 0; }
  float value(std::size_t sample, std::size_t observable) const { return values[sample * width + observable]; }
  std::span<const float> row(std::size_t sample) const { return {values.data() + sample * width, width}; }
};

struct LabeledRow {
  std::uint32_t sample;
  bool positive;
};

/// Classification data for one observable: "is this observable's squared
/// expectation the largest", with every other observable as a feature.
class TrainingSet {
 public:
  TrainingSet(std::size_t target, std::shared_ptr<const TrainingPool> pool, std::vector<LabeledRow> rows = {})
      : target_(target), pool_(std::move(pool)), rows_(std::move(rows)) {
    for (std::size_t i = 0; i < pool_->width; ++i)
      if (i != target_) features_.push_back(static_cast<std::uint32_t>(i));
  }

  std::size_t target_index() const { return target_; }
  PauliString target() const { return PauliString::from_index(pool_->n_qubits, target_); }
  std::size_t qubits() const { return pool_->n_qubits; }
  const TrainingPool& pool() const { return *pool_; }
  const std::vector<LabeledRow>& rows() const { return rows_; }
  std::vector<LabeledRow>& mutable_rows() { return rows_; }
  std::size_t size() const { return rows_.size(); }

  /// Observable indices usable as features; never contains the target.
  const std::vector<std::uint32_t>& feature_indices() const { return features_; }

  float value(std::size_t row, std::size_t observable) const { return pool_->value(rows_[row].sample, observable); }
  bool positive(std::size_t row) const { return rows_[row].positive; }

  std::size_t positive_count() const {
    return static_cast<std::size_t>(std::count_if(rows_.begin(), rows_.end(), [](const auto& r) { return r.positive; }));
  }
  std::size_t negative_count() const { return rows_.size() - positive_count(); }

 private:
  std::size_t target_;
  std::shared_ptr<const TrainingPool> pool_;
  std::vector<LabeledRow> rows_;
  std::vector<std::uint32_t> features_;
};

/// Node of a binary tree over squared expectations. Internal nodes send a
/// value below the threshold low and everything else high. Every node keeps
/// the positive/negative sample counts that reached it.
struct TreeNode {
  static constexpr std::int32_t kLeaf = -1;

  std::int32_t feature = kLeaf;  // observable index
  double threshold = 0.0;
  std::uint32_t low = 0;
  std::uint32_t high = 0;
  std::uint32_t p = 0;
  std::uint32_t n = 0;

  bool is_leaf() const { return feature == kLeaf; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct TreeScore {
  double score;
  double reachable_fraction;
};

class DecisionTree {
 public:
  DecisionTree() = default;
  /// nodes[0] is the root; children must be listed after their parent.
  explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw Error(ErrorCode::Malformed, "tree without nodes");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const auto& nd = nodes_[i];
      if (nd.is_leaf()) continue;
      if (nd.low <= i || nd.high <= i || nd.low >= nodes_.size() || nd.high >= nodes_.size() || !std::isfinite(nd.threshold))
        throw Error(ErrorCode::Malformed, "bad child index or threshold at node " + std::to_string(i));
    }
  }

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& root() const { return nodes_.front(); }
  std::size_t leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const auto& n) { return n.is_leaf(); }));
  }
  std::size_t depth() const { return depth_from(0); }

  /// Leaf reached by a complete feature vector.
  const TreeNode& leaf_for(std::span<const float> squares) const {
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) i = squares[nodes_[i].feature] < nodes_[i].threshold ? nodes_[i].low : nodes_[i].high;
    return nodes_[i];
  }

  bool predict(std::span<const float> squares) const {
    const auto& leaf = leaf_for(squares);
    return leaf.p > leaf.n;
  }

  /// Leaves whose path is not contradicted by a known value stay reachable;
  /// decisions on unknown features keep both branches open. Known values are
  /// expectations and are squared here.
  TreeScore score(const CorrelationRecord& known) const {
    double pos = 0, total = 0;
    std::size_t reachable = 0, leaves = 0;
    std::vector<std::uint32_t> stack{0};
    for (const auto& nd : nodes_) leaves += nd.is_leaf();
    while (!stack.empty()) {
      const auto& nd = nodes_[stack.back()];
      stack.pop_back();
      if (nd.is_leaf()) {
        ++reachable;
        pos += nd.p;
        total += nd.p + nd.n;
        continue;
      }
      const auto& v = known.by_index(static_cast<std::size_t>(nd.feature));
      if (v) {
        stack.push_back((*v) * (*v) < nd.threshold ? nd.low : nd.high);
      } else {
        stack.push_back(nd.high);
        stack.push_back(nd.low);
      }
    }
    return {total > 0 ? pos / total : 0.0, static_cast<double>(reachable) / static_cast<double>(leaves)};
  }

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

 private:
  std::size_t depth_from(std::size_t i) const {
    if (nodes_[i].is_leaf()) return 0;
    return 1 + std::max(depth_from(nodes_[i].low), depth_from(nodes_[i].high));
  }

  std::vector<TreeNode> nodes_;
};

inline TreeScore tree_score(const DecisionTree& tree, const CorrelationRecord& known) { return tree.score(known); }

struct TreeConfig {
  std::size_t feature_subset_size = 0;  // 0: ceil(sqrt(#features))
  std::size_t min_leaf = 5;
  double stop_entropy = 0.1;
};

inline double binary_entropy(double pos, double neg) {
  const double total = pos + neg;
  if (total <= 0 || pos <= 0 || neg <= 0) return 0.0;
  const double a = pos / total, b = neg / total;
  return -(a * std::log2(a) + b * std::log2(b));
}

namespace detail {

struct SplitCandidate {
  std::int32_t feature = TreeNode::kLeaf;
  double threshold = 0;
  double gain = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const TrainingSet& ts, std::span<const std::uint32_t> weights, const TreeConfig& cfg, Rng& rng)
      : ts_(ts), weights_(weights), cfg_(cfg), rng_(rng) {
    subset_ = cfg.feature_subset_size
                  ? std::min(cfg.feature_subset_size, ts.feature_indices().size())
                  : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(ts.feature_indices().size()))));
    subset_ = std::max<std::size_t>(subset_, 1);
  }

  DecisionTree build() {
    std::vector<std::uint32_t> rows;
    for (std::uint32_t r = 0; r < ts_.size(); ++r)
      if (weight(r) > 0) rows.push_back(r);
    if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "empty training set");
    nodes_.clear();
    grow(rows);
    return DecisionTree(std::move(nodes_));
  }

 private:
  std::uint32_t weight(std::uint32_t r) const { return weights_.empty() ? 1u : weights_[r]; }

  std::uint32_t grow(std::vector<std::uint32_t>& rows) {
    std::uint32_t pos = 0, neg = 0;
    for (auto r : rows) (ts_.positive(r) ? pos : neg) += weight(r);
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back(TreeNode{TreeNode::kLeaf, 0.0, 0, 0, pos, neg});

    const double h = binary_entropy(pos, neg);
    if (h < cfg_.stop_entropy || pos + neg < 2 * cfg_.min_leaf) return id;
    const SplitCandidate best = find_split(rows, pos, neg, h);
    if (best.feature == TreeNode::kLeaf) return id;

    std::vector<std::uint32_t> lo, hi;
    for (auto r : rows) (ts_.value(r, best.feature) < best.threshold ? lo : hi).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const auto low = grow(lo);
    const auto high = grow(hi);
    auto& nd = nodes_[id];
    nd.feature = best.feature;
    nd.threshold = best.threshold;
    nd.low = low;
    nd.high = high;
    return id;
  }

  // Random feature order; the first `subset_` are candidates, and the scan
  // continues past them only until some feature yields a positive gain.
  SplitCandidate find_split(const std::vector<std::uint32_t>& rows, std::uint32_t pos, std::uint32_t neg, double h) {
    std::vector<std::uint32_t> order(ts_.feature_indices().begin(), ts_.feature_indices().end());
    SplitCandidate best;
    std::vector<std::pair<float, std::uint32_t>> column(rows.size());
    const double total = static_cast<double>(pos) + neg;
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (k >= subset_ && best.feature != TreeNode::kLeaf) break;
      std::uniform_int_distribution<std::size_t> pick(k, order.size() - 1);
      std::swap(order[k], order[pick(rng_)]);
      const std::uint32_t f = order[k];
      for (std::size_t i = 0; i < rows.size(); ++i) column[i] = {ts_.value(rows[i], f), rows[i]};
      std::sort(column.begin(), column.end());
      double lp = 0, ln = 0;
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        const auto r = column[i].second;
        (ts_.positive(r) ? lp : ln) += weight(r);
        if (column[i].first == column[i + 1].first) continue;
        const double lw = lp + ln;
        const double rw = total - lw;
        if (lw < cfg_.min_leaf || rw < cfg_.min_leaf) continue;
        const double child = (lw * binary_entropy(lp, ln) + rw * binary_entropy(pos - lp, neg - ln)) / total;
        const double gain = h - child;
        if (gain > best.gain + 1e-12) {
          best.gain = gain;
          best.feature = static_cast<std::int32_t>(f);
          best.threshold = 0.5 * (static_cast<double>(column[i].first) + static_cast<double>(column[i + 1].first));
        }
      }
    }
    return best;
  }

  const TrainingSet& ts_;
  std::span<const std::uint32_t> weights_;
  TreeConfig cfg_;
  Rng& rng_;
  std::size_t subset_ = 1;
  std::vector<TreeNode> nodes_;
};

}  // namespace detail

/// CART-style entropy tree. `weights` gives each row's multiplicity (a
/// bootstrap resample); empty means every row once.
inline DecisionTree fit_tree(const TrainingSet& ts, const TreeConfig& cfg, Rng& rng,
                             std::span<const std::uint32_t> weights = {}) {
  if (!weights.empty() && weights.size() != ts.size())
    throw Error(ErrorCode::DimensionMismatch, "weight count differs from row count");
  return detail::TreeBuilder(ts, weights, cfg, rng).build();
}

/// Misclassified rows among `rows`.
inline std::size_t classification_errors(const DecisionTree& tree, const TrainingSet& ts,
                                         std::span<const std::uint32_t> rows) {
  std::size_t errors = 0;
  for (auto r : rows) errors += tree.predict(ts.pool().row(ts.rows()[r].sample)) != ts.positive(r);
  return errors;
}

/// Same structure with every node's (p, n) counted over all rows of `ts`,
/// each row once.
inline DecisionTree recount_leaves(const DecisionTree& tree, const TrainingSet& ts) {
  std::vector<TreeNode> nodes = tree.nodes();
  for (auto& nd : nodes) nd.p = nd.n = 0;
  for (std::uint32_t r = 0; r < ts.size(); ++r) {
    const auto row = ts.pool().row(ts.rows()[r].sample);
    std::size_t i = 0;
    for (;;) {
      ++(ts.positive(r) ? nodes[i].p : nodes[i].n);
      if (nodes[i].is_leaf()) break;
      i = row[nodes[i].feature] < nodes[i].threshold ? nodes[i].low : nodes[i].high;
    }
  }
  return DecisionTree(std::move(nodes));
}

/// Bottom-up reduced-error pruning on the given held-out rows: a subtree is
/// collapsed into a leaf whenever that does not increase the held-out error.
inline DecisionTree prune_tree(const DecisionTree& tree, const TrainingSet& ts, std::span<const std::uint32_t> held_out) {
  std::vector<TreeNode> nodes = tree.nodes();
  auto is_wrong = [&](const TreeNode& leaf, std::uint32_t r) { return (leaf.p > leaf.n) != ts.positive(r); };

  // Returns the held-out error of the (possibly collapsed) subtree at i.
  auto prune = [&](auto&& self, std::uint32_t i, std::vector<std::uint32_t> rows) -> std::size_t {
    auto& nd = nodes[i];
    std::size_t as_leaf = 0;
    for (auto r : rows) as_leaf += is_wrong(nd, r);
    if (nd.is_leaf()) return as_leaf;
    std::vector<std::uint32_t> lo, hi;
    const auto feature = nd.feature;
    const double threshold = nd.threshold;
    for (auto r : rows) (ts.value(r, feature) < threshold ? lo : hi).push_back(r);
    rows.clear();
    const std::size_t subtree = self(self, nodes[i].low, std::move(lo)) + self(self, nodes[i].high, std::move(hi));
    if (as_leaf <= subtree) {
      nodes[i].feature = TreeNode::kLeaf;
      nodes[i].threshold = 0.0;
      nodes[i].low = nodes[i].high = 0;
      return as_leaf;
    }
    return subtree;
  };
  prune(prune, 0, std::vector<std::uint32_t>(held_out.begin(), held_out.end()));

  // Drop nodes orphaned by collapsing, keeping parent-before-child order.
  std::vector<TreeNode> compact;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> queue{{0, 0}};  // (old index, new index)
  compact.push_back(nodes[0]);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto [old_i, new_i] = queue[head];
    const auto& nd = nodes[old_i];
    if (nd.is_leaf()) continue;
    const auto lo = static_cast<std::uint32_t>(compact.size());
    compact.push_back(nodes[nd.low]);
    const auto hi = static_cast<std::uint32_t>(compact.size());
    compact.push_back(nodes[nd.high]);
    compact[new_i].low = lo;
    compact[new_i].high = hi;
    queue.push_back({nd.low, lo});
    queue.push_back({nd.high, hi});
  }
  return DecisionTree(std::move(compact));
}

}  // namespace qforest
