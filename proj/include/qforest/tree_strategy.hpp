#pragma once

#include <qforest/pauli.hpp>
#include <qforest/session.hpp>
#include <qforest/state.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace qforest {

/// Anchor observable from per-qubit Bloch vectors: each qubit takes the
/// letter of its largest |component| (ties to X < Y < Z). When no qubit has a
/// component of at least 0.1 the anchor defaults to x...x.
inline PauliString select_bstar(std::span<const BlochVector> bloch) {
  std::vector<Pauli> letters(bloch.size(), Pauli::X);
  bool degenerate = true;
  for (std::size_t q = 0; q < bloch.size(); ++q) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < 3; ++a)
      if (std::abs(bloch[q][a]) > std::abs(bloch[q][best])) best = a;
    letters[q] = static_cast<Pauli>(best + 1);
    if (std::abs(bloch[q][best]) >= 0.1) degenerate = false;
  }
  if (degenerate) std::fill(letters.begin(), letters.end(), Pauli::X);
  return PauliString(std::move(letters));
}

struct TreePlan {
  PauliString b_star;
  /// Maximal mutually commuting subsets of the anchor's commutant, each led by b_star.
  std::vector<std::vector<PauliString>> subsets;
};

namespace detail {

// Bron-Kerbosch with pivoting; adjacency is a dense boolean matrix.
inline void maximal_cliques(const std::vector<std::vector<bool>>& adj, std::vector<std::size_t>& r,
                            std::vector<std::size_t> p, std::vector<std::size_t> x,
                            std::vector<std::vector<std::size_t>>& out) {
  if (p.empty() && x.empty()) {
    out.push_back(r);
    return;
  }
  std::size_t pivot = !p.empty() ? p.front() : x.front();
  std::size_t best = 0;
  for (const auto* set : {&p, &x})
    for (std::size_t u : *set) {
      std::size_t c = 0;
      for (std::size_t v : p) c += adj[u][v];
      if (c >= best) {
        best = c;
        pivot = u;
      }
    }
  std::vector<std::size_t> candidates;
  for (std::size_t v : p)
    if (!adj[pivot][v]) candidates.push_back(v);
  for (std::size_t v : candidates) {
    std::vector<std::size_t> p2, x2;
    for (std::size_t u : p)
      if (adj[v][u]) p2.push_back(u);
    for (std::size_t u : x)
      if (adj[v][u]) x2.push_back(u);
    r.push_back(v);
    maximal_cliques(adj, r, std::move(p2), std::move(x2), out);
    r.pop_back();
    p.erase(std::find(p.begin(), p.end(), v));
    x.push_back(v);
  }
}

}  // namespace detail

inline TreePlan build_plan(const PauliString& b_star) {
  TreePlan plan{b_star, {}};
  std::vector<PauliString> s;  // commutant of b_star, excluding it
  for (const auto& p : ObservableSet(b_star.size()))
    if (p != b_star && commutes(p, b_star)) s.push_back(p);

  if (s.empty()) {
    plan.subsets.push_back({b_star});
    return plan;
  }
  std::vector<std::vector<bool>> adj(s.size(), std::vector<bool>(s.size(), false));
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j) adj[i][j] = i != j && commutes(s[i], s[j]);

  std::vector<std::vector<std::size_t>> cliques;
  std::vector<std::size_t> r;
  std::vector<std::size_t> all(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) all[i] = i;
  detail::maximal_cliques(adj, r, all, {}, cliques);

  for (auto& c : cliques) {
    std::sort(c.begin(), c.end());  // s is in canonical order already
    std::vector<PauliString> subset{b_star};
    for (std::size_t idx : c) subset.push_back(s[idx]);
    plan.subsets.push_back(std::move(subset));
  }
  std::sort(plan.subsets.begin(), plan.subsets.end());
  return plan;
}

struct PlanCursor {
  std::size_t subset = 0;
  std::size_t position = 0;
  bool exhausted = false;
};

namespace detail {

inline void jump_to_next_subset(const TreePlan& plan, PlanCursor& c) {
  if (c.subset + 1 >= plan.subsets.size()) {
    c.exhausted = true;
    return;
  }
  const auto& cur = plan.subsets[c.subset];
  const auto& next = plan.subsets[c.subset + 1];
  std::size_t k = 0;
  while (k < cur.size() && k < next.size() && cur[k] == next[k]) ++k;
  c.subset += 1;
  c.position = std::min(k, next.size() - 1);
}

template <class Measured>
void skip_measured(const TreePlan& plan, PlanCursor& c, const Measured& measured) {
  while (!c.exhausted && measured(plan.subsets[c.subset][c.position])) {
    if (++c.position == plan.subsets[c.subset].size()) jump_to_next_subset(plan, c);
  }
}

}  // namespace detail

/// Replays the plan against the session history and returns the next plan
/// target, or nullopt once the plan has nothing left to prescribe.
///
/// A result for the pending target decides the move: squared value above the
/// threshold advances within the subset, otherwise the walk jumps to the next
/// subset at the first position where the two differ. Targets that are
/// already measured are skipped forward. Finishing a subset counts as a jump.
inline std::optional<PauliString> next_measurement(const TreePlan& plan, const Session& session,
                                                   double threshold = 0.25) {
  if (plan.b_star.size() != session.qubits())
    throw Error(ErrorCode::QubitMismatch, "plan anchor " + plan.b_star.str() + " in a " +
                                              std::to_string(session.qubits()) + "-qubit session");
  const auto& history = session.history();
  std::vector<bool> seen(observable_count(session.qubits()), false);
  auto measured = [&](const PauliString& p) { return static_cast<bool>(seen[p.index()]); };

  PlanCursor c;
  for (const auto& m : history) {
    const bool was_pending = !c.exhausted && plan.subsets[c.subset][c.position] == m.observable;
    seen[m.observable.index()] = true;
    if (was_pending) {
      if (m.value * m.value > threshold) {
        if (++c.position == plan.subsets[c.subset].size()) detail::jump_to_next_subset(plan, c);
      } else {
        detail::jump_to_next_subset(plan, c);
      }
    }
    detail::skip_measured(plan, c, measured);
  }
  if (c.exhausted) return std::nullopt;
  return plan.subsets[c.subset][c.position];
}

/// Sum of squared results over measured observables that anti-commute with p.
inline double priority(const Session& session, const PauliString& p) {
  double s = 0;
  for (const auto& m : session.history())
    if (!commutes(m.observable, p)) s += m.value * m.value;
  return s;
}

/// Lowest-priority unmeasured observable, ties to canonical order.
inline PauliString lowest_priority(const Session& session) {
  std::optional<PauliString> best;
  double best_priority = std::numeric_limits<double>::infinity();
  for (const auto& p : ObservableSet(session.qubits())) {
    if (session.measured(p)) continue;
    const double pr = priority(session, p);
    if (pr < best_priority) {
      best_priority = pr;
      best = p;
    }
  }
  if (!best) throw Error(ErrorCode::ContractViolation, "no unmeasured observable left");
  return *best;
}

/// Commuting-subset tree search with the anti-commutation priority fallback.
class TreeStrategy final : public Strategy {
 public:
  explicit TreeStrategy(const PauliString& b_star, double threshold = 0.25, std::size_t preliminary = 0)
      : plan_(build_plan(b_star)), threshold_(threshold), preliminary_(preliminary) {}

  /// Anchor chosen from Bloch vectors; the 3N local measurements are reported
  /// as preliminary cost.
  static TreeStrategy from_bloch(std::span<const BlochVector> bloch, double threshold = 0.25) {
    return TreeStrategy(select_bstar(bloch), threshold, 3 * bloch.size());
  }

  std::string name() const override { return "tree"; }
  std::size_t preliminary_cost() const override { return preliminary_; }
  const TreePlan& plan() const { return plan_; }

  PauliString recommend(const Session& session) override {
    if (auto next = next_measurement(plan_, session, threshold_)) return *next;
    return lowest_priority(session);
  }

 private:
  TreePlan plan_;
  double threshold_;
  std::size_t preliminary_;
};

}  // namespace qforest
