#pragma once

#include <qforest/clifford.hpp>
#include <qforest/correlation.hpp>
#include <qforest/decision_tree.hpp>
#include <qforest/pauli.hpp>
#include <qforest/state.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

namespace qforest {

struct TrainingDataConfig {
  std::size_t samples_per_class = 2048;
  /// Haar draws = draw_fraction * samples_per_class * 3^N, so roughly this
  /// fraction of each positive quota comes from direct sampling.
  double draw_fraction = 0.5;
  /// Share of each positive deficit filled by Clifford relabelling; the rest
  /// is filled by duplicating positives.
  double augment_fraction = 1.0;
  bool keep_states = false;
};

struct TrainingDataStats {
  std::size_t draws = 0;
  std::vector<std::size_t> sampled_positives;     // per instance, before balancing
  std::vector<std::size_t> augmented_positives;   // Clifford relabelled
  std::vector<std::size_t> duplicated_positives;
};

struct TrainingData {
  std::shared_ptr<TrainingPool> pool;
  std::vector<TrainingSet> sets;  // canonical order of targets
  TrainingDataStats stats;
  /// Pool sample that an augmented sample was derived from (or its own index).
  std::vector<std::uint32_t> origin;
};

/// Index of the largest value; ties go to the canonically first observable.
template <class T>
std::size_t canonical_argmax(std::span<const T> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

/// For a Clifford that keeps the full-weight set closed: perm[i] = canonical
/// index of C B_i C^dagger (sign dropped). Throws for any other tableau.
inline std::vector<std::uint32_t> observable_permutation(const CliffordTableau& tab) {
  std::vector<std::uint32_t> perm;
  for (const auto& p : ObservableSet(tab.qubits())) {
    const SignedPauli image = tab.conjugate(p);
    if (!image.full_weight()) throw Error(ErrorCode::InvalidArgument, "Clifford leaves the full-weight set");
    perm.push_back(static_cast<std::uint32_t>(image.letters().index()));
  }
  return perm;
}

namespace detail {

// Per-qubit letter maps of a product of single-qubit Cliffords, which let the
// index permutation be built digit by digit.
inline std::vector<std::array<std::uint8_t, 3>> local_letter_maps(const CliffordTableau& tab) {
  std::vector<std::array<std::uint8_t, 3>> maps(tab.qubits());
  for (std::size_t q = 0; q < tab.qubits(); ++q) {
    std::vector<Pauli> probe(tab.qubits(), Pauli::Z);
    for (int a = 1; a <= 3; ++a) {
      probe[q] = static_cast<Pauli>(a);
      maps[q][a - 1] = static_cast<std::uint8_t>(tab.conjugate(PauliString(probe)).letters()[q]);
    }
  }
  return maps;
}

inline std::size_t map_index(const std::vector<std::array<std::uint8_t, 3>>& maps, std::size_t index) {
  const std::size_t n = maps.size();
  std::size_t out = 0, scale = 1;
  for (std::size_t q = n; q-- > 0;) {
    const std::size_t digit = index % 3;
    index /= 3;
    out += (maps[q][digit] - 1u) * scale;
    scale *= 3;
  }
  return out;
}

class Reservoir {
 public:
  explicit Reservoir(std::size_t capacity) : capacity_(capacity) {}

  void offer(std::uint32_t item, Rng& rng) {
    ++seen_;
    if (items_.size() < capacity_) {
      items_.push_back(item);
      return;
    }
    std::uniform_int_distribution<std::size_t> slot(0, seen_ - 1);
    const std::size_t s = slot(rng);
    if (s < capacity_) items_[s] = item;
  }

  std::size_t seen() const { return seen_; }
  const std::vector<std::uint32_t>& items() const { return items_; }

 private:
  std::size_t capacity_;
  std::size_t seen_ = 0;
  std::vector<std::uint32_t> items_;
};

}  // namespace detail

/// Balanced training sets for every observable, drawn from the Haar prior.
///
/// A draw is a positive for the observable with the largest squared
/// expectation and a negative candidate for every other one; reservoirs keep
/// uniform subsamples at the quota. Positive deficits are filled by local
/// Clifford conjugation of positives from other instances, which relabels
/// the maximal observable and permutes the feature vector, then by
/// duplication.
inline TrainingData generate_training_data(std::size_t n_qubits, const TrainingDataConfig& cfg, Rng& rng) {
  if (cfg.samples_per_class == 0) throw Error(ErrorCode::InvalidArgument, "samples_per_class must be positive");
  const std::size_t width = observable_count(n_qubits);
  const std::size_t quota = cfg.samples_per_class;
  auto pool = std::make_shared<TrainingPool>();
  pool->n_qubits = n_qubits;
  pool->width = width;

  TrainingData data;
  std::vector<detail::Reservoir> positives(width, detail::Reservoir(quota));
  std::vector<detail::Reservoir> negatives(width, detail::Reservoir(quota));

  const CorrelationEvaluator eval(n_qubits);
  std::vector<double> ex(width);
  const auto budget = static_cast<std::size_t>(std::ceil(cfg.draw_fraction * static_cast<double>(quota * width)));
  auto negatives_short = [&] {
    return std::any_of(negatives.begin(), negatives.end(), [&](const auto& r) { return r.items().size() < quota; });
  };
  std::size_t draws = 0;
  while (draws < budget || negatives_short()) {
    const PureState s = sample_haar_pure(n_qubits, rng);
    eval.expectations(s, ex);
    const auto id = static_cast<std::uint32_t>(pool->size());
    for (double v : ex) pool->values.push_back(static_cast<float>(v * v));
    if (cfg.keep_states) pool->states.push_back(s);
    data.origin.push_back(id);
    const std::size_t top = canonical_argmax<float>(pool->row(id));
    positives[top].offer(id, rng);
    for (std::size_t i = 0; i < width; ++i)
      if (i != top) negatives[i].offer(id, rng);
    ++draws;
  }
  data.stats.draws = draws;

  std::vector<std::vector<std::uint32_t>> pos_rows(width);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> all_positives;  // (sample, its maximal observable)
  for (std::size_t i = 0; i < width; ++i) {
    pos_rows[i] = positives[i].items();
    data.stats.sampled_positives.push_back(pos_rows[i].size());
    for (auto s : pos_rows[i]) all_positives.emplace_back(s, static_cast<std::uint32_t>(i));
  }
  data.stats.augmented_positives.assign(width, 0);
  data.stats.duplicated_positives.assign(width, 0);

  for (std::size_t target = 0; target < width; ++target) {
    auto& rows = pos_rows[target];
    const std::size_t deficit = quota - rows.size();
    const auto augment = static_cast<std::size_t>(std::floor(cfg.augment_fraction * static_cast<double>(deficit)));
    const bool has_donor = std::any_of(all_positives.begin(), all_positives.end(),
                                       [&](const auto& d) { return d.second != target; });
    const PauliString to = PauliString::from_index(n_qubits, target);
    std::size_t attempts = 0;
    while (has_donor && data.stats.augmented_positives[target] < augment && attempts < 8 * augment + 16) {
      ++attempts;
      std::uniform_int_distribution<std::size_t> pick(0, all_positives.size() - 1);
      const auto [src, src_top] = all_positives[pick(rng)];
      if (src_top == target) continue;
      const PauliString from = PauliString::from_index(n_qubits, src_top);
      const CliffordTableau tab = local_clifford_mapping(from, to, rng);
      const auto maps = detail::local_letter_maps(tab);
      std::vector<float> permuted(width);
      for (std::size_t i = 0; i < width; ++i) permuted[detail::map_index(maps, i)] = pool->value(src, i);
      if (canonical_argmax<float>(permuted) != target) continue;  // exact ties only
      const auto id = static_cast<std::uint32_t>(pool->size());
      pool->values.insert(pool->values.end(), permuted.begin(), permuted.end());
      if (cfg.keep_states) pool->states.push_back(apply_circuit(pool->states[src], tab.circuit()));
      data.origin.push_back(src);
      rows.push_back(id);
      ++data.stats.augmented_positives[target];
    }
    if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "no positive example for " + to.str());
    const std::size_t existing = rows.size();
    std::uniform_int_distribution<std::size_t> dup(0, existing - 1);
    while (rows.size() < quota) {
      rows.push_back(rows[dup(rng)]);
      ++data.stats.duplicated_positives[target];
    }
  }

  data.pool = pool;
  for (std::size_t target = 0; target < width; ++target) {
    std::vector<LabeledRow> rows;
    rows.reserve(2 * quota);
    for (auto s : pos_rows[target]) rows.push_back({s, true});
    for (auto s : negatives[target].items()) rows.push_back({s, false});
    data.sets.emplace_back(target, pool, std::move(rows));
  }
  return data;
}

}  // namespace qforest
