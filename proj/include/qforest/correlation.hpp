#pragma once

#include <qforest/error.hpp>
#include <qforest/pauli.hpp>
#include <qforest/state.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <optional>
#include <string>
#include <vector>

namespace qforest {

inline constexpr double kRecordTolerance = 1e-9;

/// Partial map from full-weight observables to expectations, stored densely
/// by canonical index.
class CorrelationRecord {
 public:
  CorrelationRecord() = default;
  explicit CorrelationRecord(std::size_t n_qubits)
      : n_qubits_(n_qubits), values_(observable_count(n_qubits)) {
    if (n_qubits == 0 || n_qubits > kMaxQubits) throw Error(ErrorCode::CapExceeded, "qubit count");
  }

  std::size_t qubits() const { return n_qubits_; }
  std::size_t capacity() const { return values_.size(); }
  double noise_scale() const { return noise_scale_; }

  void set(const PauliString& p, double value) {
    check(p);
    if (!(std::abs(value) <= 1.0 + kRecordTolerance))
      throw Error(ErrorCode::OutOfRange, p.str() + " = " + std::to_string(value));
    values_[p.index()] = value;
  }

  bool contains(const PauliString& p) const {
    check(p);
    return values_[p.index()].has_value();
  }

  std::optional<double> get(const PauliString& p) const {
    check(p);
    return values_[p.index()];
  }

  double at(const PauliString& p) const {
    auto v = get(p);
    if (!v) throw Error(ErrorCode::NotFound, "no value for " + p.str());
    return *v;
  }

  /// Value by canonical index; empty when unknown.
  const std::optional<double>& by_index(std::size_t index) const { return values_[index]; }

  std::size_t known_count() const {
    std::size_t c = 0;
    for (const auto& v : values_) c += v.has_value();
    return c;
  }

  bool complete() const { return known_count() == values_.size(); }

  std::vector<PauliString> missing() const {
    std::vector<PauliString> out;
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (!values_[i]) out.push_back(PauliString::from_index(n_qubits_, i));
    return out;
  }

  /// Sum of squared values over every known entry.
  double squared_sum() const {
    double s = 0;
    for (const auto& v : values_)
      if (v) s += *v * *v;
    return s;
  }

  friend CorrelationRecord apply_white_noise(const CorrelationRecord& record, double p);

 private:
  void check(const PauliString& p) const {
    if (p.size() != n_qubits_)
      throw Error(ErrorCode::QubitMismatch, p.str() + " in a " + std::to_string(n_qubits_) + "-qubit record");
  }

  std::size_t n_qubits_ = 0;
  std::vector<std::optional<double>> values_;
  double noise_scale_ = 1.0;
};

/// (1-p)|phi><phi| + p id/2^N scales every full-weight correlation by 1-p.
inline CorrelationRecord apply_white_noise(const CorrelationRecord& record, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::OutOfRange, "noise probability " + std::to_string(p));
  CorrelationRecord out = record;
  for (auto& v : out.values_)
    if (v) *v *= (1.0 - p);
  out.noise_scale_ = record.noise_scale_ * (1.0 - p);
  return out;
}

/// Complete record of every full-weight correlation of a pure state.
inline CorrelationRecord correlations_of(const PureState& state) {
  CorrelationRecord r(state.qubits());
  for (const auto& p : ObservableSet(state.qubits())) r.set(p, expectation(state, p));
  return r;
}

/// Evaluates all 3^N expectations of many states with the bit masks of every
/// observable computed once.
class CorrelationEvaluator {
 public:
  explicit CorrelationEvaluator(std::size_t n_qubits) : n_qubits_(n_qubits) {
    for (const auto& p : ObservableSet(n_qubits)) {
      x_masks_.push_back(p.x_mask());
      z_masks_.push_back(p.z_mask());
      y_counts_.push_back(static_cast<std::uint8_t>(p.y_count() % 4));
    }
  }

  std::size_t qubits() const { return n_qubits_; }
  std::size_t size() const { return x_masks_.size(); }

  /// Writes <B_i> for every observable into out (size 3^N).
  void expectations(const PureState& state, std::span<double> out) const {
    if (state.qubits() != n_qubits_) throw Error(ErrorCode::DimensionMismatch, "evaluator qubit count");
    const auto amps = state.amplitudes();
    for (std::size_t i = 0; i < x_masks_.size(); ++i) {
      const std::uint64_t xm = x_masks_[i];
      const std::uint64_t zm = z_masks_[i];
      complex acc{};
      for (std::size_t k = 0; k < amps.size(); ++k) {
        const complex term = std::conj(amps[k ^ xm]) * amps[k];
        acc += (std::popcount(k & zm) & 1) ? -term : term;
      }
      // multiply by i^(#Y)
      double v = 0;
      switch (y_counts_[i]) {
        case 0: v = acc.real(); break;
        case 1: v = -acc.imag(); break;
        case 2: v = -acc.real(); break;
        case 3: v = acc.imag(); break;
      }
      out[i] = std::clamp(v, -1.0, 1.0);
    }
  }

  std::vector<double> expectations(const PureState& state) const {
    std::vector<double> out(size());
    expectations(state, out);
    return out;
  }

  std::vector<double> squared(const PureState& state) const {
    auto out = expectations(state);
    for (auto& v : out) v *= v;
    return out;
  }

 private:
  std::size_t n_qubits_;
  std::vector<std::uint64_t> x_masks_;
  std::vector<std::uint64_t> z_masks_;
  std::vector<std::uint8_t> y_counts_;
};

/// All 3^N squared expectations in canonical order.
inline std::vector<double> squared_correlations(const PureState& state) {
  return CorrelationEvaluator(state.qubits()).squared(state);
}

}  // namespace qforest
