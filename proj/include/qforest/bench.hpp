#pragma once

#include <qforest/correlation.hpp>
#include <qforest/forest.hpp>
#include <qforest/session.hpp>
#include <qforest/sources.hpp>
#include <qforest/state.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

namespace qforest {

struct StrategyResult {
  std::string name;
  /// measurement count -> number of states
  std::map<std::size_t, std::size_t> histogram;
  /// Count per state, in source order.
  std::vector<std::size_t> counts;
  std::size_t failures = 0;  // not certified entangled

  double mean() const {
    if (counts.empty()) return 0.0;
    double s = 0;
    for (auto c : counts) s += static_cast<double>(c);
    return s / static_cast<double>(counts.size());
  }
  double median() const {
    if (counts.empty()) return 0.0;
    auto v = counts;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? static_cast<double>(v[m]) : 0.5 * static_cast<double>(v[m - 1] + v[m]);
  }
  /// States certified within `steps` measurements.
  std::size_t detected_within(std::size_t steps, const std::vector<bool>& detected) const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) c += detected[i] && counts[i] <= steps;
    return c;
  }
  std::vector<bool> detected;
};

struct BenchResult {
  std::size_t n_qubits = 0;
  std::size_t n_states = 0;
  std::size_t max_steps = 0;
  std::string config;
  std::vector<StrategyResult> strategies;
  std::vector<std::size_t> gate_counts;  // accessible sources only

  const StrategyResult& at(const std::string& name) const {
    for (const auto& s : strategies)
      if (s.name == name) return s;
    throw Error(ErrorCode::NotFound, "strategy " + name);
  }
};

/// Runs every strategy on the same n_states states from the source.
/// max_steps = 0 allows all 3^N observables.
inline BenchResult run_benchmark(StateSource& source, const std::vector<Strategy*>& strategies, std::size_t n_states,
                                 std::size_t max_steps = 0, const MeasurementModel& model = {}) {
  if (n_states == 0) throw Error(ErrorCode::InvalidArgument, "n_states must be positive");
  BenchResult result;
  result.n_qubits = source.qubits();
  result.n_states = n_states;
  result.max_steps = max_steps ? max_steps : observable_count(source.qubits());
  result.config = "qubits=" + std::to_string(source.qubits()) + " states=" + std::to_string(n_states) +
                  " seed=" + std::to_string(source.seed()) + " max_steps=" + std::to_string(result.max_steps);
  for (auto* s : strategies) {
    StrategyResult r;
    r.name = s->name();
    result.strategies.push_back(std::move(r));
  }
  for (std::size_t i = 0; i < n_states; ++i) {
    const BenchState bs = source.next();
    if (source.kind() == StateSource::Kind::Accessible) result.gate_counts.push_back(bs.gates);
    for (std::size_t k = 0; k < strategies.size(); ++k) {
      const MeasurementTrace t = run_detection(*strategies[k], bs.truth, result.max_steps, model);
      auto& r = result.strategies[k];
      const bool ok = t.status == Status::Entangled;
      r.counts.push_back(t.count());
      r.detected.push_back(ok);
      ++r.histogram[t.count()];
      r.failures += !ok;
    }
  }
  return result;
}

/// steps, then the cumulative number of certified states per strategy.
inline void write_bench_csv(std::ostream& out, const BenchResult& r) {
  out << "steps";
  for (const auto& s : r.strategies) out << ',' << s.name;
  out << '\n';
  for (std::size_t step = 1; step <= r.max_steps; ++step) {
    out << step;
    for (const auto& s : r.strategies) out << ',' << s.detected_within(step, s.detected);
    out << '\n';
  }
}

struct SweepResult {
  std::vector<double> alphas;
  std::vector<std::size_t> counts;
  double mean = 0;
};

/// Detection on cos(a)|D_2^3> + sin(a)|D_1^3> for a = k (pi/2) / n_points,
/// k = 1..n_points.
inline SweepResult gdansk_sweep(Strategy& strategy, std::size_t n_points) {
  if (n_points == 0) throw Error(ErrorCode::InvalidArgument, "n_points must be positive");
  SweepResult out;
  double total = 0;
  for (std::size_t k = 1; k <= n_points; ++k) {
    const double alpha = static_cast<double>(k) * (std::numbers::pi / 2) / static_cast<double>(n_points);
    const MeasurementTrace t = run_detection(strategy, correlations_of(gdansk_state(alpha)));
    out.alphas.push_back(alpha);
    out.counts.push_back(t.count());
    total += static_cast<double>(t.count());
  }
  out.mean = total / static_cast<double>(n_points);
  return out;
}

/// Lipschitz constant squared of B -> <B> on the unit sphere for a Pauli B.
inline constexpr double kLipschitzSquared = 3.0;

struct ConcentrationReport {
  std::size_t n_qubits = 0;
  std::size_t n_samples = 0;
  double epsilon = 0;
  double fraction_exceeding = 0;  // share of (state, observable) pairs with <B>^2 > epsilon
  double lipschitz_squared = kLipschitzSquared;
  double median = 0;  // median of <B> over every evaluation
  double analytic_bound = 0;
};

/// exp[-(k - 1) eps / (2 pi^2 eta^2)] with k = 2^(N+1) and eta^2 = 3.
inline double levy_bound(std::size_t n_qubits, double epsilon) {
  const double k = std::ldexp(1.0, static_cast<int>(n_qubits) + 1);
  return std::exp(-(k - 1.0) * epsilon / (2.0 * std::numbers::pi * std::numbers::pi * kLipschitzSquared));
}

inline ConcentrationReport concentration_report(std::size_t n_qubits, std::size_t n_samples, double epsilon, Rng& rng) {
  if (n_samples < 100) throw Error(ErrorCode::InvalidArgument, "concentration report needs at least 100 samples");
  if (epsilon < 0) throw Error(ErrorCode::InvalidArgument, "epsilon must be nonnegative");
  const CorrelationEvaluator eval(n_qubits);
  std::vector<double> ex(eval.size());
  std::vector<double> all;
  all.reserve(n_samples * eval.size());
  std::size_t exceeding = 0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    eval.expectations(sample_haar_pure(n_qubits, rng), ex);
    for (double v : ex) {
      exceeding += v * v > epsilon;
      all.push_back(v);
    }
  }
  ConcentrationReport r;
  r.n_qubits = n_qubits;
  r.n_samples = n_samples;
  r.epsilon = epsilon;
  r.fraction_exceeding = static_cast<double>(exceeding) / static_cast<double>(all.size());
  const auto mid = all.begin() + static_cast<std::ptrdiff_t>(all.size() / 2);
  std::nth_element(all.begin(), mid, all.end());
  r.median = *mid;
  r.analytic_bound = levy_bound(n_qubits, epsilon);
  return r;
}

inline void write_concentration_csv(std::ostream& out, const std::vector<ConcentrationReport>& reports) {
  out << "n_qubits,epsilon,fraction,analytic_bound\n";
  for (const auto& r : reports) out << r.n_qubits << ',' << r.epsilon << ',' << r.fraction_exceeding << ',' << r.analytic_bound << '\n';
}

inline void write_concentration_text(std::ostream& out, const ConcentrationReport& r) {
  out << "qubits           " << r.n_qubits << '\n'
      << "samples          " << r.n_samples << '\n'
      << "epsilon          " << r.epsilon << '\n'
      << "fraction > eps   " << r.fraction_exceeding << '\n'
      << "median <B>       " << r.median << '\n'
      << "eta^2            " << r.lipschitz_squared << '\n'
      << "analytic bound   " << r.analytic_bound << '\n';
}

}  // namespace qforest
