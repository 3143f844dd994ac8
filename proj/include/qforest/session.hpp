#pragma once

#include <qforest/correlation.hpp>
#include <qforest/error.hpp>
#include <qforest/pauli.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace qforest {

enum class Status { Undetermined, Entangled, Exhausted };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Undetermined: return "undetermined";
    case Status::Entangled: return "entangled";
    case Status::Exhausted: return "exhausted";
  }
  return "?";
}

/// Values this far outside [-1, 1] are clamped rather than rejected.
inline constexpr double kClampTolerance = 1e-6;

/// Certification needs the sum to clear one by this much; pure product states
/// sit exactly on the boundary and rounding must not push them over.
inline constexpr double kCriterionTolerance = 1e-9;

struct Measurement {
  PauliString observable;
  double value;
};

/// Accumulates full-correlation results; entanglement is certified once the
/// sum of squared expectations exceeds one.
class Session {
 public:
  explicit Session(std::size_t n_qubits) : record_(check_qubits(n_qubits)) {}

  std::size_t qubits() const { return record_.qubits(); }
  const CorrelationRecord& record() const { return record_; }
  const std::vector<Measurement>& history() const { return history_; }
  double criterion_sum() const { return criterion_sum_; }
  Status status() const { return status_; }
  bool measured(const PauliString& p) const { return record_.contains(p); }
  std::size_t unmeasured_count() const { return record_.capacity() - history_.size(); }

  void record(const PauliString& p, double value) {
    if (p.size() != qubits())
      throw Error(ErrorCode::QubitMismatch, p.str() + " in a " + std::to_string(qubits()) + "-qubit session");
    if (!(std::abs(value) <= 1.0 + kClampTolerance))
      throw Error(ErrorCode::OutOfRange, p.str() + " = " + std::to_string(value));
    if (record_.contains(p)) throw Error(ErrorCode::Duplicate, p.str() + " already measured");
    value = std::clamp(value, -1.0, 1.0);
    record_.set(p, value);
    history_.push_back({p, value});
    criterion_sum_ += value * value;
    if (criterion_sum_ > 1.0 + kCriterionTolerance)
      status_ = Status::Entangled;
    else if (history_.size() == record_.capacity())
      status_ = Status::Exhausted;
  }

 private:
  static std::size_t check_qubits(std::size_t n) {
    if (n == 0 || n > kMaxQubits) throw Error(ErrorCode::CapExceeded, "session qubit count " + std::to_string(n));
    return n;
  }

  CorrelationRecord record_;
  std::vector<Measurement> history_;
  double criterion_sum_ = 0.0;
  Status status_ = Status::Undetermined;
};

inline Session new_session(std::size_t n_qubits) { return Session(n_qubits); }

inline Session record_result(Session session, const PauliString& p, double value) {
  session.record(p, value);
  return session;
}

/// A recommender of the next observable. Implementations may keep per-session
/// state but must derive it from the session history alone, so the same
/// history always yields the same recommendation.
class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual std::string name() const = 0;
  /// An observable not yet measured in the session.
  virtual PauliString recommend(const Session& session) = 0;
  /// Measurements spent before the session starts (Bloch preliminaries).
  virtual std::size_t preliminary_cost() const { return 0; }
};

/// Walks a fixed list, then the canonical order, skipping measured entries.
class StaticOrderStrategy final : public Strategy {
 public:
  explicit StaticOrderStrategy(std::vector<PauliString> order = {}) : order_(std::move(order)) {}

  std::string name() const override { return "static"; }

  PauliString recommend(const Session& session) override {
    for (const auto& p : order_)
      if (p.size() == session.qubits() && !session.measured(p)) return p;
    for (const auto& p : ObservableSet(session.qubits()))
      if (!session.measured(p)) return p;
    throw Error(ErrorCode::ContractViolation, "no unmeasured observable left");
  }

 private:
  std::vector<PauliString> order_;
};

struct TraceStep {
  std::size_t step;
  PauliString observable;
  double value;
  double running_sum;
  Status status;
};

struct MeasurementTrace {
  std::string strategy;
  std::vector<TraceStep> steps;
  Status status = Status::Undetermined;
  double criterion_sum = 0.0;
  std::size_t preliminary = 0;

  std::size_t count() const { return steps.size(); }
  std::size_t count_with_preliminary() const { return steps.size() + preliminary; }
};

/// Exact expectations by default; with shots > 0 each value is the mean of a
/// simulated binary experiment.
struct MeasurementModel {
  std::size_t shots = 0;
  std::uint64_t seed = 0;
};

inline double sample_shot_mean(double expectation_value, std::size_t shots, Rng& rng) {
  const double q = std::clamp((1.0 + expectation_value) / 2.0, 0.0, 1.0);
  std::binomial_distribution<std::size_t> dist(shots, q);
  return 2.0 * static_cast<double>(dist(rng)) / static_cast<double>(shots) - 1.0;
}

/// Recommend, measure, record until entangled, exhausted or max_steps
/// (0 means 3^N).
inline MeasurementTrace run_detection(Strategy& strategy, const CorrelationRecord& truth, std::size_t max_steps = 0,
                                      const MeasurementModel& model = {}) {
  if (!truth.complete())
    throw Error(ErrorCode::MissingEntries, std::to_string(truth.missing().size()) + " observables have no truth value");
  Session session(truth.qubits());
  if (max_steps == 0) max_steps = truth.capacity();
  Rng rng(model.seed);
  MeasurementTrace trace;
  trace.strategy = strategy.name();
  trace.preliminary = strategy.preliminary_cost();
  while (session.status() == Status::Undetermined && trace.steps.size() < max_steps) {
    const PauliString p = strategy.recommend(session);
    if (p.size() != session.qubits() || session.measured(p))
      throw Error(ErrorCode::ContractViolation, strategy.name() + " recommended measured observable " + p.str());
    double value = truth.at(p);
    if (model.shots > 0) value = sample_shot_mean(value, model.shots, rng);
    session.record(p, value);
    trace.steps.push_back({trace.steps.size() + 1, p, session.history().back().value, session.criterion_sum(),
                           session.status()});
  }
  trace.status = session.status();
  trace.criterion_sum = session.criterion_sum();
  return trace;
}

/// CSV with columns step, observable, value, running_sum, status.
inline void write_trace_csv(std::ostream& out, const MeasurementTrace& trace) {
  out << "step,observable,value,running_sum,status\n";
  for (const auto& s : trace.steps) {
    out << s.step << ',' << s.observable.str() << ',' << s.value << ',' << s.running_sum << ','
        << to_string(s.status) << '\n';
  }
}

}  // namespace qforest
