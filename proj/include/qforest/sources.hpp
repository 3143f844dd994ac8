#pragma once

#include <qforest/correlation.hpp>
#include <qforest/error.hpp>
#include <qforest/pauli.hpp>
#include <qforest/session.hpp>
#include <qforest/state.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace qforest {

/// Reads "observable,value" rows (an optional header line and blank lines
/// are skipped) covering every full-weight observable.
inline CorrelationRecord parse_fixture(std::istream& in, const std::string& where = "fixture") {
  std::optional<CorrelationRecord> record;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorCode::Malformed, where + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) fail("expected observable,value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    const std::string label = trim(line.substr(0, comma));
    const std::string value_text = trim(line.substr(comma + 1));
    if (line_no == 1 && label == "observable") continue;
    PauliString p;
    try {
      p = PauliString::parse(label);
    } catch (const Error& e) {
      fail(e.what());
    }
    double value = 0;
    try {
      std::size_t used = 0;
      value = std::stod(value_text, &used);
      if (used != value_text.size()) fail("trailing characters in value \"" + value_text + "\"");
    } catch (const std::logic_error&) {
      fail("bad value \"" + value_text + "\"");
    }
    if (!(std::abs(value) <= 1.0 + kClampTolerance)) fail("value out of range for " + p.str());
    value = std::clamp(value, -1.0, 1.0);
    if (!record) {
      if (p.size() > kMaxQubits) fail("too many qubits");
      record.emplace(p.size());
    }
    if (p.size() != record->qubits()) fail("observable " + p.str() + " has the wrong qubit count");
    if (record->contains(p)) fail("duplicate observable " + p.str());
    record->set(p, value);
  }
  if (!record) throw Error(ErrorCode::Malformed, where + ": no rows");
  if (!record->complete()) {
    std::string names;
    for (const auto& m : record->missing()) names += (names.empty() ? "" : ",") + m.str();
    throw Error(ErrorCode::MissingEntries, where + ": missing " + names);
  }
  return *record;
}

inline CorrelationRecord load_fixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::NotFound, "cannot open fixture " + path);
  return parse_fixture(in, path);
}

/// A state to benchmark: the truth record, and the state when one exists.
struct BenchState {
  CorrelationRecord truth;
  std::optional<PureState> state;
  std::size_t gates = 0;  // circuit length for accessible states
};

/// Infinite, seeded stream of benchmark states.
class StateSource {
 public:
  enum class Kind { Haar, Accessible, Named, Fixture };

  static StateSource haar(std::size_t n_qubits, std::uint64_t seed) {
    StateSource s(Kind::Haar, n_qubits, seed);
    return s;
  }

  /// Random {H, T, CNOT} circuits with Poisson(24 N (N-1)) gates; when
  /// `reject` is set, only states with <x...x>^2 >= 0.25 are emitted.
  static StateSource accessible(std::size_t n_qubits, std::uint64_t seed, bool reject = true, double mean_gates = 0) {
    if (n_qubits < 2) throw Error(ErrorCode::InvalidArgument, "accessible source needs at least two qubits");
    StateSource s(Kind::Accessible, n_qubits, seed);
    s.reject_ = reject;
    s.mean_gates_ = mean_gates > 0 ? mean_gates : accessible_mean_gates(n_qubits);
    return s;
  }

  static StateSource named(const std::string& spec) {
    const PureState st = named_state(spec);
    StateSource s(Kind::Named, st.qubits(), 0);
    s.fixed_ = BenchState{correlations_of(st), st, 0};
    return s;
  }

  static StateSource fixture(const std::string& path) {
    CorrelationRecord r = load_fixture(path);
    StateSource s(Kind::Fixture, r.qubits(), 0);
    s.fixed_ = BenchState{std::move(r), std::nullopt, 0};
    return s;
  }

  Kind kind() const { return kind_; }
  std::size_t qubits() const { return n_qubits_; }
  std::uint64_t seed() const { return seed_; }
  double mean_gates() const { return mean_gates_; }
  std::size_t attempts() const { return attempts_; }
  std::size_t accepted() const { return accepted_; }

  BenchState next() {
    switch (kind_) {
      case Kind::Named:
      case Kind::Fixture:
        ++attempts_;
        ++accepted_;
        return *fixed_;
      case Kind::Haar: {
        ++attempts_;
        ++accepted_;
        PureState st = sample_haar_pure(n_qubits_, rng_);
        return {correlations_of(st), st, 0};
      }
      case Kind::Accessible: break;
    }
    const PauliString all_x(std::vector<Pauli>(n_qubits_, Pauli::X));
    while (true) {
      ++attempts_;
      const Circuit c = random_circuit(n_qubits_, mean_gates_, rng_);
      PureState st = apply_circuit(PureState::basis(n_qubits_), c);
      const double v = expectation(st, all_x);
      if (!reject_ || v * v >= 0.25) {
        ++accepted_;
        return {correlations_of(st), st, c.size()};
      }
      if (attempts_ >= 10000 && static_cast<double>(accepted_) < 0.01 * static_cast<double>(attempts_))
        throw Error(ErrorCode::InvalidArgument, "accessible source acceptance rate below 1%");
    }
  }

 private:
  StateSource(Kind kind, std::size_t n_qubits, std::uint64_t seed)
      : kind_(kind), n_qubits_(n_qubits), seed_(seed), rng_(seed) {}

  Kind kind_;
  std::size_t n_qubits_;
  std::uint64_t seed_;
  Rng rng_;
  bool reject_ = false;
  double mean_gates_ = 0;
  std::optional<BenchState> fixed_;
  std::size_t attempts_ = 0;
  std::size_t accepted_ = 0;
};

}  // namespace qforest
