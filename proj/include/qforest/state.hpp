#pragma once

#include <qforest/error.hpp>
#include <qforest/pauli.hpp>

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qforest {

using Rng = std::mt19937_64;

/// Normalized amplitude vector over 2^N computational basis states. Basis
/// index bit (N-1-q) holds qubit q, so |001> is index 1.
class PureState {
 public:
  PureState() = default;

  /// Normalizes the given amplitudes; rejects a non power-of-two length or a zero vector.
  explicit PureState(std::vector<complex> amplitudes) : amps_(std::move(amplitudes)) {
    if (amps_.size() < 2 || !std::has_single_bit(amps_.size()))
      throw Error(ErrorCode::DimensionMismatch, "amplitude count " + std::to_string(amps_.size()));
    n_qubits_ = static_cast<std::size_t>(std::countr_zero(amps_.size()));
    normalize();
  }

  static PureState basis(std::size_t n_qubits, std::size_t index = 0) {
    if (n_qubits == 0 || n_qubits > 20) throw Error(ErrorCode::CapExceeded, "qubit count");
    std::vector<complex> amps(std::size_t{1} << n_qubits);
    amps.at(index) = 1.0;
    return PureState(std::move(amps));
  }

  std::size_t qubits() const { return n_qubits_; }
  std::size_t dim() const { return amps_.size(); }
  std::span<const complex> amplitudes() const { return amps_; }
  const complex& operator[](std::size_t i) const { return amps_[i]; }

  double norm_squared() const {
    double s = 0;
    for (const auto& a : amps_) s += std::norm(a);
    return s;
  }

  /// Mutable access for gate application; callers keep the vector normalized.
  std::vector<complex>& mutable_amplitudes() { return amps_; }

 private:
  void normalize() {
    const double n = std::sqrt(norm_squared());
    if (n == 0.0) throw Error(ErrorCode::InvalidArgument, "zero state vector");
    for (auto& a : amps_) a /= n;
  }

  std::size_t n_qubits_ = 0;
  std::vector<complex> amps_;
};

/// <psi|P|psi> by applying the Pauli word to basis indices; no matrix is built.
inline double expectation(const PureState& state, const PauliString& p) {
  if (state.qubits() != p.size())
    throw Error(ErrorCode::DimensionMismatch,
                p.str() + " on a " + std::to_string(state.qubits()) + "-qubit state");
  const std::uint64_t xm = p.x_mask();
  const std::uint64_t zm = p.z_mask();
  // i^(#Y) is real for an even count and imaginary for odd; the result is real either way.
  static constexpr std::array<complex, 4> kIPow{complex{1, 0}, complex{0, 1}, complex{-1, 0}, complex{0, -1}};
  const complex global = kIPow[p.y_count() % 4];
  const auto amps = state.amplitudes();
  complex acc{};
  for (std::size_t k = 0; k < amps.size(); ++k) {
    const double sign = (std::popcount(k & zm) & 1) ? -1.0 : 1.0;
    acc += std::conj(amps[k ^ xm]) * amps[k] * sign;
  }
  return std::clamp((global * acc).real(), -1.0, 1.0);
}

/// Dense <psi|M|psi>; the reference path for expectation().
inline double expectation_dense(const PureState& state, const DenseMatrix& m) {
  if (m.dim != state.dim()) throw Error(ErrorCode::DimensionMismatch, "matrix/state dimension");
  complex acc{};
  for (std::size_t r = 0; r < m.dim; ++r) {
    complex row{};
    for (std::size_t c = 0; c < m.dim; ++c) row += m(r, c) * state[c];
    acc += std::conj(state[r]) * row;
  }
  return acc.real();
}

/// Expectation of a single-qubit Pauli on qubit q with identity elsewhere.
inline double local_expectation(const PureState& state, std::size_t qubit, Pauli letter) {
  const std::size_t n = state.qubits();
  if (qubit >= n) throw Error(ErrorCode::OutOfRange, "qubit index");
  const std::uint64_t bit = std::uint64_t{1} << (n - 1 - qubit);
  const auto amps = state.amplitudes();
  complex acc{};
  for (std::size_t k = 0; k < amps.size(); ++k) {
    const bool one = k & bit;
    switch (letter) {
      case Pauli::X: acc += std::conj(amps[k ^ bit]) * amps[k]; break;
      case Pauli::Y: acc += std::conj(amps[k ^ bit]) * amps[k] * (one ? complex{0, -1} : complex{0, 1}); break;
      case Pauli::Z: acc += std::norm(amps[k]) * (one ? -1.0 : 1.0); break;
    }
  }
  return acc.real();
}

using BlochVector = std::array<double, 3>;

inline std::vector<BlochVector> bloch_vectors(const PureState& state) {
  std::vector<BlochVector> out(state.qubits());
  for (std::size_t q = 0; q < state.qubits(); ++q)
    out[q] = {local_expectation(state, q, Pauli::X), local_expectation(state, q, Pauli::Y),
              local_expectation(state, q, Pauli::Z)};
  return out;
}

inline PureState sample_haar_pure(std::size_t n_qubits, Rng& rng) {
  if (n_qubits == 0) throw Error(ErrorCode::InvalidArgument, "zero qubits");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<complex> amps(std::size_t{1} << n_qubits);
  for (auto& a : amps) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    a = {re, im};
  }
  return PureState(std::move(amps));
}

/// Tensor product of single-qubit states, first factor = qubit 0.
inline PureState product_state(std::span<const PureState> factors) {
  std::vector<complex> amps{1.0};
  for (const auto& f : factors) {
    std::vector<complex> next(amps.size() * f.dim());
    for (std::size_t i = 0; i < amps.size(); ++i)
      for (std::size_t j = 0; j < f.dim(); ++j) next[i * f.dim() + j] = amps[i] * f[j];
    amps = std::move(next);
  }
  return PureState(std::move(amps));
}

// Gates ---------------------------------------------------------------------

enum class GateKind : std::uint8_t { H, S, T, CNOT };

struct Gate {
  GateKind kind;
  std::size_t target;
  std::size_t control = 0;  // CNOT only

  friend bool operator==(const Gate&, const Gate&) = default;
};

inline void apply_gate(PureState& state, const Gate& g) {
  const std::size_t n = state.qubits();
  if (g.target >= n || (g.kind == GateKind::CNOT && (g.control >= n || g.control == g.target)))
    throw Error(ErrorCode::OutOfRange, "gate qubit index");
  auto& amps = state.mutable_amplitudes();
  const std::uint64_t tbit = std::uint64_t{1} << (n - 1 - g.target);
  switch (g.kind) {
    case GateKind::H: {
      const double r = std::numbers::sqrt2 / 2;
      for (std::size_t k = 0; k < amps.size(); ++k) {
        if (k & tbit) continue;
        const complex a0 = amps[k];
        const complex a1 = amps[k | tbit];
        amps[k] = r * (a0 + a1);
        amps[k | tbit] = r * (a0 - a1);
      }
      break;
    }
    case GateKind::S:
      for (std::size_t k = 0; k < amps.size(); ++k)
        if (k & tbit) amps[k] *= complex{0, 1};
      break;
    case GateKind::T: {
      const complex phase = std::polar(1.0, std::numbers::pi / 4);
      for (std::size_t k = 0; k < amps.size(); ++k)
        if (k & tbit) amps[k] *= phase;
      break;
    }
    case GateKind::CNOT: {
      const std::uint64_t cbit = std::uint64_t{1} << (n - 1 - g.control);
      for (std::size_t k = 0; k < amps.size(); ++k)
        if ((k & cbit) && !(k & tbit)) std::swap(amps[k], amps[k | tbit]);
      break;
    }
  }
}

/// Gates applied in sequence order: circuit[0] acts first.
using Circuit = std::vector<Gate>;

inline PureState apply_circuit(PureState state, const Circuit& circuit) {
  for (const auto& g : circuit) apply_gate(state, g);
  return state;
}

/// Poisson-many gates, each drawn uniformly from {H, T, CNOT} on uniform
/// qubits. CNOT is left out of the draw for a single qubit.
inline Circuit random_circuit(std::size_t n_qubits, double mean_gates, Rng& rng) {
  if (n_qubits == 0) throw Error(ErrorCode::InvalidArgument, "zero qubits");
  if (!(mean_gates > 0)) throw Error(ErrorCode::InvalidArgument, "mean gate count must be positive");
  std::poisson_distribution<std::size_t> count_dist(mean_gates);
  const std::size_t count = count_dist(rng);
  std::uniform_int_distribution<int> kind_dist(0, n_qubits >= 2 ? 2 : 1);
  std::uniform_int_distribution<std::size_t> qubit_dist(0, n_qubits - 1);
  Circuit c;
  c.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    switch (kind_dist(rng)) {
      case 0: c.push_back({GateKind::H, qubit_dist(rng)}); break;
      case 1: c.push_back({GateKind::T, qubit_dist(rng)}); break;
      default: {
        const std::size_t control = qubit_dist(rng);
        std::uniform_int_distribution<std::size_t> other(0, n_qubits - 2);
        std::size_t target = other(rng);
        if (target >= control) ++target;
        c.push_back({GateKind::CNOT, target, control});
      }
    }
  }
  return c;
}

inline PureState random_circuit_state(std::size_t n_qubits, double mean_gates, Rng& rng) {
  return apply_circuit(PureState::basis(n_qubits), random_circuit(n_qubits, mean_gates, rng));
}

/// Mean circuit length used by the accessible-state source.
inline double accessible_mean_gates(std::size_t n_qubits) {
  return 24.0 * static_cast<double>(n_qubits) * static_cast<double>(n_qubits - 1);
}

// Named states ----------------------------------------------------------------

inline PureState bell_state() {
  return PureState({1.0, 0.0, 0.0, 1.0});
}

inline PureState ghz_state(std::size_t n_qubits) {
  if (n_qubits < 2 || n_qubits > kMaxQubits) throw Error(ErrorCode::InvalidArgument, "ghz qubit count");
  std::vector<complex> amps(std::size_t{1} << n_qubits);
  amps.front() = 1.0;
  amps.back() = 1.0;
  return PureState(std::move(amps));
}

inline PureState dicke_state(std::size_t n_qubits, std::size_t excitations) {
  if (n_qubits == 0 || n_qubits > kMaxQubits) throw Error(ErrorCode::InvalidArgument, "dicke qubit count");
  if (excitations > n_qubits) throw Error(ErrorCode::InvalidArgument, "dicke excitations exceed qubits");
  std::vector<complex> amps(std::size_t{1} << n_qubits);
  for (std::size_t k = 0; k < amps.size(); ++k)
    if (static_cast<std::size_t>(std::popcount(k)) == excitations) amps[k] = 1.0;
  return PureState(std::move(amps));
}

/// cos(alpha)|D_2^3> + sin(alpha)|D_1^3>; any real alpha is accepted.
inline PureState gdansk_state(double alpha) {
  const PureState d2 = dicke_state(3, 2);
  const PureState d1 = dicke_state(3, 1);
  std::vector<complex> amps(8);
  for (std::size_t k = 0; k < 8; ++k) amps[k] = std::cos(alpha) * d2[k] + std::sin(alpha) * d1[k];
  return PureState(std::move(amps));
}

/// Resolves "bell", "ghz:N", "dicke:N:K", "gdansk:ALPHA" and "zero:N".
inline PureState named_state(std::string_view spec) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto colon = spec.find(':', start);
    parts.emplace_back(spec.substr(start, colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  auto param = [&](std::size_t i) -> std::string {
    if (i >= parts.size()) throw Error(ErrorCode::UnknownState, "missing parameter in \"" + std::string(spec) + "\"");
    return parts[i];
  };
  auto as_count = [&](std::size_t i) -> std::size_t {
    try {
      std::size_t used = 0;
      const auto v = std::stoul(param(i), &used);
      if (used != param(i).size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::UnknownState, "bad integer in \"" + std::string(spec) + "\"");
    }
  };
  const std::string& name = parts[0];
  if (name == "bell" && parts.size() == 1) return bell_state();
  if (name == "ghz" && parts.size() <= 2) return ghz_state(parts.size() == 2 ? as_count(1) : 3);
  if (name == "dicke" && parts.size() == 3) return dicke_state(as_count(1), as_count(2));
  if (name == "zero" && parts.size() <= 2) return PureState::basis(parts.size() == 2 ? as_count(1) : 2);
  if (name == "gdansk" && parts.size() == 2) {
    try {
      return gdansk_state(std::stod(param(1)));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::UnknownState, "bad angle in \"" + std::string(spec) + "\"");
    }
  }
  throw Error(ErrorCode::UnknownState, "\"" + std::string(spec) + "\"");
}

}  // namespace qforest
