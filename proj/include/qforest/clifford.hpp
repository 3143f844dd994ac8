#pragma once

#include <qforest/error.hpp>
#include <qforest/pauli.hpp>
#include <qforest/state.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

namespace qforest {

/// Pauli word that may carry identity factors, with a +/-1 sign. Symplectic
/// form: (x, z) = (1, 0) X, (1, 1) Y, (0, 1) Z, (0, 0) identity.
struct SignedPauli {
  std::vector<std::uint8_t> x;
  std::vector<std::uint8_t> z;
  bool negative = false;

  static SignedPauli identity(std::size_t n) { return {std::vector<std::uint8_t>(n), std::vector<std::uint8_t>(n), false}; }

  static SignedPauli from(const PauliString& p) {
    SignedPauli s = identity(p.size());
    for (std::size_t q = 0; q < p.size(); ++q) {
      s.x[q] = p[q] != Pauli::Z;
      s.z[q] = p[q] != Pauli::X;
    }
    return s;
  }

  std::size_t size() const { return x.size(); }
  bool full_weight() const {
    for (std::size_t q = 0; q < x.size(); ++q)
      if (!x[q] && !z[q]) return false;
    return true;
  }
  int sign() const { return negative ? -1 : 1; }

  /// Letters only; throws when an identity factor is present.
  PauliString letters() const {
    std::vector<Pauli> out(x.size());
    for (std::size_t q = 0; q < x.size(); ++q) {
      if (!x[q] && !z[q]) throw Error(ErrorCode::InvalidArgument, "word has identity factors: " + str());
      out[q] = x[q] ? (z[q] ? Pauli::Y : Pauli::X) : Pauli::Z;
    }
    return PauliString(std::move(out));
  }

  std::string str() const {
    std::string s(negative ? "-" : "+");
    for (std::size_t q = 0; q < x.size(); ++q) s.push_back(x[q] ? (z[q] ? 'y' : 'x') : (z[q] ? 'z' : 'i'));
    return s;
  }

  friend bool operator==(const SignedPauli&, const SignedPauli&) = default;
};

namespace detail {

// Exponent of i picked up when multiplying single-site Paulis (x1,z1)(x2,z2).
inline int product_phase(int x1, int z1, int x2, int z2) {
  if (!x1 && !z1) return 0;
  if (x1 && z1) return z2 - x2;
  if (x1) return z2 * (2 * x2 - 1);
  return x2 * (1 - 2 * z2);
}

// Accumulates i^phase * word; multiplying on the right.
struct PhasedWord {
  std::vector<std::uint8_t> x, z;
  int phase = 0;

  void multiply(const SignedPauli& rhs) {
    phase += rhs.negative ? 2 : 0;
    for (std::size_t q = 0; q < x.size(); ++q) {
      phase += product_phase(x[q], z[q], rhs.x[q], rhs.z[q]);
      x[q] ^= rhs.x[q];
      z[q] ^= rhs.z[q];
    }
    phase = ((phase % 4) + 4) % 4;
  }
};

}  // namespace detail

/// Conjugates a signed Pauli by one gate: P -> G P G^dagger.
inline void conjugate_by_gate(SignedPauli& p, const Gate& g) {
  switch (g.kind) {
    case GateKind::H: {
      auto& x = p.x[g.target];
      auto& z = p.z[g.target];
      p.negative ^= (x & z) != 0;
      std::swap(x, z);
      break;
    }
    case GateKind::S: {
      auto& x = p.x[g.target];
      auto& z = p.z[g.target];
      p.negative ^= (x & z) != 0;
      z ^= x;
      break;
    }
    case GateKind::CNOT: {
      const std::size_t c = g.control;
      const std::size_t t = g.target;
      p.negative ^= (p.x[c] & p.z[t] & (p.x[t] ^ p.z[c] ^ 1)) != 0;
      p.x[t] ^= p.x[c];
      p.z[c] ^= p.z[t];
      break;
    }
    case GateKind::T:
      throw Error(ErrorCode::InvalidArgument, "T is not a Clifford gate");
  }
}

/// Images of X_q and Z_q under conjugation by a Clifford circuit C, together
/// with the circuit itself so states can be transformed consistently.
class CliffordTableau {
 public:
  explicit CliffordTableau(std::size_t n_qubits) : n_(n_qubits) {
    for (std::size_t q = 0; q < n_; ++q) {
      SignedPauli xq = SignedPauli::identity(n_);
      xq.x[q] = 1;
      SignedPauli zq = SignedPauli::identity(n_);
      zq.z[q] = 1;
      x_images_.push_back(std::move(xq));
      z_images_.push_back(std::move(zq));
    }
  }

  static CliffordTableau from_circuit(std::size_t n_qubits, const Circuit& circuit) {
    CliffordTableau t(n_qubits);
    for (const auto& g : circuit) t.append(g);
    return t;
  }

  /// C <- G C.
  void append(const Gate& g) {
    for (auto& img : x_images_) conjugate_by_gate(img, g);
    for (auto& img : z_images_) conjugate_by_gate(img, g);
    circuit_.push_back(g);
  }

  std::size_t qubits() const { return n_; }
  const Circuit& circuit() const { return circuit_; }
  const SignedPauli& x_image(std::size_t q) const { return x_images_[q]; }
  const SignedPauli& z_image(std::size_t q) const { return z_images_[q]; }

  /// C P C^dagger for a full-weight P. The result may contain identity factors.
  SignedPauli conjugate(const PauliString& p) const {
    if (p.size() != n_) throw Error(ErrorCode::LengthMismatch, "tableau/string qubit count");
    detail::PhasedWord acc{std::vector<std::uint8_t>(n_), std::vector<std::uint8_t>(n_), 0};
    for (std::size_t q = 0; q < n_; ++q) {
      switch (p[q]) {
        case Pauli::X: acc.multiply(x_images_[q]); break;
        case Pauli::Z: acc.multiply(z_images_[q]); break;
        case Pauli::Y:  // Y = i X Z
          acc.phase += 1;
          acc.multiply(x_images_[q]);
          acc.multiply(z_images_[q]);
          break;
      }
    }
    if (acc.phase % 2 != 0) throw Error(ErrorCode::ContractViolation, "non-Hermitian conjugate");
    return SignedPauli{std::move(acc.x), std::move(acc.z), acc.phase == 2};
  }

  /// True when every full-weight string maps to a full-weight string.
  bool preserves_full_weight() const {
    for (const auto& p : ObservableSet(n_))
      if (!conjugate(p).full_weight()) return false;
    return true;
  }

 private:
  std::size_t n_;
  std::vector<SignedPauli> x_images_;
  std::vector<SignedPauli> z_images_;
  Circuit circuit_;
};

/// Random H/S/CNOT word of the given length (default 8 N^2 + 8). Uniformity
/// over the Clifford group is not claimed; the commutation-preservation
/// suite is the contract.
inline CliffordTableau random_clifford(std::size_t n_qubits, Rng& rng, std::size_t length = 0) {
  if (n_qubits == 0) throw Error(ErrorCode::InvalidArgument, "zero qubits");
  if (length == 0) length = 8 * n_qubits * n_qubits + 8;
  std::uniform_int_distribution<int> kind(0, n_qubits >= 2 ? 2 : 1);
  std::uniform_int_distribution<std::size_t> qubit(0, n_qubits - 1);
  CliffordTableau t(n_qubits);
  for (std::size_t i = 0; i < length; ++i) {
    switch (kind(rng)) {
      case 0: t.append({GateKind::H, qubit(rng)}); break;
      case 1: t.append({GateKind::S, qubit(rng)}); break;
      default: {
        const std::size_t c = qubit(rng);
        std::uniform_int_distribution<std::size_t> other(0, n_qubits - 2);
        std::size_t tq = other(rng);
        if (tq >= c) ++tq;
        t.append({GateKind::CNOT, tq, c});
      }
    }
  }
  return t;
}

/// The 24 single-qubit Cliffords (modulo phase) as shortest H/S words, with
/// the letter each maps X, Y, Z to (signs dropped).
struct SingleQubitClifford {
  std::vector<GateKind> word;
  std::array<Pauli, 3> image;  // image[a-1] = letter that Pauli a maps to
};

inline const std::vector<SingleQubitClifford>& single_qubit_cliffords() {
  static const std::vector<SingleQubitClifford> table = [] {
    using Key = std::pair<std::string, std::string>;
    std::vector<SingleQubitClifford> out;
    std::map<Key, bool> seen;
    std::queue<std::vector<GateKind>> frontier;
    frontier.push({});
    while (!frontier.empty()) {
      auto word = frontier.front();
      frontier.pop();
      Circuit c;
      for (auto k : word) c.push_back({k, 0});
      const auto t = CliffordTableau::from_circuit(1, c);
      Key key{t.x_image(0).str(), t.z_image(0).str()};
      if (seen.count(key)) continue;
      seen[key] = true;
      SingleQubitClifford e;
      e.word = word;
      for (int a = 1; a <= 3; ++a)
        e.image[a - 1] = t.conjugate(PauliString({static_cast<Pauli>(a)})).letters()[0];
      out.push_back(std::move(e));
      for (auto k : {GateKind::H, GateKind::S}) {
        auto next = word;
        next.push_back(k);
        frontier.push(std::move(next));
      }
    }
    return out;
  }();
  return table;
}

/// Random product of single-qubit Cliffords sending `from` to +/-`to`, letter
/// by letter. Local Cliffords always keep the full-weight set closed.
inline CliffordTableau local_clifford_mapping(const PauliString& from, const PauliString& to, Rng& rng) {
  if (from.size() != to.size()) throw Error(ErrorCode::LengthMismatch, "mapping qubit count");
  const auto& table = single_qubit_cliffords();
  Circuit circuit;
  for (std::size_t q = 0; q < from.size(); ++q) {
    std::vector<const SingleQubitClifford*> options;
    for (const auto& e : table)
      if (e.image[static_cast<int>(from[q]) - 1] == to[q]) options.push_back(&e);
    std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
    for (auto k : options[pick(rng)]->word) circuit.push_back({k, q});
  }
  return CliffordTableau::from_circuit(from.size(), circuit);
}

}  // namespace qforest
