#pragma once

#include <qforest/error.hpp>

#include <algorithm>
#include <cctype>
#include <complex>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qforest {

using complex = std::complex<double>;

/// Largest qubit count accepted by sessions and observable sets.
inline constexpr std::size_t kMaxQubits = 8;
/// Largest qubit count for which dense matrices are materialized.
inline constexpr std::size_t kMaxDenseQubits = 10;

enum class Pauli : std::uint8_t { X = 1, Y = 2, Z = 3 };

inline char to_char(Pauli p) { return "?xyz"[static_cast<int>(p)]; }

/// Full-weight Pauli word; letter q acts on qubit q, the leftmost (most
/// significant) bit of a computational basis index.
class PauliString {
 public:
  PauliString() = default;
  explicit PauliString(std::vector<Pauli> letters) : letters_(std::move(letters)) {}

  static PauliString parse(std::string_view label) {
    if (label.empty()) throw Error(ErrorCode::InvalidLetter, "empty Pauli label");
    std::vector<Pauli> letters;
    letters.reserve(label.size());
    for (char c : label) {
      switch (std::tolower(static_cast<unsigned char>(c))) {
        case 'x': letters.push_back(Pauli::X); break;
        case 'y': letters.push_back(Pauli::Y); break;
        case 'z': letters.push_back(Pauli::Z); break;
        default:
          throw Error(ErrorCode::InvalidLetter,
                      "letter '" + std::string(1, c) + "' in \"" + std::string(label) + "\"");
      }
    }
    return PauliString(std::move(letters));
  }

  /// Inverse of index(): base-3 digits, first letter most significant.
  static PauliString from_index(std::size_t n_qubits, std::size_t index) {
    std::vector<Pauli> letters(n_qubits);
    for (std::size_t q = n_qubits; q-- > 0;) {
      letters[q] = static_cast<Pauli>(index % 3 + 1);
      index /= 3;
    }
    return PauliString(std::move(letters));
  }

  std::size_t size() const { return letters_.size(); }
  Pauli operator[](std::size_t q) const { return letters_[q]; }
  const std::vector<Pauli>& letters() const { return letters_; }

  /// Position in the canonical (lexicographic, X < Y < Z) order.
  std::size_t index() const {
    std::size_t idx = 0;
    for (Pauli p : letters_) idx = idx * 3 + (static_cast<std::size_t>(p) - 1);
    return idx;
  }

  std::string str() const {
    std::string s;
    s.reserve(letters_.size());
    for (Pauli p : letters_) s.push_back(to_char(p));
    return s;
  }

  /// Bit masks over basis-index bits: qubits carrying an X/Y factor, and a Y/Z factor.
  std::uint64_t x_mask() const {
    std::uint64_t m = 0;
    const std::size_t n = letters_.size();
    for (std::size_t q = 0; q < n; ++q)
      if (letters_[q] != Pauli::Z) m |= std::uint64_t{1} << (n - 1 - q);
    return m;
  }
  std::uint64_t z_mask() const {
    std::uint64_t m = 0;
    const std::size_t n = letters_.size();
    for (std::size_t q = 0; q < n; ++q)
      if (letters_[q] != Pauli::X) m |= std::uint64_t{1} << (n - 1 - q);
    return m;
  }
  std::size_t y_count() const {
    return static_cast<std::size_t>(std::count(letters_.begin(), letters_.end(), Pauli::Y));
  }

  friend bool operator==(const PauliString&, const PauliString&) = default;
  friend std::strong_ordering operator<=>(const PauliString& a, const PauliString& b) {
    return a.letters_ <=> b.letters_;
  }

 private:
  std::vector<Pauli> letters_;
};

inline PauliString parse_pauli(std::string_view label) { return PauliString::parse(label); }

inline std::size_t observable_count(std::size_t n_qubits) {
  std::size_t c = 1;
  for (std::size_t i = 0; i < n_qubits; ++i) c *= 3;
  return c;
}

/// All 3^N full-weight strings in canonical order.
class ObservableSet {
 public:
  explicit ObservableSet(std::size_t n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits == 0 || n_qubits > kMaxQubits)
      throw Error(ErrorCode::CapExceeded, "qubit count " + std::to_string(n_qubits));
    const std::size_t count = observable_count(n_qubits);
    members_.reserve(count);
    for (std::size_t i = 0; i < count; ++i) members_.push_back(PauliString::from_index(n_qubits, i));
  }

  std::size_t qubits() const { return n_qubits_; }
  std::size_t size() const { return members_.size(); }
  const PauliString& operator[](std::size_t i) const { return members_[i]; }
  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }

 private:
  std::size_t n_qubits_;
  std::vector<PauliString> members_;
};

/// Full-weight strings commute iff they differ in an even number of positions.
inline bool commutes(const PauliString& p, const PauliString& q) {
  if (p.size() != q.size())
    throw Error(ErrorCode::LengthMismatch, p.str() + " vs " + q.str());
  std::size_t differ = 0;
  for (std::size_t i = 0; i < p.size(); ++i) differ += p[i] != q[i];
  return differ % 2 == 0;
}

/// Row-major dense square matrix.
struct DenseMatrix {
  std::size_t dim = 0;
  std::vector<complex> data;

  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t d) : dim(d), data(d * d) {}

  complex& operator()(std::size_t r, std::size_t c) { return data[r * dim + c]; }
  const complex& operator()(std::size_t r, std::size_t c) const { return data[r * dim + c]; }

  static DenseMatrix identity(std::size_t d) {
    DenseMatrix m(d);
    for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0;
    return m;
  }

  friend DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix out(a.dim);
    for (std::size_t i = 0; i < a.dim; ++i)
      for (std::size_t k = 0; k < a.dim; ++k) {
        const complex aik = a(i, k);
        if (aik == complex{}) continue;
        for (std::size_t j = 0; j < a.dim; ++j) out(i, j) += aik * b(k, j);
      }
    return out;
  }

  DenseMatrix adjoint() const {
    DenseMatrix out(dim);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) out(j, i) = std::conj((*this)(i, j));
    return out;
  }

  /// Largest absolute entry of a - b.
  friend double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    double worst = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) worst = std::max(worst, std::abs(a.data[i] - b.data[i]));
    return worst;
  }
};

inline DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.dim * b.dim);
  for (std::size_t i = 0; i < a.dim; ++i)
    for (std::size_t j = 0; j < a.dim; ++j)
      for (std::size_t k = 0; k < b.dim; ++k)
        for (std::size_t l = 0; l < b.dim; ++l) out(i * b.dim + k, j * b.dim + l) = a(i, j) * b(k, l);
  return out;
}

inline DenseMatrix single_qubit_pauli(Pauli p) {
  DenseMatrix m(2);
  constexpr complex i{0.0, 1.0};
  switch (p) {
    case Pauli::X: m(0, 1) = 1.0; m(1, 0) = 1.0; break;
    case Pauli::Y: m(0, 1) = -i; m(1, 0) = i; break;
    case Pauli::Z: m(0, 0) = 1.0; m(1, 1) = -1.0; break;
  }
  return m;
}

inline DenseMatrix matrix_of(const PauliString& p) {
  if (p.size() == 0 || p.size() > kMaxDenseQubits)
    throw Error(ErrorCode::CapExceeded, "dense matrix for " + std::to_string(p.size()) + " qubits");
  DenseMatrix m = single_qubit_pauli(p[0]);
  for (std::size_t q = 1; q < p.size(); ++q) m = kron(m, single_qubit_pauli(p[q]));
  return m;
}

}  // namespace qforest
