#include <qforest/state.hpp>

#include <gtest/gtest.h>

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace qforest;

namespace {

std::vector<oracle::cd> amps(const PureState& s) { return {s.amplitudes().begin(), s.amplitudes().end()}; }
}  // namespace

TEST(PureState, NormalizesAndValidates) {
  PureState s({{3, 0}, {0, 4}});
  EXPECT_NEAR(s.norm_squared(), 1.0, 1e-12);
  EXPECT_EQ(s.qubits(), 1u);
  EXPECT_THROW(PureState({1, 0, 0}), Error);
  EXPECT_THROW(PureState({0, 0}), Error);
}

TEST(Expectation, BasicValues) {
  EXPECT_DOUBLE_EQ(expectation(PureState::basis(1), parse_pauli("z")), 1.0);
  const auto bell = bell_state();
  EXPECT_NEAR(expectation(bell, parse_pauli("xx")), 1.0, 1e-12);
  EXPECT_NEAR(expectation(bell, parse_pauli("yy")), -1.0, 1e-12);
  EXPECT_NEAR(expectation(bell, parse_pauli("zz")), 1.0, 1e-12);
  const auto d1 = dicke_state(3, 1);
  EXPECT_NEAR(expectation(d1, parse_pauli("zzz")), oracle::expectation(d1, "zzz"), 1e-12);
  EXPECT_NEAR(expectation(d1, parse_pauli("zzz")), -1.0, 1e-12);
}

TEST(Expectation, FastPathMatchesDense) {
  Rng rng(5);
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 1 + k % 4;
    const PureState s = sample_haar_pure(n, rng);
    const auto p = PauliString::from_index(n, std::uniform_int_distribution<std::size_t>(0, observable_count(n) - 1)(rng));
    const double fast = expectation(s, p);
    EXPECT_NEAR(fast, expectation_dense(s, matrix_of(p)), 1e-10);
    EXPECT_NEAR(fast, oracle::expectation(s, p.str()), 1e-10);
  }
}

TEST(LocalExpectation, MatchesOracleWithIdentities) {
  Rng rng(6);
  const PureState s = sample_haar_pure(3, rng);
  for (std::size_t q = 0; q < 3; ++q)
    for (char c : {'x', 'y', 'z'}) {
      std::string word = "iii";
      word[q] = c;
      const Pauli letter = c == 'x' ? Pauli::X : c == 'y' ? Pauli::Y : Pauli::Z;
      EXPECT_NEAR(local_expectation(s, q, letter), oracle::expectation(s, word), 1e-12);
    }
  const auto b = bloch_vectors(PureState::basis(2));
  EXPECT_NEAR(b[0][2], 1.0, 1e-12);
  EXPECT_NEAR(b[1][0], 0.0, 1e-12);
}

TEST(Gates, MatchMatrices) {
  Rng rng(7);
  const std::size_t n = 3;
  const Gate gates[] = {{GateKind::H, 0}, {GateKind::H, 2}, {GateKind::S, 1}, {GateKind::T, 0},
                        {GateKind::CNOT, 2, 0}, {GateKind::CNOT, 0, 1}};
  for (const auto& g : gates) {
    const PureState s = sample_haar_pure(n, rng);
    PureState t = s;
    apply_gate(t, g);
    const auto m = oracle::gate_matrix(g, n);
    const auto in = amps(s);
    for (std::size_t r = 0; r < m.d; ++r) {
      oracle::cd acc = 0;
      for (std::size_t c = 0; c < m.d; ++c) acc += m(r, c) * in[c];
      EXPECT_LT(std::abs(acc - t[r]), 1e-12);
    }
  }
  PureState s = PureState::basis(2, 0b10);
  apply_gate(s, {GateKind::CNOT, 1, 0});
  EXPECT_NEAR(std::abs(s[0b11]), 1.0, 1e-12);
  EXPECT_THROW(apply_gate(s, {GateKind::CNOT, 1, 1}), Error);
  EXPECT_THROW(apply_gate(s, {GateKind::H, 2}), Error);
}

TEST(Circuits, EmptyAndSingleGate) {
  const PureState zero = apply_circuit(PureState::basis(2), {});
  EXPECT_EQ(zero[0], complex(1));
  const PureState plus = apply_circuit(PureState::basis(1), {{GateKind::H, 0}});
  EXPECT_NEAR(plus[0].real(), std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(plus[1].real(), std::sqrt(0.5), 1e-12);
  // a tiny mean almost always draws zero gates
  Rng rng(8);
  std::size_t empty = 0;
  for (int k = 0; k < 100; ++k) {
    const Circuit c = random_circuit(2, 1e-3, rng);
    if (c.empty()) {
      ++empty;
      EXPECT_EQ(apply_circuit(PureState::basis(2), c)[0], complex(1));
    }
  }
  EXPECT_GT(empty, 90u);
}

TEST(Circuits, MeanGateCountForTwoQubits) {
  Rng rng(9);
  EXPECT_DOUBLE_EQ(accessible_mean_gates(2), 48.0);
  double total = 0;
  for (int k = 0; k < 10000; ++k) total += static_cast<double>(random_circuit(2, accessible_mean_gates(2), rng).size());
  EXPECT_NEAR(total / 10000, 48.0, 2.0);
}

TEST(Circuits, SingleQubitNeverDrawsCnot) {
  Rng rng(10);
  for (int k = 0; k < 100; ++k)
    for (const auto& g : random_circuit(1, 20, rng)) EXPECT_NE(g.kind, GateKind::CNOT);
}

TEST(Haar, NormalizedAndCentered) {
  Rng rng(11);
  std::vector<double> mean(9, 0.0);
  std::vector<double> xx, zz;
  for (int k = 0; k < 10000; ++k) {
    const PureState s = sample_haar_pure(2, rng);
    ASSERT_NEAR(s.norm_squared(), 1.0, 1e-10);
    for (std::size_t i = 0; i < 9; ++i) mean[i] += expectation(s, PauliString::from_index(2, i)) / 10000;
    const double a = expectation(s, parse_pauli("xx")), b = expectation(s, parse_pauli("zz"));
    xx.push_back(a * a);
    zz.push_back(b * b);
  }
  for (double m : mean) EXPECT_LT(std::abs(m), 0.05);
  // two-sample Kolmogorov-Smirnov at alpha = 0.01
  std::sort(xx.begin(), xx.end());
  std::sort(zz.begin(), zz.end());
  double d = 0;
  std::size_t i = 0, j = 0;
  while (i < xx.size() && j < zz.size()) {
    if (xx[i] <= zz[j]) ++i;
    else ++j;
    d = std::max(d, std::abs(static_cast<double>(i) - static_cast<double>(j)) / 10000.0);
  }
  EXPECT_LT(d, 1.628 * std::sqrt(2.0 / 10000));
}

TEST(NamedStates, Dicke) {
  const auto d = dicke_state(3, 1);
  for (std::size_t k = 0; k < 8; ++k) {
    const bool on = k == 1 || k == 2 || k == 4;
    EXPECT_NEAR(std::abs(d[k]), on ? 1 / std::sqrt(3.0) : 0.0, 1e-12);
  }
  EXPECT_THROW(dicke_state(2, 3), Error);
}

TEST(NamedStates, GdanskEndpoints) {
  const auto g0 = gdansk_state(0), g1 = gdansk_state(std::numbers::pi / 2);
  const auto d2 = dicke_state(3, 2), d1 = dicke_state(3, 1);
  for (std::size_t k = 0; k < 8; ++k) {
    EXPECT_NEAR(std::abs(g0[k] - d2[k]), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(g1[k] - d1[k]), 0.0, 1e-12);
  }
}

TEST(NamedStates, Parsing) {
  EXPECT_EQ(named_state("bell").qubits(), 2u);
  EXPECT_EQ(named_state("ghz:4").qubits(), 4u);
  EXPECT_EQ(named_state("dicke:4:2").qubits(), 4u);
  EXPECT_EQ(named_state("zero:3").qubits(), 3u);
  EXPECT_NEAR(std::abs(named_state("gdansk:1.816")[1]), std::abs(gdansk_state(1.816)[1]), 1e-15);
  for (const char* bad : {"nope", "ghz:x", "dicke:3", "gdansk:", "bell:2"}) {
    try {
      named_state(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::UnknownState) << bad;
    }
  }
}

TEST(ProductState, FactorsCombine) {
  const PureState zero = PureState::basis(1), one = PureState::basis(1, 1);
  const std::vector<PureState> f{zero, one};
  const PureState s = product_state(f);
  EXPECT_EQ(s[0b01], complex(1));
}
