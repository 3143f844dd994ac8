#include <qforest/correlation.hpp>

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace qforest;

TEST(CorrelationRecord, PartialMapBasics) {
  CorrelationRecord r(2);
  EXPECT_EQ(r.capacity(), 9u);
  EXPECT_EQ(r.known_count(), 0u);
  r.set(parse_pauli("xx"), 0.5);
  EXPECT_TRUE(r.contains(parse_pauli("xx")));
  EXPECT_FALSE(r.contains(parse_pauli("yy")));
  EXPECT_DOUBLE_EQ(r.at(parse_pauli("xx")), 0.5);
  EXPECT_EQ(r.missing().size(), 8u);
  EXPECT_DOUBLE_EQ(r.squared_sum(), 0.25);
  EXPECT_THROW(r.at(parse_pauli("yy")), Error);
  EXPECT_THROW(r.set(parse_pauli("xxx"), 0.1), Error);
  EXPECT_THROW(r.set(parse_pauli("zz"), 1.1), Error);
  EXPECT_NO_THROW(r.set(parse_pauli("zz"), 1.0 + 1e-10));
}

TEST(WhiteNoise, ScalesCorrelations) {
  const auto bell = correlations_of(bell_state());
  const auto same = apply_white_noise(bell, 0.0);
  const auto half = apply_white_noise(bell, 0.5);
  const auto gone = apply_white_noise(bell, 1.0);
  for (const auto& p : ObservableSet(2)) {
    EXPECT_DOUBLE_EQ(same.at(p), bell.at(p));
    EXPECT_DOUBLE_EQ(gone.at(p), 0.0);
  }
  EXPECT_DOUBLE_EQ(half.at(parse_pauli("xx")), 0.5);
  EXPECT_DOUBLE_EQ(half.noise_scale(), 0.5);
  EXPECT_THROW(apply_white_noise(bell, 1.5), Error);
}

TEST(WhiteNoise, MatchesDensityMatrix) {
  Rng rng(3);
  const PureState s = sample_haar_pure(2, rng);
  const double p = 0.3;
  const auto noisy = apply_white_noise(correlations_of(s), p);
  for (const auto& b : ObservableSet(2)) {
    // tr(rho B) with rho = (1-p)|s><s| + p id / 4; traceless B drops the second term
    const auto m = oracle::pauli_matrix(b.str());
    oracle::cd tr = 0;
    for (std::size_t r = 0; r < 4; ++r) tr += p / 4 * m(r, r);
    const double want = (1 - p) * oracle::expectation(s, b.str()) + tr.real();
    EXPECT_NEAR(noisy.at(b), want, 1e-12);
  }
}

TEST(CorrelationEvaluator, AgreesWithSingleExpectations) {
  Rng rng(4);
  for (std::size_t n = 1; n <= 4; ++n) {
    const CorrelationEvaluator eval(n);
    const PureState s = sample_haar_pure(n, rng);
    const auto ex = eval.expectations(s);
    const auto sq = eval.squared(s);
    ASSERT_EQ(ex.size(), observable_count(n));
    for (std::size_t i = 0; i < ex.size(); ++i) {
      EXPECT_NEAR(ex[i], oracle::expectation(s, PauliString::from_index(n, i).str()), 1e-10);
      EXPECT_NEAR(sq[i], ex[i] * ex[i], 1e-15);
    }
  }
}

TEST(CorrelationsOf, PureProductStatesSumToOne) {
  Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    std::vector<PureState> f{sample_haar_pure(1, rng), sample_haar_pure(1, rng), sample_haar_pure(1, rng)};
    EXPECT_NEAR(correlations_of(product_state(f)).squared_sum(), 1.0, 1e-12);
  }
  EXPECT_NEAR(correlations_of(ghz_state(3)).squared_sum(), 4.0, 1e-12);
}
