#include <qforest/sources.hpp>
#include <qforest/tree_strategy.hpp>

#include <gtest/gtest.h>

#include <set>
#include <sstream>

using namespace qforest;

namespace {

std::string fixture(const std::string& name) { return std::string(QFOREST_DATA_DIR) + "/fixtures/" + name + ".csv"; }

ErrorCode parse_error(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_fixture(in);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::ContractViolation;
}

std::string full_n1(const std::string& z_value) { return "x,0.1\ny,0.2\nz," + z_value + "\n"; }

std::set<std::string> measured_set(const MeasurementTrace& t) {
  std::set<std::string> out;
  for (const auto& s : t.steps) out.insert(s.observable.str());
  return out;
}

}  // namespace

TEST(Fixture, Fig1bValues) {
  const auto r = load_fixture(fixture("fig1b"));
  EXPECT_EQ(r.qubits(), 2u);
  EXPECT_DOUBLE_EQ(r.at(parse_pauli("zz")), 0.984);
  EXPECT_DOUBLE_EQ(r.at(parse_pauli("xx")), 0.649);
  EXPECT_DOUBLE_EQ(r.at(parse_pauli("yy")), -0.618);
  // first qubit on columns: column y, row x
  EXPECT_DOUBLE_EQ(r.at(parse_pauli("yx")), 0.031);
}

TEST(Fixture, AllSixFixturesLoad) {
  for (const char* c : {"fig1a", "fig1b", "fig1c", "fig1d", "fig1e", "fig1f"}) EXPECT_TRUE(load_fixture(fixture(c)).complete()) << c;
}

TEST(Fixture, ParsingRules) {
  std::istringstream ok("observable,value\r\n\n# comment\n x , 0.5 \ny,-0.25\nz,1.0000005\n");
  const auto r = parse_fixture(ok);
  EXPECT_EQ(r.at(parse_pauli("x")), 0.5);
  EXPECT_EQ(r.at(parse_pauli("z")), 1.0);  // clamped within tolerance
  EXPECT_EQ(parse_error(full_n1("1.1")), ErrorCode::Malformed);
  EXPECT_EQ(parse_error(full_n1("abc")), ErrorCode::Malformed);
  EXPECT_EQ(parse_error(full_n1("0.5x")), ErrorCode::Malformed);
  EXPECT_EQ(parse_error("x,0.1\ny,0.2\nq,0.3\n"), ErrorCode::Malformed);
  EXPECT_EQ(parse_error("x,0.1\ny,0.2\nzz,0.3\n"), ErrorCode::Malformed);
  EXPECT_EQ(parse_error("x,0.1\nx,0.2\n"), ErrorCode::Malformed);
  EXPECT_EQ(parse_error("x 0.1\n"), ErrorCode::Malformed);
  EXPECT_EQ(parse_error(""), ErrorCode::Malformed);
}

TEST(Fixture, MissingEntriesAreListed) {
  std::istringstream in("xx,0.1\nyy,0.2\n");
  try {
    parse_fixture(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingEntries);
    const std::string msg = e.what();
    for (const char* p : {"xy", "xz", "yx", "yz", "zx", "zy", "zz"}) EXPECT_NE(msg.find(p), std::string::npos) << p;
  }
  EXPECT_THROW(load_fixture("/nonexistent/fixture.csv"), Error);
}

TEST(Fixture, Fig1bTreeReplay) {
  TreeStrategy tree(parse_pauli("zz"));
  const auto t = run_detection(tree, load_fixture(fixture("fig1b")));
  EXPECT_EQ(t.status, Status::Entangled);
  EXPECT_GT(t.criterion_sum, 1.0);
  for (const auto& p : measured_set(t)) EXPECT_TRUE(p == "zz" || p == "xx" || p == "yy") << p;
  EXPECT_EQ(t.steps.front().observable.str(), "zz");
  EXPECT_EQ(t.count(), 2u);
}

TEST(Fixture, Fig1fTreeFallsBackToTomography) {
  // every correlation is small except zz, so the tree measures all nine
  TreeStrategy tree(parse_pauli("xx"));
  const auto t = run_detection(tree, load_fixture(fixture("fig1f")));
  EXPECT_EQ(t.count(), 9u);
  EXPECT_EQ(measured_set(t).size(), 9u);
}

TEST(Fixture, SourceRepeatsTheFixture) {
  auto src = StateSource::fixture(fixture("fig1d"));
  EXPECT_EQ(src.kind(), StateSource::Kind::Fixture);
  const auto a = src.next(), b = src.next();
  EXPECT_FALSE(a.state.has_value());
  EXPECT_EQ(a.truth.at(parse_pauli("zz")), b.truth.at(parse_pauli("zz")));
}

TEST(AccessibleSource, RejectionHoldsAndSeedsReplay) {
  auto a = StateSource::accessible(2, 42), b = StateSource::accessible(2, 42);
  EXPECT_DOUBLE_EQ(a.mean_gates(), 48.0);
  std::size_t gates = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next(), y = b.next();
    const double v = x.truth.at(parse_pauli("xx"));
    EXPECT_GE(v * v, 0.25);
    EXPECT_EQ(x.gates, y.gates);
    for (const auto& p : ObservableSet(2)) EXPECT_EQ(x.truth.at(p), y.truth.at(p));
    gates += x.gates;
  }
  EXPECT_GT(gates, 0u);
  EXPECT_EQ(a.accepted(), 100u);
  EXPECT_GE(a.attempts(), a.accepted());
  EXPECT_DOUBLE_EQ(StateSource::accessible(3, 1).mean_gates(), 144.0);
  EXPECT_THROW(StateSource::accessible(1, 1), Error);
}

TEST(AccessibleSource, WithoutRejectionEveryDrawIsAccepted) {
  auto s = StateSource::accessible(3, 7, false);
  for (int i = 0; i < 20; ++i) s.next();
  EXPECT_EQ(s.attempts(), 20u);
}

TEST(HaarSource, SeededAndNormalized) {
  auto a = StateSource::haar(3, 5), b = StateSource::haar(3, 5), c = StateSource::haar(3, 6);
  const auto x = a.next(), y = b.next(), z = c.next();
  EXPECT_EQ(x.truth.at(parse_pauli("xyz")), y.truth.at(parse_pauli("xyz")));
  EXPECT_NE(x.truth.at(parse_pauli("xyz")), z.truth.at(parse_pauli("xyz")));
  ASSERT_TRUE(x.state.has_value());
  double norm = 0;
  for (auto amp : x.state->amplitudes()) norm += std::norm(amp);
  EXPECT_NEAR(norm, 1.0, 1e-12);
}

TEST(NamedSource, Bell) {
  auto s = StateSource::named("bell");
  EXPECT_EQ(s.qubits(), 2u);
  EXPECT_NEAR(s.next().truth.at(parse_pauli("yy")), -1.0, 1e-12);
  EXPECT_THROW(StateSource::named("nonsense"), Error);
}
