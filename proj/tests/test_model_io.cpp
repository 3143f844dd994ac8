#include <qforest/model_io.hpp>

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace qforest;
namespace fs = std::filesystem;

namespace {

const ForestModel& model() {
  static const ForestModel m = [] {
    TrainOptions opts;
    opts.data.samples_per_class = 150;
    opts.forest.n_trees = 8;
    opts.forest.seed = 21;
    opts.threads = 1;
    return train_model(2, opts);
  }();
  return m;
}

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("qforest_test_" + name); }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::ContractViolation;
}

}  // namespace

TEST(ModelIo, RoundTripScoresIdentically) {
  const auto path = temp_file("roundtrip.json");
  save_model(model(), path.string());
  const ForestModel back = load_model(path.string());
  fs::remove(path);
  ASSERT_EQ(back.n_qubits, 2u);
  EXPECT_EQ(back.config.n_trees, model().config.n_trees);
  EXPECT_EQ(back.metadata.samples_per_class, 150u);
  Rng rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  std::bernoulli_distribution known(0.4);
  for (int trial = 0; trial < 20; ++trial) {
    CorrelationRecord r(2);
    for (const auto& p : ObservableSet(2))
      if (known(rng)) r.set(p, u(rng));
    for (std::size_t i = 0; i < 9; ++i) {
      for (std::size_t t = 0; t < 8; ++t) {
        const auto a = model().forests[i].trees[t].score(r), b = back.forests[i].trees[t].score(r);
        EXPECT_EQ(a.score, b.score);
        EXPECT_EQ(a.reachable_fraction, b.reachable_fraction);
      }
      EXPECT_EQ(model().score(i, r).has_value(), back.score(i, r).has_value());
      if (model().score(i, r)) EXPECT_EQ(*model().score(i, r), *back.score(i, r));
    }
  }
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t t = 0; t < 8; ++t) {
      EXPECT_EQ(back.forests[i].trees[t].leaf_count(), model().forests[i].trees[t].leaf_count());
      EXPECT_EQ(back.forests[i].trees[t].depth(), model().forests[i].trees[t].depth());
    }
}

TEST(ModelIo, TruncatedFileIsMalformed) {
  const auto path = temp_file("truncated.json");
  save_model(model(), path.string());
  const auto size = fs::file_size(path);
  fs::resize_file(path, size / 2);
  EXPECT_EQ(code_of([&] { load_model(path.string()); }), ErrorCode::Malformed);
  fs::remove(path);
}

TEST(ModelIo, VersionAndStructureChecks) {
  auto j = model_to_json(model());
  j["version"] = kModelVersion + 1;
  EXPECT_EQ(code_of([&] { model_from_json(j); }), ErrorCode::VersionMismatch);

  j = model_to_json(model());
  j["forests"].erase(0);
  EXPECT_EQ(code_of([&] { model_from_json(j); }), ErrorCode::Malformed);

  j = model_to_json(model());
  j["forests"][0]["target"] = "xq";
  EXPECT_EQ(code_of([&] { model_from_json(j); }), ErrorCode::Malformed);

  j = model_to_json(model());
  j["forests"][0]["trees"][0] = {{"feature", "xyz"}, {"threshold", 0.5}, {"low", {{"p", 1}, {"n", 1}}}, {"high", {{"p", 1}, {"n", 1}}}};
  EXPECT_EQ(code_of([&] { model_from_json(j); }), ErrorCode::Malformed);
}

TEST(ModelIo, MissingFile) {
  EXPECT_EQ(code_of([] { load_model("/nonexistent/qforest_model.json"); }), ErrorCode::NotFound);
}

TEST(ModelIo, LoadedModelRefusesOtherQubitCounts) {
  EXPECT_EQ(code_of([] { recommend(model(), Session(3)); }), ErrorCode::QubitMismatch);
}
