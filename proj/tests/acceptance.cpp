// Acceptance run: one PASS/FAIL line per headline criterion; exit status is the
// number of failures (capped at 1).

#include <qforest/bayes_strategy.hpp>
#include <qforest/bench.hpp>
#include <qforest/decision_tree.hpp>
#include <qforest/forest.hpp>
#include <qforest/model_io.hpp>
#include <qforest/session.hpp>
#include <qforest/sources.hpp>
#include <qforest/tree_strategy.hpp>

#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>

using namespace qforest;

namespace {

int g_failures = 0;

struct Outcome {
  bool pass;
  std::string detail;
};

void criterion(const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs <= budget_s;
  const bool pass = o.pass && in_time;
  g_failures += !pass;
  char timing[96];
  std::snprintf(timing, sizeof timing, "%.1f s of %.0f s", secs, budget_s);
  std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " [" << timing << (in_time ? "" : ", over budget")
            << "]" << std::endl;
}

std::string num(double v, int prec = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

PureState random_product_state(std::size_t n, Rng& rng) {
  std::vector<PureState> f;
  for (std::size_t q = 0; q < n; ++q) f.push_back(sample_haar_pure(1, rng));
  return product_state(f);
}

PauliString all_x(std::size_t n) { return PauliString(std::vector<Pauli>(n, Pauli::X)); }

struct Models {
  std::shared_ptr<const ForestModel> n2, n3;
  double n3_train_s = 0;
};

std::shared_ptr<const ForestModel> train_default(std::size_t n, double* secs = nullptr) {
  TrainOptions opts;
  opts.data.samples_per_class = default_samples_per_class(n);
  const auto t0 = std::chrono::steady_clock::now();
  auto m = std::make_shared<const ForestModel>(train_model(n, opts));
  if (secs) *secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return m;
}

}  // namespace

int main() {
  std::cout << "acceptance run (single process, default configurations)" << std::endl;

  criterion("toy-tree score", 1, [] {
    const auto yy = static_cast<std::int32_t>(PauliString::parse("yy").index());
    const auto zz = static_cast<std::int32_t>(PauliString::parse("zz").index());
    DecisionTree toy({{yy, 0.25, 1, 2, 10, 10}, {TreeNode::kLeaf, 0, 0, 0, 1, 5}, {zz, 0.16, 3, 4, 9, 5},
                      {TreeNode::kLeaf, 0, 0, 0, 3, 2}, {TreeNode::kLeaf, 0, 0, 0, 6, 3}});
    CorrelationRecord known(2);
    known.set(PauliString::parse("yy"), 0.6);  // squared 0.36
    known.set(PauliString::parse("zz"), 0.1);  // squared 0.01
    const TreeScore s = tree_score(toy, known);
    Forest f{0, {toy}, {}};
    // A one-tree forest cannot meet the default quorum, so the rule is relaxed to admit it.
    const auto fs = forest_score(f, known, 0.0, 1);
    const bool ok = s.score == 0.6 && fs && *fs == 0.6;
    return Outcome{ok, "tree score " + num(s.score, 17) + ", forest score " + (fs ? num(*fs, 17) : "discarded")};
  });

  criterion("algebra oracle suite", 10, [] {
    std::size_t mismatches = 0, pairs = 0;
    const auto w2 = oracle::words(2);
    for (std::size_t i = 0; i < w2.size(); ++i)
      for (std::size_t j = i + 1; j < w2.size(); ++j, ++pairs)
        mismatches += commutes(PauliString::parse(w2[i]), PauliString::parse(w2[j])) != oracle::commutes(w2[i], w2[j]);
    Rng rng(11);
    const auto w3 = oracle::words(3);
    std::uniform_int_distribution<std::size_t> pick3(0, w3.size() - 1);
    for (int k = 0; k < 500; ++k) {
      const auto& a = w3[pick3(rng)];
      const auto& b = w3[pick3(rng)];
      mismatches += commutes(PauliString::parse(a), PauliString::parse(b)) != oracle::commutes(a, b);
    }
    double worst = 0;
    std::uniform_int_distribution<std::size_t> pickn(1, 4);
    for (int k = 0; k < 100; ++k) {
      const std::size_t n = pickn(rng);
      const auto words = oracle::words(n);
      const auto& w = words[std::uniform_int_distribution<std::size_t>(0, words.size() - 1)(rng)];
      const PureState s = sample_haar_pure(n, rng);
      worst = std::max(worst, std::abs(expectation(s, PauliString::parse(w)) - oracle::expectation(s, w)));
    }
    return Outcome{mismatches == 0 && worst <= 1e-10, std::to_string(pairs) + " N=2 pairs + 500 N=3 pairs, " +
                                                         std::to_string(mismatches) + " mismatches; max expectation error " +
                                                         sci(worst)};
  });

  criterion("criterion soundness", 30, [] {
    Rng rng(23);
    double worst = 0;
    std::size_t not_exhausted = 0;
    StaticOrderStrategy canonical;
    for (int k = 0; k < 500; ++k) {
      const std::size_t n = k % 2 ? 3 : 2;
      const MeasurementTrace t = run_detection(canonical, correlations_of(random_product_state(n, rng)));
      worst = std::max(worst, t.criterion_sum);
      not_exhausted += t.status != Status::Exhausted;
    }
    StaticOrderStrategy bell_order({PauliString::parse("xx"), PauliString::parse("yy")});
    const MeasurementTrace bell = run_detection(bell_order, correlations_of(bell_state()));
    const bool ok = worst <= 1 + 1e-9 && not_exhausted == 0 && bell.status == Status::Entangled && bell.count() == 2;
    return Outcome{ok, "max product-state sum " + num(worst, 12) + ", " + std::to_string(not_exhausted) +
                           " not exhausted; Bell entangled after " + std::to_string(bell.count())};
  });

  criterion("tree-plan correctness", 30, [] {
    std::vector<PauliString> anchors;
    for (const auto& p : ObservableSet(2)) anchors.push_back(p);
    Rng rng(31);
    std::uniform_int_distribution<std::size_t> pick(0, observable_count(3) - 1);
    for (int k = 0; k < 10; ++k) anchors.push_back(PauliString::from_index(3, pick(rng)));
    std::size_t bad = 0, subsets = 0;
    for (const auto& b : anchors) {
      const TreePlan plan = build_plan(b);
      const auto words = oracle::words(b.size());
      std::set<std::set<std::string>> got, want;
      for (const auto& s : plan.subsets) {
        ++subsets;
        std::set<std::string> names;
        for (const auto& p : s) names.insert(p.str());
        for (const auto& x : s)
          for (const auto& y : s) bad += !oracle::commutes(x.str(), y.str());
        // nothing outside the subset commutes with all of it
        for (const auto& w : words) {
          if (names.count(w)) continue;
          bool all = true;
          for (const auto& x : s) all = all && oracle::commutes(w, x.str());
          bad += all;
        }
        bad += s.front() != b;
        got.insert(names);
      }
      std::vector<std::string> pool;
      for (const auto& w : words)
        if (w != b.str() && oracle::commutes(w, b.str())) pool.push_back(w);
      for (auto s : oracle::maximal_commuting_subsets(pool)) {
        s.push_back(b.str());
        want.insert(std::set<std::string>(s.begin(), s.end()));
      }
      if (pool.empty()) want.insert({b.str()});
      bad += got != want;
    }
    return Outcome{bad == 0, std::to_string(anchors.size()) + " anchors, " + std::to_string(subsets) + " subsets, " +
                                 std::to_string(bad) + " violations"};
  });

  criterion("fig. 1(b) replay", 1, [] {
    const CorrelationRecord truth = load_fixture(std::string(QFOREST_DATA_DIR) + "/fixtures/fig1b.csv");
    TreeStrategy tree(PauliString::parse("zz"));
    const MeasurementTrace t = run_detection(tree, truth);
    bool within = true;
    std::string seq;
    for (const auto& s : t.steps) {
      within = within && (s.observable.str() == "zz" || s.observable.str() == "xx" || s.observable.str() == "yy");
      seq += (seq.empty() ? "" : ",") + s.observable.str() + "=" + num(s.value);
    }
    return Outcome{t.status == Status::Entangled && t.criterion_sum > 1 && within,
                   seq + ", sum " + num(t.criterion_sum, 6)};
  });

  Models models;
  criterion("forest showcase", 15 * 60, [&] {
    models.n3 = train_default(3, &models.n3_train_s);
    ForestStrategy forest(models.n3);
    const auto d1 = run_detection(forest, correlations_of(dicke_state(3, 1)));
    const auto d2 = run_detection(forest, correlations_of(dicke_state(3, 2)));
    const SweepResult sweep = gdansk_sweep(forest, 32);
    const bool ok = d1.status == Status::Entangled && d1.count() <= 6 && d2.status == Status::Entangled &&
                    d2.count() <= 6 && sweep.mean >= 3.5 && sweep.mean <= 6.5;
    return Outcome{ok, "D1 " + std::to_string(d1.count()) + ", D2 " + std::to_string(d2.count()) +
                           " measurements; sweep mean " + num(sweep.mean) + " over 32 angles; training " +
                           num(models.n3_train_s, 1) + " s"};
  });

  criterion("comparative benchmark", 20 * 60, [&] {
    models.n2 = train_default(2);
    std::string detail;
    bool ok = true;
    for (std::size_t n : {2u, 3u}) {
      auto model = n == 2 ? models.n2 : models.n3;
      if (!model) throw Error(ErrorCode::InvalidArgument, "N=3 model missing");
      ForestStrategy forest(model);
      TreeStrategy tree(all_x(n));
      BayesStrategy bayes;
      StateSource src = StateSource::accessible(n, 1000 + n);
      const BenchResult r = run_benchmark(src, {&forest, &tree, &bayes}, 200);
      const double f = r.at("forest").mean(), t = r.at("tree").mean(), b = r.at("bayes").mean();
      const bool pass = n == 2 ? std::abs(f - t) / t <= 0.15 : (f <= t && b >= f && b >= t);
      ok = ok && pass;
      detail += "N=" + std::to_string(n) + " forest " + num(f) + " tree " + num(t) + " bayes " + num(b) +
                (n == 2 ? " (rel. gap " + num(std::abs(f - t) / t) + "); " : "");
    }
    return Outcome{ok, detail};
  });

  criterion("concentration", 5 * 60, [] {
    std::string detail;
    bool decreasing = true;
    double prev = 2;
    for (std::size_t n = 2; n <= 5; ++n) {
      Rng rng(derive_seed(5, n));
      const ConcentrationReport r = concentration_report(n, 1000, 0.2, rng);
      decreasing = decreasing && r.fraction_exceeding < prev;
      prev = r.fraction_exceeding;
      detail += "N=" + std::to_string(n) + " " + num(r.fraction_exceeding, 4) + " (bound " + num(r.analytic_bound, 4) + ") ";
    }
    return Outcome{decreasing, detail};
  });

  criterion("model round-trip", 10, [&] {
    if (!models.n2) models.n2 = train_default(2);
    const auto path = std::filesystem::temp_directory_path() / "qforest_acceptance_model.json";
    save_model(*models.n2, path.string());
    const ForestModel loaded = load_model(path.string());
    std::filesystem::remove(path);
    Rng rng(41);
    double worst = 0;
    std::size_t discarded_mismatch = 0;
    std::bernoulli_distribution keep(0.4);
    for (int k = 0; k < 20; ++k) {
      const CorrelationRecord truth = correlations_of(sample_haar_pure(2, rng));
      CorrelationRecord known(2);
      for (const auto& p : ObservableSet(2))
        if (keep(rng)) known.set(p, truth.at(p));
      for (std::size_t i = 0; i < observable_count(2); ++i) {
        const auto a = models.n2->score(i, known), b = loaded.score(i, known);
        if (a.has_value() != b.has_value()) ++discarded_mismatch;
        else if (a) worst = std::max(worst, std::abs(*a - *b));
      }
    }
    return Outcome{worst <= 1e-12 && discarded_mismatch == 0,
                   "max score difference " + sci(worst) + " over 20 knowns, " + std::to_string(discarded_mismatch) +
                       " discard mismatches"};
  });

  criterion("complementarity", 5 * 60, [&] {
    if (!models.n3) throw Error(ErrorCode::InvalidArgument, "N=3 model missing");
    Rng rng(53);
    std::size_t used = 0, commuting = 0, drawn = 0;
    while (used < 50) {
      ++drawn;
      const CorrelationRecord truth = correlations_of(sample_haar_pure(3, rng));
      Session s(3);
      const PauliString first = recommend(*models.n3, s);
      const double v = truth.at(first);
      if (v * v <= 0.5) continue;
      s.record(first, v);
      commuting += commutes(recommend(*models.n3, s), first);
      ++used;
    }
    const double share = static_cast<double>(commuting) / 50.0;
    return Outcome{share >= 0.8, std::to_string(commuting) + "/50 next picks commute with the first (" +
                                     std::to_string(drawn) + " states drawn)"};
  });

  std::cout << (g_failures ? std::to_string(g_failures) + " criteria failed" : std::string("all criteria passed"))
            << std::endl;
  return g_failures ? 1 : 0;
}
