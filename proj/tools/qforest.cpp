// qforest: train forests, run guided detection, benchmark and serve sessions.

#include <qforest/bayes_strategy.hpp>
#include <qforest/bench.hpp>
#include <qforest/forest.hpp>
#include <qforest/http.hpp>
#include <qforest/model_io.hpp>
#include <qforest/sources.hpp>
#include <qforest/tree_strategy.hpp>

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace qforest;

constexpr int kOk = 0;
constexpr int kUserError = 1;
constexpr int kInternalError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v, int prec = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

std::string model_path_or_env(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("QFOREST_MODEL")) return env;
  return {};
}

std::shared_ptr<const ForestModel> require_model(const std::string& flag) {
  const std::string path = model_path_or_env(flag);
  if (path.empty()) throw UsageError("the forest strategy needs --model (or QFOREST_MODEL)");
  return std::make_shared<const ForestModel>(load_model(path));
}

bool looks_like_fixture(const std::string& spec) {
  return spec.size() > 4 && spec.compare(spec.size() - 4, 4, ".csv") == 0;
}

// ---- train

struct TrainArgs {
  std::size_t qubits = 2;
  std::string out = "model.json";
  std::size_t trees = 64;
  std::size_t per_class = 0;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
  bool quiet = false;
};

int run_train(const TrainArgs& a) {
  if (a.trees == 0) throw UsageError("--trees must be at least 1");
  TrainOptions opts;
  opts.forest.n_trees = a.trees;
  opts.forest.seed = a.seed;
  opts.data.samples_per_class = a.per_class ? a.per_class : default_samples_per_class(a.qubits);
  opts.threads = a.threads;
  const auto t0 = std::chrono::steady_clock::now();
  const ForestModel model = train_model(a.qubits, opts);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  save_model(model, a.out);
  if (!a.quiet) {
    std::cout << "target  oob_error  leaves(mean)\n";
    for (const auto& f : model.forests) {
      double err = 0, leaves = 0;
      for (double e : f.oob_error) err += e;
      for (const auto& t : f.trees) leaves += static_cast<double>(t.leaf_count());
      std::cout << PauliString::from_index(a.qubits, f.target).str() << "  " << fmt(err / f.oob_error.size(), 4) << "  "
                << fmt(leaves / f.trees.size(), 1) << '\n';
    }
  }
  std::cout << "wrote " << a.out << " (" << model.forests.size() << " forests, " << a.trees << " trees each, "
            << opts.data.samples_per_class << " samples per class, " << fmt(secs, 1) << " s)\n";
  return kOk;
}

// ---- detect

struct DetectArgs {
  std::string strategy = "tree";
  std::string state;
  std::string model;
  double noise = 0;
  std::size_t shots = 0;
  std::uint64_t seed = 0;
  std::string bstar;
  std::string csv;
};

void print_trace(const MeasurementTrace& t) {
  std::cout << "i | B_i | <B_i> | running sum | B_i, B_i-1 anti-commute?\n";
  for (std::size_t k = 0; k < t.steps.size(); ++k) {
    const auto& s = t.steps[k];
    std::cout << s.step << " | " << s.observable.str() << " | " << fmt(s.value) << " | " << fmt(s.running_sum) << " | "
              << (k == 0 ? "---" : (commutes(s.observable, t.steps[k - 1].observable) ? "false" : "true")) << '\n';
  }
  std::cout << "status: " << to_string(t.status) << " after " << t.count() << " measurements";
  if (t.preliminary) std::cout << " (" << t.count_with_preliminary() << " with " << t.preliminary << " local preliminaries)";
  std::cout << ", criterion sum " << fmt(t.criterion_sum, 6) << '\n';
}

int run_detect(const DetectArgs& a) {
  if (a.noise < 0 || a.noise > 1) throw UsageError("--noise must lie in [0, 1]");
  const bool fixture = looks_like_fixture(a.state);
  std::optional<PureState> state;
  CorrelationRecord truth = fixture ? load_fixture(a.state) : CorrelationRecord(1);
  if (!fixture) {
    state = named_state(a.state);
    truth = correlations_of(*state);
  }
  if (a.noise > 0) truth = apply_white_noise(truth, a.noise);
  const std::size_t n = truth.qubits();

  std::unique_ptr<Strategy> strategy;
  if (a.strategy == "forest") {
    strategy = std::make_unique<ForestStrategy>(require_model(a.model));
  } else if (a.strategy == "tree") {
    if (!a.bstar.empty()) {
      strategy = std::make_unique<TreeStrategy>(PauliString::parse(a.bstar));
    } else if (state) {
      const auto bloch = bloch_vectors(*state);
      strategy = std::make_unique<TreeStrategy>(TreeStrategy::from_bloch(bloch));
    } else {
      strategy = std::make_unique<TreeStrategy>(PauliString(std::vector<Pauli>(n, Pauli::X)));
    }
  } else if (a.strategy == "bayes") {
    strategy = std::make_unique<BayesStrategy>();
  } else {
    throw UsageError("unknown strategy " + a.strategy);
  }

  const MeasurementTrace t = run_detection(*strategy, truth, 0, MeasurementModel{a.shots, a.seed});
  print_trace(t);
  if (!a.csv.empty()) {
    std::ofstream out(a.csv);
    if (!out) throw UsageError("cannot write " + a.csv);
    write_trace_csv(out, t);
  }
  return kOk;
}

// ---- bench

struct BenchArgs {
  std::size_t qubits = 2;
  std::string source = "accessible";
  std::size_t states = 200;
  std::string strategies = "forest,tree,bayes";
  std::string out;
  std::string model;
  std::uint64_t seed = 1;
  std::size_t max_steps = 0;
  double mean_gates = 0;
  bool no_reject = false;
};

int run_bench(const BenchArgs& a) {
  if (a.states == 0) throw UsageError("--states must be at least 1");
  StateSource source = a.source == "accessible" ? StateSource::accessible(a.qubits, a.seed, !a.no_reject, a.mean_gates)
                       : a.source == "haar"     ? StateSource::haar(a.qubits, a.seed)
                                                : throw UsageError("unknown source " + a.source);
  std::vector<std::unique_ptr<Strategy>> owned;
  std::stringstream list(a.strategies);
  for (std::string name; std::getline(list, name, ',');) {
    if (name == "forest") {
      auto model = require_model(a.model);
      if (model->n_qubits != a.qubits) throw UsageError("model is for " + std::to_string(model->n_qubits) + " qubits");
      owned.push_back(std::make_unique<ForestStrategy>(model));
    } else if (name == "tree") {
      owned.push_back(std::make_unique<TreeStrategy>(PauliString(std::vector<Pauli>(a.qubits, Pauli::X))));
    } else if (name == "bayes") {
      owned.push_back(std::make_unique<BayesStrategy>());
    } else {
      throw UsageError("unknown strategy " + name);
    }
  }
  if (owned.empty()) throw UsageError("--strategies is empty");
  std::vector<Strategy*> ptrs;
  for (auto& s : owned) ptrs.push_back(s.get());

  const BenchResult r = run_benchmark(source, ptrs, a.states, a.max_steps);
  std::cout << r.config << '\n' << "strategy  mean  median  failures\n";
  for (const auto& s : r.strategies)
    std::cout << s.name << "  " << fmt(s.mean()) << "  " << fmt(s.median(), 1) << "  " << s.failures << '\n';
  if (!a.out.empty()) {
    std::ofstream out(a.out);
    if (!out) throw UsageError("cannot write " + a.out);
    write_bench_csv(out, r);
    std::cout << "wrote " << a.out << '\n';
  }
  return kOk;
}

// ---- concentration

struct ConcentrationArgs {
  std::vector<std::size_t> qubits{2};
  std::size_t samples = 1000;
  double epsilon = 0.2;
  std::uint64_t seed = 1;
  std::string out;
};

int run_concentration(const ConcentrationArgs& a) {
  std::vector<ConcentrationReport> reports;
  for (std::size_t n : a.qubits) {
    Rng rng(derive_seed(a.seed, n));
    reports.push_back(concentration_report(n, a.samples, a.epsilon, rng));
    write_concentration_text(std::cout, reports.back());
    std::cout << '\n';
  }
  if (!a.out.empty()) {
    std::ofstream out(a.out);
    if (!out) throw UsageError("cannot write " + a.out);
    write_concentration_csv(out, reports);
  }
  return kOk;
}

// ---- serve

struct ServeArgs {
  std::string model;
  std::string host = "127.0.0.1";
  int port = 8080;
  double ttl_hours = 24;
};

int run_serve(const ServeArgs& a) {
  std::shared_ptr<const ForestModel> model;
  const std::string path = model_path_or_env(a.model);
  if (!path.empty()) model = std::make_shared<const ForestModel>(load_model(path));
  if (!model) std::cerr << "no model loaded: forest sessions will be refused\n";
  SessionService service(model, std::chrono::seconds(static_cast<long long>(a.ttl_hours * 3600)));
  httplib::Server server;
  mount_routes(server, service);
  std::cout << "listening on " << a.host << ':' << a.port << std::endl;
  if (!server.listen(a.host, a.port)) throw UsageError("cannot listen on " + a.host + ":" + std::to_string(a.port));
  return kOk;
}

bool is_user_error(ErrorCode c) {
  return c != ErrorCode::ContractViolation && c != ErrorCode::DegenerateEnsemble;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Guided entanglement detection with random forests"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "train one forest per observable and save the model");
  t->add_option("--qubits", train.qubits, "qubit count (1-5)")->required()->check(CLI::Range(1, 5));
  t->add_option("--out", train.out, "model file");
  t->add_option("--trees", train.trees, "trees per forest");
  t->add_option("--per-class", train.per_class, "training samples per class (default depends on qubits)");
  t->add_option("--seed", train.seed, "training seed");
  t->add_option("--threads", train.threads, "worker threads (0: all cores)");
  t->add_flag("--quiet", train.quiet, "skip the per-instance summary");

  DetectArgs detect;
  auto* d = app.add_subcommand("detect", "run guided detection on one state and print the trace");
  d->add_option("--strategy", detect.strategy, "forest, tree or bayes")->check(CLI::IsMember({"forest", "tree", "bayes"}));
  d->add_option("--state", detect.state, "bell, ghz:N, dicke:N:K, gdansk:ALPHA, zero:N or a fixture .csv")->required();
  d->add_option("--model", detect.model, "model file (default $QFOREST_MODEL)");
  d->add_option("--noise", detect.noise, "white-noise fraction p");
  d->add_option("--shots", detect.shots, "simulate each value from this many shots (0: exact)");
  d->add_option("--seed", detect.seed, "shot seed");
  d->add_option("--bstar", detect.bstar, "tree anchor observable");
  d->add_option("--csv", detect.csv, "also write the trace as CSV");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "compare strategies over a state source");
  b->add_option("--qubits", bench.qubits, "qubit count")->check(CLI::Range(1, 8));
  b->add_option("--source", bench.source, "accessible or haar");
  b->add_option("--states", bench.states, "states to draw");
  b->add_option("--strategies", bench.strategies, "comma-separated list");
  b->add_option("--out", bench.out, "CSV of cumulative detections per step");
  b->add_option("--model", bench.model, "model file (default $QFOREST_MODEL)");
  b->add_option("--seed", bench.seed, "source seed");
  b->add_option("--max-steps", bench.max_steps, "measurement budget per state (0: all)");
  b->add_option("--mean-gates", bench.mean_gates, "Poisson mean circuit length (0: 24 N (N-1))");
  b->add_flag("--no-reject", bench.no_reject, "keep states with small <x...x>");

  ConcentrationArgs conc;
  auto* c = app.add_subcommand("concentration", "fraction of large squared correlations over Haar states");
  c->add_option("--qubits", conc.qubits, "one or more qubit counts")->check(CLI::Range(1, 8));
  c->add_option("--samples", conc.samples, "Haar states per qubit count");
  c->add_option("--epsilon", conc.epsilon, "threshold on <B>^2");
  c->add_option("--seed", conc.seed, "sampling seed");
  c->add_option("--out", conc.out, "CSV output");

  ServeArgs serve;
  auto* s = app.add_subcommand("serve", "serve guided sessions over HTTP");
  s->add_option("--model", serve.model, "model file (default $QFOREST_MODEL)");
  s->add_option("--host", serve.host, "bind address");
  s->add_option("--port", serve.port, "port");
  s->add_option("--ttl-hours", serve.ttl_hours, "idle session lifetime");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUserError;
  }

  try {
    if (t->parsed()) return run_train(train);
    if (d->parsed()) return run_detect(detect);
    if (b->parsed()) return run_bench(bench);
    if (c->parsed()) return run_concentration(conc);
    if (s->parsed()) return run_serve(serve);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUserError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_user_error(e.code()) ? kUserError : kInternalError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
  return kInternalError;
}
