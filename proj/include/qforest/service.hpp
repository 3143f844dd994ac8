#pragma once

#include <qforest/bayes_strategy.hpp>
#include <qforest/error.hpp>
#include <qforest/forest.hpp>
#include <qforest/pauli.hpp>
#include <qforest/session.hpp>
#include <qforest/tree_strategy.hpp>

#include "json.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace qforest {

/// A live session and the strategy instance that drives it.
struct SessionHandle {
  using Clock = std::chrono::steady_clock;

  std::string id;
  std::string strategy_name;
  Session session;
  std::unique_ptr<Strategy> strategy;
  Clock::time_point created;
  Clock::time_point updated;
  std::mutex mutex;  // serializes requests to this session

  SessionHandle(std::string id_, std::string name, std::size_t n_qubits, std::unique_ptr<Strategy> s, Clock::time_point now)
      : id(std::move(id_)), strategy_name(std::move(name)), session(n_qubits), strategy(std::move(s)), created(now),
        updated(now) {}

  /// Next observable, or nullopt once the session is decided.
  std::optional<PauliString> recommendation() {
    if (session.status() != Status::Undetermined) return std::nullopt;
    return strategy->recommend(session);
  }
};

/// In-memory sessions with idle eviction. The store lock only guards the map;
/// each session has its own mutex.
class SessionStore {
 public:
  using Clock = SessionHandle::Clock;

  explicit SessionStore(std::chrono::seconds ttl = std::chrono::hours(24), std::function<Clock::time_point()> now = Clock::now)
      : ttl_(ttl), now_(std::move(now)), rng_(std::random_device{}()) {}

  Clock::time_point now() const { return now_(); }

  std::shared_ptr<SessionHandle> create(std::string strategy_name, std::size_t n_qubits, std::unique_ptr<Strategy> s) {
    std::lock_guard lock(mutex_);
    evict_locked();
    std::string id;
    do id = fresh_id_locked();
    while (sessions_.count(id));
    auto h = std::make_shared<SessionHandle>(id, std::move(strategy_name), n_qubits, std::move(s), now_());
    sessions_.emplace(id, h);
    return h;
  }

  std::shared_ptr<SessionHandle> find(const std::string& id) {
    std::lock_guard lock(mutex_);
    evict_locked();
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorCode::NotFound, "session " + id);
    return it->second;
  }

  void erase(const std::string& id) {
    std::lock_guard lock(mutex_);
    if (!sessions_.erase(id)) throw Error(ErrorCode::NotFound, "session " + id);
  }

  /// Marks the session as used now.
  void touch(SessionHandle& h) { h.updated = now_(); }

  std::size_t size() {
    std::lock_guard lock(mutex_);
    evict_locked();
    return sessions_.size();
  }

 private:
  void evict_locked() {
    const auto t = now_();
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      if (t - it->second->updated > ttl_)
        it = sessions_.erase(it);
      else
        ++it;
    }
  }

  std::string fresh_id_locked() {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string id;
    for (int w = 0; w < 2; ++w) {
      std::uint64_t v = rng_();
      for (int k = 0; k < 16; ++k, v >>= 4) id.push_back(kHex[v & 0xF]);
    }
    return id;
  }

  std::chrono::seconds ttl_;
  std::function<Clock::time_point()> now_;
  std::mutex mutex_;
  std::mt19937_64 rng_;
  std::map<std::string, std::shared_ptr<SessionHandle>> sessions_;
};

struct HttpResponse {
  int status = 200;
  nlohmann::json body;
};

inline int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound: return 404;
    case ErrorCode::Duplicate: return 409;
    case ErrorCode::InvalidLetter:
    case ErrorCode::OutOfRange:
    case ErrorCode::Malformed: return 422;
    case ErrorCode::ContractViolation:
    case ErrorCode::DegenerateEnsemble: return 500;
    default: return 400;
  }
}

/// Request handling for the /v1 API, independent of the transport.
class SessionService {
 public:
  /// `model` may be null; forest sessions are then refused.
  explicit SessionService(std::shared_ptr<const ForestModel> model, SessionStore::Clock::duration ttl = std::chrono::hours(24),
                          BayesConfig bayes = {})
      : model_(std::move(model)), store_(std::chrono::duration_cast<std::chrono::seconds>(ttl)), bayes_(bayes) {}

  SessionStore& store() { return store_; }
  const ForestModel* model() const { return model_.get(); }

  /// Builds the strategy a session of this kind runs.
  std::unique_ptr<Strategy> make_strategy(const std::string& name, std::size_t n_qubits) const {
    if (name == "forest") {
      if (!model_) throw Error(ErrorCode::InvalidArgument, "no forest model loaded");
      if (model_->n_qubits != n_qubits)
        throw Error(ErrorCode::QubitMismatch, "model is for " + std::to_string(model_->n_qubits) + " qubits");
      return std::make_unique<ForestStrategy>(model_);
    }
    if (name == "tree") return std::make_unique<TreeStrategy>(PauliString(std::vector<Pauli>(n_qubits, Pauli::X)));
    if (name == "bayes") {
      if (n_qubits > 5) throw Error(ErrorCode::CapExceeded, "bayes sessions support at most 5 qubits");
      return std::make_unique<BayesStrategy>(bayes_);
    }
    throw Error(ErrorCode::Malformed, "unknown strategy \"" + name + "\"");
  }

  HttpResponse create(const nlohmann::json& body) {
    return guarded([&] {
      if (!body.is_object() || !body.contains("n_qubits") || !body["n_qubits"].is_number_integer())
        throw Error(ErrorCode::Malformed, "n_qubits must be an integer");
      const auto n = body["n_qubits"].get<std::int64_t>();
      if (n < 1 || n > static_cast<std::int64_t>(kMaxQubits))
        throw Error(ErrorCode::Malformed, "n_qubits out of range");
      const std::string name = body.value("strategy", std::string("forest"));
      auto strategy = make_strategy(name, static_cast<std::size_t>(n));
      auto h = store_.create(name, static_cast<std::size_t>(n), std::move(strategy));
      std::lock_guard lock(h->mutex);
      return HttpResponse{201, view(*h)};
    });
  }

  HttpResponse get(const std::string& id) {
    return guarded([&] {
      auto h = store_.find(id);
      std::lock_guard lock(h->mutex);
      store_.touch(*h);
      return HttpResponse{200, view(*h)};
    });
  }

  HttpResponse post_result(const std::string& id, const nlohmann::json& body) {
    return guarded([&] {
      auto h = store_.find(id);
      if (!body.is_object() || !body.contains("observable") || !body["observable"].is_string())
        throw Error(ErrorCode::Malformed, "observable must be a string");
      if (!body.contains("value") || !body["value"].is_number()) throw Error(ErrorCode::Malformed, "value must be a number");
      const PauliString p = PauliString::parse(body["observable"].get<std::string>());
      const double value = body["value"].get<double>();
      std::lock_guard lock(h->mutex);
      h->session.record(p, value);
      store_.touch(*h);
      return HttpResponse{200, view(*h)};
    });
  }

  HttpResponse close(const std::string& id) {
    return guarded([&] {
      store_.erase(id);
      return HttpResponse{200, {{"id", id}, {"closed", true}}};
    });
  }

  static HttpResponse health() { return {200, {{"status", "ok"}}}; }

  /// Session state as served; caller holds the session lock.
  static nlohmann::json view(SessionHandle& h) {
    nlohmann::json history = nlohmann::json::array();
    double running = 0;
    std::size_t step = 0;
    for (const auto& m : h.session.history()) {
      running += m.value * m.value;
      history.push_back({{"step", ++step}, {"observable", m.observable.str()}, {"value", m.value}, {"running_sum", running}});
    }
    const auto rec = h.recommendation();
    return {{"id", h.id},
            {"n_qubits", h.session.qubits()},
            {"strategy", h.strategy_name},
            {"history", std::move(history)},
            {"criterion_sum", h.session.criterion_sum()},
            {"status", to_string(h.session.status())},
            {"recommendation", rec ? nlohmann::json(rec->str()) : nlohmann::json(nullptr)}};
  }

 private:
  template <class F>
  static HttpResponse guarded(F&& f) {
    try {
      return f();
    } catch (const Error& e) {
      return {http_status(e.code()), {{"error", to_string(e.code())}, {"message", e.what()}}};
    } catch (const nlohmann::json::exception& e) {
      return {422, {{"error", "Malformed"}, {"message", e.what()}}};
    }
  }

  std::shared_ptr<const ForestModel> model_;
  SessionStore store_;
  BayesConfig bayes_;
};

}  // namespace qforest
