#pragma once

#include <qforest/correlation.hpp>
#include <qforest/error.hpp>
#include <qforest/pauli.hpp>
#include <qforest/session.hpp>
#include <qforest/state.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace qforest {

struct ShotRecord {
  PauliString observable;
  std::size_t n_shots = 0;
  std::size_t n_plus = 0;
};

inline constexpr std::size_t kDefaultShots = 300;

/// n_plus ~ Binomial(n_shots, (1 + <p>) / 2).
inline ShotRecord simulate_shots(const CorrelationRecord& truth, const PauliString& p, std::size_t n_shots, Rng& rng) {
  if (n_shots == 0) throw Error(ErrorCode::InvalidArgument, "n_shots must be positive");
  const double q = std::clamp((1.0 + truth.at(p)) / 2.0, 0.0, 1.0);
  std::binomial_distribution<std::size_t> dist(n_shots, q);
  return {p, n_shots, dist(rng)};
}

/// Deterministic stand-in for an exactly known expectation.
inline ShotRecord pseudo_shots(const PauliString& p, double value, std::size_t n_shots = kDefaultShots) {
  const double v = std::clamp(value, -1.0, 1.0);
  return {p, n_shots, static_cast<std::size_t>(std::lround(static_cast<double>(n_shots) * (1.0 + v) / 2.0))};
}

/// Weighted Haar-prior particles approximating the posterior over pure states.
/// Each particle caches all of its full-weight expectations.
class ParticleEnsemble {
 public:
  ParticleEnsemble(std::size_t n_qubits, std::vector<PureState> particles) : eval_(n_qubits) {
    if (particles.empty()) throw Error(ErrorCode::InvalidArgument, "empty ensemble");
    for (auto& s : particles) {
      if (s.qubits() != n_qubits) throw Error(ErrorCode::DimensionMismatch, "particle qubit count");
      cache_.push_back(eval_.expectations(s));
      states_.push_back(std::move(s));
    }
    weights_.assign(states_.size(), 1.0 / static_cast<double>(states_.size()));
  }

  std::size_t qubits() const { return eval_.qubits(); }
  std::size_t size() const { return states_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  const PureState& particle(std::size_t k) const { return states_[k]; }
  double particle_expectation(std::size_t k, std::size_t observable) const { return cache_[k][observable]; }

  double effective_sample_size() const {
    double s = 0;
    for (double w : weights_) s += w * w;
    return s > 0 ? 1.0 / s : 0.0;
  }

  void set_weights(std::vector<double> w) {
    if (w.size() != weights_.size()) throw Error(ErrorCode::DimensionMismatch, "weight count");
    weights_ = std::move(w);
    normalize_or_throw();
  }

  /// Bayes rule with the binomial likelihood, in log space; resamples
  /// (multinomial) when the effective sample size falls below half the count.
  void update(const ShotRecord& shot, Rng& rng) {
    if (shot.observable.size() != qubits()) throw Error(ErrorCode::DimensionMismatch, "shot record qubit count");
    if (shot.n_plus > shot.n_shots) throw Error(ErrorCode::InvalidArgument, "n_plus exceeds n_shots");
    if (shot.n_shots == 0) return;
    const std::size_t obs = shot.observable.index();
    const auto plus = static_cast<double>(shot.n_plus);
    const auto minus = static_cast<double>(shot.n_shots - shot.n_plus);
    std::vector<double> logw(size());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < size(); ++k) {
      const double q = std::clamp((1.0 + cache_[k][obs]) / 2.0, 0.0, 1.0);
      double ll = std::log(weights_[k]);
      ll += plus > 0 ? plus * std::log(q) : 0.0;
      ll += minus > 0 ? minus * std::log1p(-q) : 0.0;
      logw[k] = ll;
      top = std::max(top, ll);
    }
    if (!std::isfinite(top)) throw Error(ErrorCode::DegenerateEnsemble, "every particle has zero likelihood");
    for (std::size_t k = 0; k < size(); ++k) weights_[k] = std::exp(logw[k] - top);
    normalize_or_throw();
    if (effective_sample_size() < static_cast<double>(size()) / 2.0) resample(rng);
  }

  /// Posterior mean of every full-weight expectation.
  std::vector<double> estimates() const {
    std::vector<double> out(eval_.size(), 0.0);
    for (std::size_t k = 0; k < size(); ++k)
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += weights_[k] * cache_[k][i];
    return out;
  }

 private:
  void normalize_or_throw() {
    double s = 0;
    for (double w : weights_) {
      if (!(w >= 0) || !std::isfinite(w)) throw Error(ErrorCode::DegenerateEnsemble, "invalid weight");
      s += w;
    }
    if (!(s > 0)) throw Error(ErrorCode::DegenerateEnsemble, "weights sum to zero");
    for (double& w : weights_) w /= s;
  }

  void resample(Rng& rng) {
    std::discrete_distribution<std::size_t> pick(weights_.begin(), weights_.end());
    std::vector<PureState> states;
    std::vector<std::vector<double>> cache;
    states.reserve(size());
    cache.reserve(size());
    for (std::size_t k = 0; k < size(); ++k) {
      const std::size_t j = pick(rng);
      states.push_back(states_[j]);
      cache.push_back(cache_[j]);
    }
    states_ = std::move(states);
    cache_ = std::move(cache);
    weights_.assign(size(), 1.0 / static_cast<double>(size()));
  }

  CorrelationEvaluator eval_;
  std::vector<PureState> states_;
  std::vector<std::vector<double>> cache_;
  std::vector<double> weights_;
};

inline ParticleEnsemble init_ensemble(std::size_t n_qubits, std::size_t n_particles, Rng& rng) {
  if (n_particles == 0) throw Error(ErrorCode::InvalidArgument, "n_particles must be positive");
  std::vector<PureState> particles;
  particles.reserve(n_particles);
  for (std::size_t k = 0; k < n_particles; ++k) particles.push_back(sample_haar_pure(n_qubits, rng));
  return ParticleEnsemble(n_qubits, std::move(particles));
}

inline void bayes_update(ParticleEnsemble& ens, const ShotRecord& shot, Rng& rng) { ens.update(shot, rng); }

inline std::vector<double> estimate_correlations(const ParticleEnsemble& ens) { return ens.estimates(); }

struct BayesConfig {
  std::size_t n_particles = 2000;
  std::size_t n_shots = kDefaultShots;
  std::uint64_t seed = 7;
};

/// Measures the unmeasured observable with the largest |posterior mean|.
/// Session values are folded in as pseudo-shot records; the ensemble is
/// rebuilt from the seed whenever the history does not extend what has
/// already been folded in.
class BayesStrategy final : public Strategy {
 public:
  explicit BayesStrategy(BayesConfig cfg = {}) : cfg_(cfg) {}

  std::string name() const override { return "bayes"; }

  PauliString recommend(const Session& session) override {
    sync(session);
    const auto est = ensemble_->estimates();
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < est.size(); ++i) {
      if (session.record().by_index(i)) continue;
      if (!best || std::abs(est[i]) > std::abs(est[*best])) best = i;
    }
    if (!best) throw Error(ErrorCode::ContractViolation, "no unmeasured observable left");
    return PauliString::from_index(session.qubits(), *best);
  }

  const ParticleEnsemble* ensemble() const { return ensemble_ ? &*ensemble_ : nullptr; }

 private:
  void sync(const Session& session) {
    const auto& h = session.history();
    bool prefix = ensemble_ && ensemble_->qubits() == session.qubits() && folded_.size() <= h.size();
    for (std::size_t i = 0; prefix && i < folded_.size(); ++i)
      prefix = folded_[i].observable == h[i].observable && folded_[i].value == h[i].value;
    if (!prefix) {
      rng_.seed(cfg_.seed);
      ensemble_.emplace(init_ensemble(session.qubits(), cfg_.n_particles, rng_));
      folded_.clear();
    }
    for (std::size_t i = folded_.size(); i < h.size(); ++i) {
      ensemble_->update(pseudo_shots(h[i].observable, h[i].value, cfg_.n_shots), rng_);
      folded_.push_back(h[i]);
    }
  }

  BayesConfig cfg_;
  Rng rng_;
  std::optional<ParticleEnsemble> ensemble_;
  std::vector<Measurement> folded_;
};

}  // namespace qforest
