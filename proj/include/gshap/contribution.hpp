#pragma once

#include <cmath>
#include <cstdint>
#include <mutex>
#include <string>
#include <unordered_map>
#include <variant>

#include "gshap/coalition.hpp"
#include "gshap/gaussian.hpp"
#include "gshap/model.hpp"
#include "gshap/rng.hpp"

namespace gshap {

/// Exact conditional expectation from closed-form Gaussian moments.
struct AnalyticEstimator {};

/// Monte Carlo integration with `samples` conditional draws per coalition.
/// Each coalition draws from its own stream derived from
/// (seed, stream, coalition mask).
struct MonteCarloEstimator {
  Eigen::Index samples = 1000;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

using Estimator = std::variant<AnalyticEstimator, MonteCarloEstimator>;

inline std::string estimator_name(const Estimator& e) {
  return std::holds_alternative<AnalyticEstimator>(e) ? "analytic" : "monte_carlo";
}

struct ContributionEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  std::uint64_t model_evaluations = 0;
};

/// E[f(x) | x_S = x*_S] from the moments of the conditional law.
inline double expected_raw(const ModelSpec& model, const Moments& mo) {
  double out = model.intercept;
  for (const auto& t : model.linear) out += t.coef * mo.mean(t.index);
  for (const auto& t : model.cosine) out += t.coef * mo.cosine(t.index);
  for (const auto& t : model.product) out += t.coef * mo.second(t.i, t.j);
  for (const auto& t : model.hfun) {
    out += t.coef * (mo.second(t.i, t.j) + mo.cross_cubic(t.i, t.j) +
                     mo.cross_cubic(t.j, t.i));
  }
  return out;
}

inline double contribution_analytic(const ModelSpec& model,
                                    const GaussianModel& dist,
                                    const Vector& x_star, Coalition s) {
  if (s == Coalition::grand(dist.dimension())) return evaluate_one(model, x_star);
  const auto cond = dist.condition_on_instance(s, x_star);
  return (expected_raw(model, cond.moments()) - model.shift) / model.scale;
}

/// Sample mean of the model over `n` conditional draws; the fully
/// conditioned coalition is evaluated directly.
inline ContributionEstimate contribution_mc(const ModelSpec& model,
                                            const GaussianModel& dist,
                                            const Vector& x_star, Coalition s,
                                            Eigen::Index n, Rng& rng) {
  if (n < 1) throw DomainError("Monte Carlo sample count must be positive");
  if (s == Coalition::grand(dist.dimension())) {
    return {evaluate_one(model, x_star), 0.0, 1};
  }
  const auto cond = dist.condition_on_instance(s, x_star);
  const Matrix draws = cond.sample(n, rng);
  const Vector y = evaluate(model, draws);
  const double mean = y.mean();
  double se = 0.0;
  if (n > 1) {
    const double var =
        (y.array() - mean).square().sum() / static_cast<double>(n - 1);
    se = std::sqrt(var / static_cast<double>(n));
  }
  return {mean, se, static_cast<std::uint64_t>(n)};
}

inline ContributionEstimate estimate_contribution(const ModelSpec& model,
                                                  const GaussianModel& dist,
                                                  const Vector& x_star,
                                                  Coalition s,
                                                  const Estimator& estimator) {
  if (const auto* mc = std::get_if<MonteCarloEstimator>(&estimator)) {
    Rng rng = make_rng(mc->seed, {stream::kContribution, mc->stream, s.members});
    return contribution_mc(model, dist, x_star, s, mc->samples, rng);
  }
  const bool direct = s == Coalition::grand(dist.dimension());
  return {contribution_analytic(model, dist, x_star, s), 0.0, direct ? 1U : 0U};
}

/// Memo of v(S) keyed by feature mask for one (model, distribution, instance,
/// estimator). Each coalition is computed at most once; distinct keys may be
/// inserted from several threads.
class ContributionCache {
 public:
  ContributionCache(const ModelSpec& model, const GaussianModel& dist,
                    Vector x_star, Estimator estimator)
      : model_(&model),
        dist_(&dist),
        x_star_(std::move(x_star)),
        estimator_(estimator) {
    if (x_star_.size() != dist.dimension() ||
        model.feature_count != dist.dimension()) {
      throw ValidationError("model, distribution and instance dimensions differ");
    }
  }
  // The cache keeps pointers; temporaries would dangle.
  ContributionCache(ModelSpec&&, const GaussianModel&, Vector, Estimator) = delete;
  ContributionCache(const ModelSpec&, GaussianModel&&, Vector, Estimator) = delete;

  const ContributionEstimate& get(Coalition s) {
    {
      std::lock_guard lock(mutex_);
      auto it = entries_.find(s.members);
      if (it != entries_.end()) return it->second;
    }
    ContributionEstimate e =
        estimate_contribution(*model_, *dist_, x_star_, s, estimator_);
    std::lock_guard lock(mutex_);
    auto [it, inserted] = entries_.emplace(s.members, e);
    if (inserted) model_evaluations_ += e.model_evaluations;
    return it->second;
  }

  double value(Coalition s) { return get(s).value; }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
  }
  std::uint64_t model_evaluations() const {
    std::lock_guard lock(mutex_);
    return model_evaluations_;
  }

  const ModelSpec& model() const { return *model_; }
  const GaussianModel& distribution() const { return *dist_; }
  const Vector& instance() const { return x_star_; }
  const Estimator& estimator() const { return estimator_; }
  int feature_count() const { return dist_->dimension(); }

 private:
  const ModelSpec* model_;
  const GaussianModel* dist_;
  Vector x_star_;
  Estimator estimator_;
  mutable std::mutex mutex_;
  std::unordered_map<std::uint64_t, ContributionEstimate> entries_;
  std::uint64_t model_evaluations_ = 0;
};

}  // namespace gshap
