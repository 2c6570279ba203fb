#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <numeric>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "gshap/coalition.hpp"
#include "gshap/contribution.hpp"
#include "gshap/errors.hpp"
#include "gshap/gaussian.hpp"
#include "gshap/model.hpp"
#include "gshap/partition.hpp"

namespace gshap {

/// Shapley values of a generic cooperative game plus the bookkeeping needed
/// to audit the computation.
struct GameSolution {
  std::vector<double> phi;
  std::vector<double> error_bound;  // propagated standard errors; zero if exact
  double empty_value = 0.0;
  double grand_value = 0.0;
  std::uint64_t coalitions_evaluated = 0;
  std::uint64_t terms_per_player = 0;
};

namespace detail {
template <typename T>
ContributionEstimate as_estimate(const T& v) {
  if constexpr (std::is_convertible_v<T, double>) {
    return {static_cast<double>(v), 0.0, 0};
  } else {
    return v;
  }
}
}  // namespace detail

/// Exact Shapley values of the game `v` over `player_count` players.
/// `v` maps a Coalition to a double or a ContributionEstimate and is called
/// exactly once per coalition (2^P calls).
template <typename Game>
  requires std::invocable<Game&, Coalition>
GameSolution solve_game(int player_count, Game&& v, int cap = kDefaultPlayerCap) {
  check_player_count(player_count, cap);
  const std::uint64_t n_coalitions = std::uint64_t{1} << player_count;
  std::vector<double> value(n_coalitions);
  std::vector<double> se(n_coalitions);
  for (std::uint64_t m = 0; m < n_coalitions; ++m) {
    const auto e = detail::as_estimate(v(Coalition{m}));
    value[m] = e.value;
    se[m] = e.standard_error;
  }
  const auto weight = shapley_weight_table(player_count);

  GameSolution out;
  out.phi.assign(static_cast<std::size_t>(player_count), 0.0);
  out.error_bound.assign(static_cast<std::size_t>(player_count), 0.0);
  out.empty_value = value.front();
  out.grand_value = value.back();
  out.coalitions_evaluated = n_coalitions;
  out.terms_per_player = n_coalitions / 2;
  for (int j = 0; j < player_count; ++j) {
    double phi = 0.0, bound = 0.0;
    for (Coalition s : SubsetRange(Coalition::grand(player_count).without(j))) {
      const double w = weight[static_cast<std::size_t>(s.size())];
      const std::uint64_t with_j = s.with(j).members;
      phi += w * (value[with_j] - value[s.members]);
      bound += w * (se[with_j] + se[s.members]);
    }
    out.phi[static_cast<std::size_t>(j)] = phi;
    out.error_bound[static_cast<std::size_t>(j)] = bound;
  }
  return out;
}

/// Per-player attribution of one prediction.
struct Explanation {
  std::vector<std::string> labels;
  std::vector<double> phi;
  std::vector<double> error_bound;
  double base_value = 0.0;
  double predicted = 0.0;
  double efficiency_residual = 0.0;
  std::uint64_t coalitions_evaluated = 0;
  std::uint64_t terms_per_player = 0;
  std::uint64_t model_evaluations = 0;

  double phi_of(const std::string& label) const {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == label) return phi[i];
    }
    throw ValidationError("no player labelled '" + label + "'");
  }
  double phi_sum() const { return std::accumulate(phi.begin(), phi.end(), 0.0); }
};

struct ExplainOptions {
  int player_cap = kDefaultPlayerCap;
};

namespace detail {
inline void finish(Explanation& e) {
  e.efficiency_residual = e.predicted - e.base_value - e.phi_sum();
}

inline std::vector<std::string> feature_labels(int m) {
  std::vector<std::string> out;
  for (int i = 0; i < m; ++i) out.push_back("x" + std::to_string(i));
  return out;
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Feature-wise and group-wise Shapley values over a shared contribution cache.

inline Explanation feature_shapley(ContributionCache& cache,
                                   const ExplainOptions& opt = {}) {
  const int m = cache.feature_count();
  const auto before = cache.model_evaluations();
  const auto sol =
      solve_game(m, [&](Coalition s) { return cache.get(s); }, opt.player_cap);
  Explanation e;
  e.labels = detail::feature_labels(m);
  e.phi = sol.phi;
  e.error_bound = sol.error_bound;
  e.base_value = sol.empty_value;
  e.predicted = sol.grand_value;
  e.coalitions_evaluated = sol.coalitions_evaluated;
  e.terms_per_player = sol.terms_per_player;
  e.model_evaluations = cache.model_evaluations() - before;
  detail::finish(e);
  return e;
}

/// groupShapley: the groups are the players and v(T) conditions on every
/// feature of every group in T.
inline Explanation group_shapley(ContributionCache& cache,
                                 const FeaturePartition& partition,
                                 const ExplainOptions& opt = {}) {
  if (partition.feature_count() != cache.feature_count()) {
    throw ValidationError("partition covers " +
                          std::to_string(partition.feature_count()) +
                          " features, model has " +
                          std::to_string(cache.feature_count()));
  }
  const auto before = cache.model_evaluations();
  const auto sol = solve_game(
      partition.group_count(),
      [&](Coalition t) { return cache.get(partition.expand(t)); },
      opt.player_cap);
  Explanation e;
  e.labels = partition.labels();
  e.phi = sol.phi;
  e.error_bound = sol.error_bound;
  e.base_value = sol.empty_value;
  e.predicted = sol.grand_value;
  e.coalitions_evaluated = sol.coalitions_evaluated;
  e.terms_per_player = sol.terms_per_player;
  e.model_evaluations = cache.model_evaluations() - before;
  detail::finish(e);
  return e;
}

/// Feature-wise values summed within each group.
inline Explanation post_grouped_shapley(ContributionCache& cache,
                                        const FeaturePartition& partition,
                                        const ExplainOptions& opt = {}) {
  if (partition.feature_count() != cache.feature_count()) {
    throw ValidationError("partition and model feature counts differ");
  }
  const Explanation features = feature_shapley(cache, opt);
  Explanation e;
  e.labels = partition.labels();
  e.phi.assign(static_cast<std::size_t>(partition.group_count()), 0.0);
  e.error_bound.assign(e.phi.size(), 0.0);
  for (int g = 0; g < partition.group_count(); ++g) {
    for (int f : partition.group(g).features) {
      e.phi[static_cast<std::size_t>(g)] += features.phi[static_cast<std::size_t>(f)];
      e.error_bound[static_cast<std::size_t>(g)] +=
          features.error_bound[static_cast<std::size_t>(f)];
    }
  }
  e.base_value = features.base_value;
  e.predicted = features.predicted;
  e.coalitions_evaluated = features.coalitions_evaluated;
  e.terms_per_player = features.terms_per_player;
  e.model_evaluations = features.model_evaluations;
  detail::finish(e);
  return e;
}

inline Explanation feature_shapley(const ModelSpec& model, const GaussianModel& dist,
                                   const Vector& x_star, const Estimator& estimator,
                                   const ExplainOptions& opt = {}) {
  check_player_count(dist.dimension(), opt.player_cap);
  ContributionCache cache(model, dist, x_star, estimator);
  return feature_shapley(cache, opt);
}

inline Explanation group_shapley(const ModelSpec& model, const GaussianModel& dist,
                                 const Vector& x_star,
                                 const FeaturePartition& partition,
                                 const Estimator& estimator,
                                 const ExplainOptions& opt = {}) {
  ContributionCache cache(model, dist, x_star, estimator);
  return group_shapley(cache, partition, opt);
}

inline Explanation post_grouped_shapley(const ModelSpec& model,
                                        const GaussianModel& dist,
                                        const Vector& x_star,
                                        const FeaturePartition& partition,
                                        const Estimator& estimator,
                                        const ExplainOptions& opt = {}) {
  check_player_count(dist.dimension(), opt.player_cap);
  ContributionCache cache(model, dist, x_star, estimator);
  return post_grouped_shapley(cache, partition, opt);
}

// ---------------------------------------------------------------------------
// Separable models with independent groups.

struct ConditionReport {
  bool separable = false;
  bool group_independent = false;
  std::vector<CrossGroupTerm> offending_terms;

  bool holds() const { return separable && group_independent; }
  std::string describe() const {
    std::string out;
    if (!separable) {
      out += "model is not additively separable over the groups (";
      for (std::size_t k = 0; k < offending_terms.size(); ++k) {
        if (k) out += ", ";
        out += offending_terms[k].kind + "(" + std::to_string(offending_terms[k].i) +
               "," + std::to_string(offending_terms[k].j) + ")";
      }
      out += ")";
    }
    if (!group_independent) {
      if (!out.empty()) out += "; ";
      out += "features in different groups are correlated";
    }
    return out.empty() ? "conditions hold" : out;
  }
};

inline ConditionReport check_conditions(const ModelSpec& model,
                                        const GaussianModel& dist,
                                        const FeaturePartition& partition) {
  ConditionReport r;
  auto d = decompose_by_groups(model, partition);
  if (auto* bad = std::get_if<NotSeparable>(&d)) {
    r.offending_terms = bad->offending;
  } else {
    r.separable = true;
  }
  r.group_independent = dist.group_independent(partition);
  return r;
}

namespace detail {
inline GroupDecomposition require_conditions(const ModelSpec& model,
                                             const GaussianModel& dist,
                                             const FeaturePartition& partition) {
  const auto report = check_conditions(model, dist, partition);
  if (!report.holds()) {
    throw PreconditionError("separable-group formulas refused: " + report.describe());
  }
  return std::get<GroupDecomposition>(decompose_by_groups(model, partition));
}
}  // namespace detail

/// Feature-wise values computed group by group, enumerating only subsets of
/// each feature's own group against that group's sub-model. Refuses unless
/// the model separates over the partition and the groups are independent.
inline Explanation simplified_feature_shapley(
    const ModelSpec& model, const GaussianModel& dist, const Vector& x_star,
    const FeaturePartition& partition, const Estimator& estimator = AnalyticEstimator{},
    const ExplainOptions& opt = {}) {
  const auto parts = detail::require_conditions(model, dist, partition);
  const int m = dist.dimension();
  Explanation e;
  e.labels = detail::feature_labels(m);
  e.phi.assign(static_cast<std::size_t>(m), 0.0);
  e.error_bound.assign(static_cast<std::size_t>(m), 0.0);
  for (int g = 0; g < partition.group_count(); ++g) {
    const auto& members = partition.group(g).features;
    const int size = static_cast<int>(members.size());
    ContributionCache cache(parts.parts[static_cast<std::size_t>(g)], dist, x_star,
                            estimator);
    // Players are positions within the group; map back to feature masks.
    auto to_features = [&](Coalition local) {
      Coalition out;
      for (int k : local.indices()) out = out.with(members[static_cast<std::size_t>(k)]);
      return out;
    };
    const auto sol = solve_game(
        size, [&](Coalition local) { return cache.get(to_features(local)); },
        opt.player_cap);
    for (int k = 0; k < size; ++k) {
      const auto f = static_cast<std::size_t>(members[static_cast<std::size_t>(k)]);
      e.phi[f] = sol.phi[static_cast<std::size_t>(k)];
      e.error_bound[f] = sol.error_bound[static_cast<std::size_t>(k)];
    }
    e.coalitions_evaluated += sol.coalitions_evaluated;
    e.model_evaluations += cache.model_evaluations();
    e.base_value += sol.empty_value;
    e.predicted += sol.grand_value;
  }
  detail::finish(e);
  return e;
}

/// Group values in closed form: each group's sub-model at x* minus its
/// expectation. No coalition enumeration. Same refusal rule as above.
inline Explanation separable_group_values(const ModelSpec& model,
                                          const GaussianModel& dist,
                                          const Vector& x_star,
                                          const FeaturePartition& partition) {
  const auto parts = detail::require_conditions(model, dist, partition);
  const Coalition grand = Coalition::grand(dist.dimension());
  Explanation e;
  e.labels = partition.labels();
  e.error_bound.assign(static_cast<std::size_t>(partition.group_count()), 0.0);
  for (int g = 0; g < partition.group_count(); ++g) {
    const auto& part = parts.parts[static_cast<std::size_t>(g)];
    const double at_instance = contribution_analytic(part, dist, x_star, grand);
    const double expected = contribution_analytic(part, dist, x_star, Coalition{});
    e.phi.push_back(at_instance - expected);
    e.base_value += expected;
    e.predicted += at_instance;
  }
  e.coalitions_evaluated = 0;
  detail::finish(e);
  return e;
}

}  // namespace gshap
