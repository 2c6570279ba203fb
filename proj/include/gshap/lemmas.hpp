#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <vector>

#include "gshap/contribution.hpp"
#include "gshap/shapley.hpp"

namespace gshap {

struct LemmaReport {
  int trials = 0;
  /// max |[v(S0+SA) - v(S0+SB)] - [v(SA) - v(SB)]|
  double max_deviation_shift = 0.0;
  /// max |[v(S+j) - v(S)] - [v_g(S+j) - v_g(S)]|
  double max_deviation_group = 0.0;
  bool covered_empty_base = false;

  double max_deviation() const {
    return std::max(max_deviation_shift, max_deviation_group);
  }
};

/// Numerical check of the two contribution-function identities that hold for
/// a separable model with independent groups (analytic estimator):
///  * moving a base set S0 drawn from groups T0 in and out of both sides of a
///    difference over sets drawn from disjoint groups TAB does not change it;
///  * a marginal contribution inside one group equals the marginal
///    contribution of that group's sub-model.
/// Trial 0 always uses S0 = {} and S = {}.
inline LemmaReport check_lemma_identities(const ModelSpec& model,
                                          const GaussianModel& dist,
                                          const FeaturePartition& partition,
                                          const Vector& x_star, int trials, Rng& rng) {
  const auto parts = detail::require_conditions(model, dist, partition);
  const int g_count = partition.group_count();
  ContributionCache full(model, dist, x_star, AnalyticEstimator{});
  std::deque<ContributionCache> sub;
  for (const auto& p : parts.parts) sub.emplace_back(p, dist, x_star, AnalyticEstimator{});

  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> three(0, 2);
  auto random_subset = [&](Coalition universe) {
    Coalition out;
    for (int i : universe.indices()) {
      if (coin(rng)) out = out.with(i);
    }
    return out;
  };

  LemmaReport r;
  r.trials = trials;
  for (int t = 0; t < trials; ++t) {
    // Groups go to T0, TAB, or neither.
    Coalition t0_groups, tab_groups;
    for (int g = 0; g < g_count; ++g) {
      switch (three(rng)) {
        case 0: t0_groups = t0_groups.with(g); break;
        case 1: tab_groups = tab_groups.with(g); break;
        default: break;
      }
    }
    const Coalition s0 = t == 0 ? Coalition{} : random_subset(partition.expand(t0_groups));
    const Coalition sa = random_subset(partition.expand(tab_groups));
    const Coalition sb = random_subset(partition.expand(tab_groups));
    if (s0 == Coalition{}) r.covered_empty_base = true;
    const double lhs = full.value(s0 | sa) - full.value(s0 | sb);
    const double rhs = full.value(sa) - full.value(sb);
    r.max_deviation_shift = std::max(r.max_deviation_shift, std::abs(lhs - rhs));

    std::uniform_int_distribution<int> pick_group(0, g_count - 1);
    const int g = pick_group(rng);
    const auto& members = partition.group(g).features;
    std::uniform_int_distribution<std::size_t> pick_feature(0, members.size() - 1);
    const int j = members[pick_feature(rng)];
    const Coalition s =
        t == 0 ? Coalition{} : random_subset(partition.group_mask(g).without(j));
    auto& vg = sub[static_cast<std::size_t>(g)];
    const double full_step = full.value(s.with(j)) - full.value(s);
    const double group_step = vg.value(s.with(j)) - vg.value(s);
    r.max_deviation_group =
        std::max(r.max_deviation_group, std::abs(full_step - group_step));
  }
  return r;
}

}  // namespace gshap
