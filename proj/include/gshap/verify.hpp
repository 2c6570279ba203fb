#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gshap/experiment.hpp"
#include "gshap/lemmas.hpp"
#include "gshap/shapley.hpp"

namespace gshap {

inline constexpr double kExactTolerance = 1e-9;

/// A model, distribution and partition for which the separable-group
/// results apply.
struct SeparableCase {
  std::string name;
  ModelSpec model;
  GaussianModel dist;
  FeaturePartition partition;
};

/// Random separable model over 2..max_features features with a random
/// partition and a block-diagonal covariance (independent groups).
inline SeparableCase random_separable_case(Rng& rng, int max_features = 8) {
  std::uniform_int_distribution<int> m_dist(2, max_features);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int m = m_dist(rng);
  std::uniform_int_distribution<int> g_dist(1, m);
  const int g = g_dist(rng);

  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  // g-1 distinct cut points in 1..m-1.
  std::vector<int> cuts(static_cast<std::size_t>(m - 1));
  std::iota(cuts.begin(), cuts.end(), 1);
  std::shuffle(cuts.begin(), cuts.end(), rng);
  cuts.resize(static_cast<std::size_t>(g - 1));
  cuts.push_back(0);
  cuts.push_back(m);
  std::sort(cuts.begin(), cuts.end());
  std::vector<std::vector<int>> groups;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    groups.emplace_back(order.begin() + cuts[k], order.begin() + cuts[k + 1]);
  }
  FeaturePartition partition = validate_partition(groups, m);

  ModelSpec model;
  model.feature_count = m;
  model.intercept = normal(rng);
  for (int i = 0; i < m; ++i) {
    if (unit(rng) < 0.7) model.linear.push_back({i, normal(rng)});
    if (unit(rng) < 0.5) model.cosine.push_back({i, normal(rng)});
  }
  for (const auto& grp : groups) {
    for (std::size_t a = 0; a < grp.size(); ++a) {
      for (std::size_t b = a + 1; b < grp.size(); ++b) {
        if (unit(rng) < 0.5) model.product.push_back({grp[a], grp[b], normal(rng)});
        if (unit(rng) < 0.3) model.hfun.push_back({grp[a], grp[b], 0.5 * normal(rng)});
      }
    }
  }

  Matrix cov = Matrix::Zero(m, m);
  for (const auto& grp : groups) {
    const auto k = static_cast<Eigen::Index>(grp.size());
    Matrix a(k, k);
    for (Eigen::Index r = 0; r < k; ++r) {
      for (Eigen::Index c = 0; c < k; ++c) a(r, c) = 0.6 * normal(rng);
    }
    Matrix block = a * a.transpose() + 0.3 * Matrix::Identity(k, k);
    for (Eigen::Index r = 0; r < k; ++r) {
      for (Eigen::Index c = 0; c < k; ++c) {
        cov(grp[static_cast<std::size_t>(r)], grp[static_cast<std::size_t>(c)]) = block(r, c);
      }
    }
  }
  Vector mean(m);
  for (int i = 0; i < m; ++i) mean(i) = 0.5 * normal(rng);
  return {"synthetic(M=" + std::to_string(m) + ",G=" + std::to_string(g) + ")", model,
          GaussianModel(mean, cov), partition};
}

struct CaseDeviations {
  double simplified_vs_feature = 0.0;  // per feature
  double group_vs_post = 0.0;          // per group
  double group_vs_closed_form = 0.0;
  double post_vs_closed_form = 0.0;

  double max() const {
    return std::max({simplified_vs_feature, group_vs_post, group_vs_closed_form,
                     post_vs_closed_form});
  }
};

namespace detail {
inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double out = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) out = std::max(out, std::abs(a[i] - b[i]));
  return out;
}
}  // namespace detail

/// All four analytic routes on one instance of a separable case.
inline CaseDeviations compare_separable_routes(const SeparableCase& c, const Vector& x) {
  ContributionCache cache(c.model, c.dist, x, AnalyticEstimator{});
  const auto full = feature_shapley(cache);
  const auto simplified = simplified_feature_shapley(c.model, c.dist, x, c.partition);
  const auto pre = group_shapley(cache, c.partition);
  const auto post = post_grouped_shapley(cache, c.partition);
  const auto closed = separable_group_values(c.model, c.dist, x, c.partition);
  CaseDeviations d;
  d.simplified_vs_feature = detail::max_abs_diff(full.phi, simplified.phi);
  d.group_vs_post = detail::max_abs_diff(pre.phi, post.phi);
  d.group_vs_closed_form = detail::max_abs_diff(pre.phi, closed.phi);
  d.post_vs_closed_form = detail::max_abs_diff(post.phi, closed.phi);
  return d;
}

struct VerifyOptions {
  int trials = 200;
  std::uint64_t seed = 0;
  int instances = 20;
  /// Benchmark models to check; all six when empty.
  std::vector<PaperModelId> models;
};

struct VerifyLine {
  std::string subject;
  std::string check;
  bool skipped = false;
  std::string note;
  double max_deviation = 0.0;

  bool passed() const { return skipped || max_deviation < kExactTolerance; }
};

struct VerifyReport {
  std::vector<VerifyLine> lines;

  bool passed() const {
    return std::all_of(lines.begin(), lines.end(), [](const auto& l) { return l.passed(); });
  }
  double max_deviation() const {
    double out = 0.0;
    for (const auto& l : lines) {
      if (!l.skipped) out = std::max(out, l.max_deviation);
    }
    return out;
  }
  std::string text() const {
    std::ostringstream out;
    for (const auto& l : lines) {
      out << (l.skipped ? "SKIP" : (l.passed() ? "PASS" : "FAIL")) << "  " << l.subject
          << "  " << l.check << "  ";
      if (l.skipped) {
        out << l.note;
      } else {
        out << "max deviation " << l.max_deviation;
      }
      out << '\n';
    }
    out << (passed() ? "PASS" : "FAIL") << "  overall max deviation " << max_deviation()
        << " (tolerance " << kExactTolerance << ")\n";
    return out.str();
  }
};

inline void verify_case(const SeparableCase& c, const Matrix& instances, int trials,
                        Rng& rng, VerifyReport& report) {
  CaseDeviations worst;
  for (Eigen::Index r = 0; r < instances.rows(); ++r) {
    const auto d = compare_separable_routes(c, instances.row(r).transpose());
    worst.simplified_vs_feature = std::max(worst.simplified_vs_feature, d.simplified_vs_feature);
    worst.group_vs_post = std::max(worst.group_vs_post, d.group_vs_post);
    worst.group_vs_closed_form = std::max(worst.group_vs_closed_form, d.group_vs_closed_form);
    worst.post_vs_closed_form = std::max(worst.post_vs_closed_form, d.post_vs_closed_form);
  }
  report.lines.push_back({c.name, "simplified feature-wise formula", false, "",
                          worst.simplified_vs_feature});
  report.lines.push_back({c.name, "groupShapley = post-grouped = closed form", false, "",
                          std::max({worst.group_vs_post, worst.group_vs_closed_form,
                                    worst.post_vs_closed_form})});
  if (trials > 0) {
    const auto lem = check_lemma_identities(c.model, c.dist, c.partition,
                                            instances.row(0).transpose(), trials, rng);
    report.lines.push_back({c.name, "contribution identities (" + std::to_string(trials) +
                                        " trials)",
                            false, "", lem.max_deviation()});
  }
}

/// Executable identity suite for the separable-group results: benchmark models at
/// zero correlation under both groupings, plus random synthetic cases when
/// trials > 0.
inline VerifyReport run_verification(const VerifyOptions& opt) {
  VerifyReport report;
  std::vector<PaperModelId> models = opt.models;
  if (models.empty()) models.assign(std::begin(kAllPaperModels), std::end(kAllPaperModels));
  const GaussianModel independent(Vector::Zero(10), Matrix::Identity(10, 10));
  Rng instance_rng = make_rng(opt.seed, {stream::kInstances});
  const Matrix instances = independent.sample(std::max(opt.instances, 1), instance_rng);
  Rng trial_rng = make_rng(opt.seed, {stream::kLemmaTrials});

  for (auto id : models) {
    for (Grouping g : {Grouping::kA, Grouping::kB}) {
      SeparableCase c{std::string(model_name(id)) + "/" + grouping_letter(g), paper_model(id),
                      independent, paper_grouping(g)};
      const auto cond = check_conditions(c.model, c.dist, c.partition);
      if (!cond.holds()) {
        report.lines.push_back({c.name, "all", true,
                                "conditions not satisfied, check skipped (" + cond.describe() + ")",
                                0.0});
        continue;
      }
      verify_case(c, instances, opt.trials, trial_rng, report);
    }
  }

  const int synthetic = std::min(opt.trials, 10);
  for (int k = 0; k < synthetic; ++k) {
    Rng case_rng = make_rng(opt.seed, {stream::kLemmaTrials, 1000 + static_cast<std::uint64_t>(k)});
    const SeparableCase c = random_separable_case(case_rng);
    const Matrix xs = c.dist.sample(3, case_rng);
    verify_case(c, xs, opt.trials, case_rng, report);
  }
  return report;
}

}  // namespace gshap
