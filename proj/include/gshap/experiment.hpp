#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gshap/contribution.hpp"
#include "gshap/csv.hpp"
#include "gshap/gaussian.hpp"
#include "gshap/model.hpp"
#include "gshap/parallel.hpp"
#include "gshap/partition.hpp"
#include "gshap/rng.hpp"
#include "gshap/shapley.hpp"

namespace gshap {

enum class Grouping { kA, kB };

inline char grouping_letter(Grouping g) { return g == Grouping::kA ? 'A' : 'B'; }

inline Grouping parse_grouping(std::string_view s) {
  if (s == "A" || s == "a") return Grouping::kA;
  if (s == "B" || s == "b") return Grouping::kB;
  throw ValidationError("grouping must be A or B, got '" + std::string(s) + "'");
}

/// A: {1-4}, {5-8}, {9,10}.  B: five consecutive pairs.  (0-based internally.)
inline FeaturePartition paper_grouping(Grouping g) {
  if (g == Grouping::kA) {
    return validate_partition({{0, 1, 2, 3}, {4, 5, 6, 7}, {8, 9}}, 10);
  }
  return validate_partition({{0, 1}, {2, 3}, {4, 5}, {6, 7}, {8, 9}}, 10);
}

enum class EstimatorKind { kMonteCarlo, kAnalytic };

inline std::string_view estimator_kind_name(EstimatorKind k) {
  return k == EstimatorKind::kAnalytic ? "analytic" : "mc";
}

inline EstimatorKind parse_estimator_kind(std::string_view s) {
  if (s == "mc" || s == "monte_carlo") return EstimatorKind::kMonteCarlo;
  if (s == "analytic") return EstimatorKind::kAnalytic;
  throw ValidationError("estimator must be mc or analytic, got '" + std::string(s) + "'");
}

struct ExperimentConfig {
  int experiment = 1;
  std::vector<PaperModelId> models;
  Grouping grouping = Grouping::kA;
  std::vector<double> rho_grid{0.0, 0.1, 0.3, 0.7, 0.9};
  /// Fixed within-group correlation; when unset it follows rho.
  std::optional<double> within_rho;
  int n_test = 100;
  Eigen::Index mc_samples = 1000;
  EstimatorKind estimator = EstimatorKind::kMonteCarlo;
  std::uint64_t seed = 0;
  Eigen::Index n_std = kDefaultStandardizeSamples;
  RepairPolicy repair = RepairPolicy::kReject;
  int threads = 1;
};

/// Default design of experiment 1 (lm models), 2 (GAMs) or 3 (lm2 and GAM2
/// with within-group correlation fixed at 0.87).
inline ExperimentConfig default_config(int experiment, Grouping grouping) {
  ExperimentConfig c;
  c.experiment = experiment;
  c.grouping = grouping;
  switch (experiment) {
    case 1:
      c.models = {PaperModelId::kLm1, PaperModelId::kLm2, PaperModelId::kLm3};
      break;
    case 2:
      c.models = {PaperModelId::kGam1, PaperModelId::kGam2, PaperModelId::kGam3};
      break;
    case 3:
      c.models = {PaperModelId::kLm2, PaperModelId::kGam2};
      c.within_rho = 0.87;
      break;
    default:
      throw ValidationError("experiment must be 1, 2 or 3");
  }
  return c;
}

struct MadRecord {
  int experiment = 0;
  std::string model;
  char grouping = 'A';
  double rho = 0.0;
  double within_rho = 0.0;
  int instance = 0;
  double mad = 0.0;
};

struct GridFailure {
  std::string model;
  double rho = 0.0;
  double within_rho = 0.0;
  std::string message;
};

struct RepairEvent {
  double rho = 0.0;
  double within_rho = 0.0;
  double frobenius_distance = 0.0;
};

struct ExperimentResult {
  std::vector<MadRecord> records;
  std::vector<GridFailure> failures;
  std::vector<RepairEvent> repairs;
};

/// Mean absolute difference between two group-value vectors.
inline double mad(const std::vector<double>& pre, const std::vector<double>& post) {
  if (pre.size() != post.size() || pre.empty()) {
    throw ValidationError("MAD needs two non-empty vectors of equal length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < pre.size(); ++i) sum += std::abs(pre[i] - post[i]);
  return sum / static_cast<double>(pre.size());
}

namespace detail {
inline std::uint64_t bits(double v) { return std::bit_cast<std::uint64_t>(v); }

inline void validate_config(const ExperimentConfig& c) {
  if (c.experiment < 1 || c.experiment > 3) {
    throw ValidationError("experiment must be 1, 2 or 3");
  }
  if (c.models.empty()) throw ValidationError("no models selected");
  if (c.rho_grid.empty()) throw ValidationError("empty correlation grid");
  for (double r : c.rho_grid) {
    if (!(r >= -1.0 && r <= 1.0)) throw ValidationError("rho outside [-1, 1]");
  }
  if (c.within_rho && !(*c.within_rho >= -1.0 && *c.within_rho <= 1.0)) {
    throw ValidationError("within_rho outside [-1, 1]");
  }
  if (c.n_test < 1) throw ValidationError("n_test must be positive");
  if (c.mc_samples < 1) throw ValidationError("mc_samples must be positive");
}
}  // namespace detail

/// Runs one experiment: for every (rho, model) grid point, draws n_test
/// instances, standardizes the model under that covariance, and records the
/// MAD between groupShapley and post-grouped Shapley for every instance.
/// Output order is (rho, model, instance) regardless of thread count.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  detail::validate_config(cfg);
  const FeaturePartition partition = paper_grouping(cfg.grouping);
  const std::uint64_t gkey = static_cast<std::uint64_t>(grouping_letter(cfg.grouping));
  ExperimentResult result;

  for (double rho : cfg.rho_grid) {
    const double within = cfg.within_rho.value_or(rho);
    std::optional<GaussianModel> dist;
    try {
      dist.emplace(build_covariance({within, rho, 1.0, partition}, cfg.repair));
      if (dist->repair_distance()) {
        result.repairs.push_back({rho, within, *dist->repair_distance()});
      }
    } catch (const Error& e) {
      for (auto id : cfg.models) {
        result.failures.push_back({std::string(model_name(id)), rho, within, e.what()});
      }
      continue;
    }

    Rng instance_rng = make_rng(
        cfg.seed, {stream::kInstances, gkey, detail::bits(within), detail::bits(rho)});
    const Matrix instances = dist->sample(cfg.n_test, instance_rng);

    for (auto id : cfg.models) {
      const auto model_key = static_cast<std::uint64_t>(id);
      try {
        Rng std_rng = make_rng(cfg.seed, {stream::kStandardize, model_key, gkey,
                                          detail::bits(within), detail::bits(rho)});
        const ModelSpec model = standardize(paper_model(id), *dist, std_rng, cfg.n_std);
        std::vector<MadRecord> rows(static_cast<std::size_t>(cfg.n_test));
        parallel_for(rows.size(), cfg.threads, [&](std::size_t i) {
          Estimator est = AnalyticEstimator{};
          if (cfg.estimator == EstimatorKind::kMonteCarlo) {
            est = MonteCarloEstimator{
                cfg.mc_samples, cfg.seed,
                derive_seed(model_key, {gkey, detail::bits(within), detail::bits(rho),
                                        static_cast<std::uint64_t>(i)})};
          }
          ContributionCache cache(model, *dist, instances.row(static_cast<Eigen::Index>(i)).transpose(),
                                  est);
          const auto pre = group_shapley(cache, partition);
          const auto post = post_grouped_shapley(cache, partition);
          rows[i] = {cfg.experiment, std::string(model_name(id)), grouping_letter(cfg.grouping),
                     rho, within, static_cast<int>(i), mad(pre.phi, post.phi)};
        });
        result.records.insert(result.records.end(), rows.begin(), rows.end());
      } catch (const Error& e) {
        result.failures.push_back({std::string(model_name(id)), rho, within, e.what()});
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Summaries

struct BoxSummary {
  int experiment = 0;
  std::string model;
  char grouping = 'A';
  double rho = 0.0;
  double within_rho = 0.0;
  std::size_t n = 0;
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double whisker_low = 0.0;
  double whisker_high = 0.0;
};

/// Linear-interpolation quantile of sorted data (type 7).
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw ValidationError("quantile of empty data");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline BoxSummary box_statistics(std::vector<double> values) {
  if (values.empty()) throw ValidationError("box statistics of empty data");
  std::sort(values.begin(), values.end());
  BoxSummary s;
  s.n = values.size();
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
  s.median = quantile_sorted(values, 0.5);
  s.q1 = quantile_sorted(values, 0.25);
  s.q3 = quantile_sorted(values, 0.75);
  // Tukey: most extreme points within 1.5 IQR of the box.
  const double iqr = s.q3 - s.q1;
  const double lo_fence = s.q1 - 1.5 * iqr, hi_fence = s.q3 + 1.5 * iqr;
  s.whisker_low = *std::find_if(values.begin(), values.end(),
                                [&](double v) { return v >= lo_fence; });
  s.whisker_high = *std::find_if(values.rbegin(), values.rend(),
                                 [&](double v) { return v <= hi_fence; });
  return s;
}

/// One summary per (experiment, model, grouping, rho, within_rho), in order
/// of first appearance.
inline std::vector<BoxSummary> summarize(const std::vector<MadRecord>& records) {
  struct Key {
    int experiment;
    std::string model;
    char grouping;
    double rho, within;
    bool operator==(const Key&) const = default;
  };
  std::vector<Key> keys;
  std::vector<std::vector<double>> values;
  for (const auto& r : records) {
    Key k{r.experiment, r.model, r.grouping, r.rho, r.within_rho};
    auto it = std::find(keys.begin(), keys.end(), k);
    if (it == keys.end()) {
      keys.push_back(k);
      values.emplace_back();
      it = keys.end() - 1;
    }
    values[static_cast<std::size_t>(it - keys.begin())].push_back(r.mad);
  }
  std::vector<BoxSummary> out;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    BoxSummary s = box_statistics(values[i]);
    s.experiment = keys[i].experiment;
    s.model = keys[i].model;
    s.grouping = keys[i].grouping;
    s.rho = keys[i].rho;
    s.within_rho = keys[i].within;
    out.push_back(std::move(s));
  }
  return out;
}

inline const BoxSummary* find_summary(const std::vector<BoxSummary>& s,
                                      std::string_view model, char grouping, double rho) {
  for (const auto& b : s) {
    if (b.model == model && b.grouping == grouping && b.rho == rho) return &b;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr std::string_view kRecordHeader =
    "experiment,model,grouping,rho,instance,mad,within_rho";
inline constexpr std::string_view kSummaryHeader =
    "experiment,model,grouping,rho,within_rho,n,mean,median,q1,q3,whisker_low,whisker_high";

inline std::string records_csv(const std::vector<MadRecord>& records) {
  using csv::format_double;
  std::ostringstream out;
  out << kRecordHeader << '\n';
  for (const auto& r : records) {
    out << r.experiment << ',' << r.model << ',' << r.grouping << ','
        << format_double(r.rho) << ',' << r.instance << ',' << format_double(r.mad) << ','
        << format_double(r.within_rho) << '\n';
  }
  return out.str();
}

inline std::string summary_csv(const std::vector<BoxSummary>& summaries) {
  using csv::format_double;
  std::ostringstream out;
  out << kSummaryHeader << '\n';
  for (const auto& s : summaries) {
    out << s.experiment << ',' << s.model << ',' << s.grouping << ','
        << format_double(s.rho) << ',' << format_double(s.within_rho) << ',' << s.n << ','
        << format_double(s.mean) << ',' << format_double(s.median) << ','
        << format_double(s.q1) << ',' << format_double(s.q3) << ','
        << format_double(s.whisker_low) << ',' << format_double(s.whisker_high) << '\n';
  }
  return out.str();
}

inline std::vector<BoxSummary> summaries_from_csv(const csv::Table& t) {
  std::vector<BoxSummary> out;
  const auto col = [&](std::string_view name) { return t.column(name); };
  const std::size_t c_exp = col("experiment"), c_model = col("model"),
                    c_group = col("grouping"), c_rho = col("rho"),
                    c_within = col("within_rho"), c_n = col("n"), c_mean = col("mean"),
                    c_median = col("median"), c_q1 = col("q1"), c_q3 = col("q3"),
                    c_lo = col("whisker_low"), c_hi = col("whisker_high");
  auto num = [](const std::string& s) {
    double v = 0.0;
    if (!csv::parse_double(s, v)) throw ValidationError("bad number '" + s + "' in summary CSV");
    return v;
  };
  for (const auto& row : t.rows) {
    if (row.size() != t.header.size()) throw ValidationError("ragged summary CSV row");
    BoxSummary s;
    s.experiment = static_cast<int>(num(row[c_exp]));
    s.model = row[c_model];
    s.grouping = row[c_group].empty() ? '?' : row[c_group][0];
    s.rho = num(row[c_rho]);
    s.within_rho = num(row[c_within]);
    s.n = static_cast<std::size_t>(num(row[c_n]));
    s.mean = num(row[c_mean]);
    s.median = num(row[c_median]);
    s.q1 = num(row[c_q1]);
    s.q3 = num(row[c_q3]);
    s.whisker_low = num(row[c_lo]);
    s.whisker_high = num(row[c_hi]);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace gshap
