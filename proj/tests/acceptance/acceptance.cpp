// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Monte Carlo criteria use the default study design (1000 samples, 100 instances).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "gshap/gshap.hpp"

namespace {

using namespace gshap;
using Clock = std::chrono::steady_clock;

constexpr double kExact = 1e-9;
constexpr double kSe = 4.0;

struct Outcome {
  int id;
  std::string name;
  bool pass;
  std::string detail;
};

std::vector<Outcome> g_outcomes;

void report(int id, std::string name, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS" : "FAIL") << "  [" << id << "] " << name << "  " << detail
            << std::endl;
  g_outcomes.push_back({id, std::move(name), pass, detail});
}

void info(const std::string& line) { std::cout << "      " << line << std::endl; }

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

const GaussianModel& independent10() {
  static const GaussianModel g(Vector::Zero(10), Matrix::Identity(10, 10));
  return g;
}

struct SeparableCase {
  PaperModelId id;
  Grouping grouping;
};

// Benchmark models whose terms never cross a group boundary of the grouping.
const std::vector<SeparableCase>& separable_cases() {
  static const std::vector<SeparableCase> cases = {
      {PaperModelId::kLm1, Grouping::kA}, {PaperModelId::kLm1, Grouping::kB},
      {PaperModelId::kLm2, Grouping::kB}, {PaperModelId::kGam1, Grouping::kA},
      {PaperModelId::kGam1, Grouping::kB}, {PaperModelId::kGam2, Grouping::kB}};
  return cases;
}

double median_of(const std::vector<BoxSummary>& s, const char* model, char g, double rho) {
  const auto* b = find_summary(s, model, g, rho);
  if (!b) throw ValidationError(std::string("missing summary for ") + model);
  return b->median;
}

double mean_of(const std::vector<BoxSummary>& s, char g, double rho) {
  double sum = 0.0;
  int n = 0;
  for (const auto& b : s) {
    if (b.grouping == g && b.rho == rho) {
      sum += b.mean;
      ++n;
    }
  }
  return n ? sum / n : 0.0;
}

ExperimentResult run(ExperimentConfig c, EstimatorKind est = EstimatorKind::kMonteCarlo) {
  c.estimator = est;
  c.threads = 1;
  return run_experiment(c);
}

// ---------------------------------------------------------------------------

void exact_baseline() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::size_t n = 0;
  for (Grouping g : {Grouping::kA, Grouping::kB}) {
    auto c = default_config(1, g);
    c.rho_grid = {0.0};
    c.models.clear();
    for (const auto& sc : separable_cases()) {
      if (sc.grouping == g) c.models.push_back(sc.id);
    }
    const auto res = run(c, EstimatorKind::kAnalytic);
    for (const auto& r : res.records) worst = std::max(worst, r.mad);
    n += res.records.size();
  }
  const double secs = seconds_since(t0);
  report(1, "exact baseline at zero correlation", worst < kExact && secs < 60.0,
         "max MAD " + fmt(worst) + " over " + std::to_string(n) + " instances, " +
             fmt(secs) + " s");
}

void simplified_formula() {
  const auto t0 = Clock::now();
  Rng rng = make_rng(11, {});
  const Matrix xs = independent10().sample(20, rng);
  double worst = 0.0;
  for (const auto& sc : separable_cases()) {
    const auto m = paper_model(sc.id);
    const auto p = paper_grouping(sc.grouping);
    for (Eigen::Index r = 0; r < xs.rows(); ++r) {
      const Vector x = xs.row(r).transpose();
      const auto full = feature_shapley(m, independent10(), x, AnalyticEstimator{});
      const auto simple = simplified_feature_shapley(m, independent10(), x, p);
      worst = std::max(worst, detail::max_abs_diff(full.phi, simple.phi));
    }
  }
  const double secs = seconds_since(t0);
  report(2, "simplified feature-wise formula", worst < kExact && secs < 120.0,
         "max deviation " + fmt(worst) + " over 20 instances x " +
             std::to_string(separable_cases().size()) + " cases, " + fmt(secs) + " s");
}

void contribution_identities() {
  Rng rng = make_rng(12, {});
  double worst = 0.0;
  bool empty_base = true;
  for (const auto& sc : separable_cases()) {
    const Vector x = independent10().sample(1, rng).row(0).transpose();
    const auto rep = check_lemma_identities(paper_model(sc.id), independent10(),
                                            paper_grouping(sc.grouping), x, 200, rng);
    worst = std::max(worst, rep.max_deviation());
    empty_base = empty_base && rep.covered_empty_base;
  }
  report(3, "contribution identities", worst < kExact && empty_base,
         "max deviation " + fmt(worst) + " over 200 trials x " +
             std::to_string(separable_cases().size()) + " cases");
}

void axioms() {
  // x2, x3 and group {2,3} never enter the model: null players under
  // independence. x0/x1 and groups {0,1}/{4,5} are exchangeable.
  ModelSpec m;
  m.feature_count = 6;
  m.intercept = 0.3;
  m.linear = {{0, 0.8}, {1, 0.8}, {4, 0.8}, {5, 0.8}};
  m.cosine = {{0, 0.4}, {1, 0.4}, {4, 0.4}, {5, 0.4}};
  m.product = {{0, 1, 1.2}, {4, 5, 1.2}};
  m.hfun = {{0, 4, 0.3}, {0, 5, 0.3}, {1, 4, 0.3}, {1, 5, 0.3}};
  const auto p = validate_partition({{0, 1}, {2, 3}, {4, 5}}, 6);
  const GaussianModel dist(Vector::Zero(6), Matrix::Identity(6, 6));
  Vector x(6);
  x << 0.9, 0.9, -1.3, 0.4, 0.9, 0.9;

  const Estimator analytic = AnalyticEstimator{};
  const Estimator mc = MonteCarloEstimator{1000, 21, 0};
  const double truth = evaluate_one(m, x) - contribution_analytic(m, dist, x, Coalition{});

  double exact_dev = 0.0;
  double worst_z = 0.0;
  for (const Estimator& est : {analytic, mc}) {
    const bool is_mc = std::holds_alternative<MonteCarloEstimator>(est);
    ContributionCache cache(m, dist, x, est);
    const auto f = feature_shapley(cache);
    const auto g = group_shapley(cache, p);
    // Deviation d with propagated bound b: exact needs |d| < 1e-9, Monte
    // Carlo needs |d| <= 4 b.
    auto check = [&](double d, double b) {
      if (is_mc) {
        worst_z = std::max(worst_z, std::abs(d) / std::max(b, 1e-300));
      } else {
        exact_dev = std::max(exact_dev, std::abs(d));
      }
    };
    const double base_se = cache.get(Coalition{}).standard_error;
    check(f.phi_sum() - truth, base_se);
    check(g.phi_sum() - truth, base_se);
    check(f.phi[2], f.error_bound[2]);
    check(f.phi[3], f.error_bound[3]);
    check(g.phi[1], g.error_bound[1]);
    check(f.phi[0] - f.phi[1], f.error_bound[0] + f.error_bound[1]);
    check(f.phi[4] - f.phi[5], f.error_bound[4] + f.error_bound[5]);
    check(g.phi[0] - g.phi[2], g.error_bound[0] + g.error_bound[2]);
  }
  report(4, "efficiency, null player, symmetry", exact_dev < kExact && worst_z <= kSe,
         "analytic max deviation " + fmt(exact_dev) + ", Monte Carlo worst |d|/bound " +
             fmt(worst_z));
}

void experiment_one() {
  const auto t0 = Clock::now();
  const auto a = summarize(run(default_config(1, Grouping::kA)).records);
  const double secs = seconds_since(t0);
  auto cb = default_config(1, Grouping::kB);
  cb.rho_grid = {0.7};
  const auto b = summarize(run(cb).records);

  bool ok = secs < 900.0;
  std::string detail;
  for (const char* m : {"lm1", "lm2", "lm3"}) {
    const double lo = median_of(a, m, 'A', 0.0), hi = median_of(a, m, 'A', 0.9);
    ok = ok && hi >= 10.0 * lo;
    detail += std::string(m) + " " + fmt(lo) + " -> " + fmt(hi) + " (x" + fmt(hi / lo) + "), ";
  }
  const double mean_a = mean_of(a, 'A', 0.7), mean_b = mean_of(b, 'B', 0.7);
  ok = ok && mean_a >= mean_b;
  report(5, "experiment 1: MAD grows with correlation",
         ok, "median rho 0 -> 0.9: " + detail + "mean at 0.7 A " + fmt(mean_a) + " vs B " +
                 fmt(mean_b) + ", grouping A grid " + fmt(secs) + " s");

  auto ca = default_config(1, Grouping::kA);
  ca.rho_grid = {0.0, 0.9};
  const auto exact = summarize(run(ca, EstimatorKind::kAnalytic).records);
  std::string line = "analytic medians rho 0 -> 0.9:";
  for (const char* m : {"lm1", "lm2", "lm3"}) {
    line += std::string(" ") + m + " " + fmt(median_of(exact, m, 'A', 0.0)) + " -> " +
            fmt(median_of(exact, m, 'A', 0.9));
  }
  info(line);
}

void experiment_two() {
  auto c = default_config(2, Grouping::kA);
  c.rho_grid = {0.0, 0.9};
  const auto s = summarize(run(c).records);
  const double g1 = median_of(s, "gam1", 'A', 0.0), g2 = median_of(s, "gam2", 'A', 0.0),
               g3 = median_of(s, "gam3", 'A', 0.0);
  const double g1h = median_of(s, "gam1", 'A', 0.9), g2h = median_of(s, "gam2", 'A', 0.9);
  const bool ok = g3 >= 10.0 * g1 && g3 >= 10.0 * g2 && g1h > g1 && g2h > g2;
  report(6, "experiment 2: GAM3 stands out at zero correlation", ok,
         "median rho 0: gam1 " + fmt(g1) + ", gam2 " + fmt(g2) + ", gam3 " + fmt(g3) +
             "; rho 0.9: gam1 " + fmt(g1h) + ", gam2 " + fmt(g2h));

  const auto exact = summarize(run(c, EstimatorKind::kAnalytic).records);
  info("analytic medians rho 0: gam1 " + fmt(median_of(exact, "gam1", 'A', 0.0)) + ", gam2 " +
       fmt(median_of(exact, "gam2", 'A', 0.0)) + ", gam3 " +
       fmt(median_of(exact, "gam3", 'A', 0.0)));
}

void experiment_three() {
  auto c = default_config(3, Grouping::kA);
  c.rho_grid = {0.0, 0.7};
  const auto s = summarize(run(c).records);
  bool ok = true;
  std::string detail;
  for (const char* m : {"lm2", "gam2"}) {
    const double lo = median_of(s, m, 'A', 0.0), hi = median_of(s, m, 'A', 0.7);
    ok = ok && lo <= 0.1 * hi;
    detail += std::string(m) + " " + fmt(lo) + " vs " + fmt(hi) + " (x" + fmt(hi / lo) + "), ";
  }

  auto bad = default_config(3, Grouping::kA);
  bad.rho_grid = {0.95};
  bad.n_test = 2;
  const auto res = run(bad);
  const bool reported = res.records.empty() && res.repairs.empty() &&
                        res.failures.size() == bad.models.size();
  ok = ok && reported;
  report(7, "experiment 3: between-group correlation drives MAD", ok,
         "median between 0 vs 0.7: " + detail + "indefinite point " +
             (reported ? "reported" : "not reported") +
             (res.failures.empty() ? "" : " (" + res.failures[0].message + ")"));

  const auto exact = summarize(run(c, EstimatorKind::kAnalytic).records);
  info("analytic medians between 0 vs 0.7: lm2 " + fmt(median_of(exact, "lm2", 'A', 0.0)) +
       " vs " + fmt(median_of(exact, "lm2", 'A', 0.7)) + ", gam2 " +
       fmt(median_of(exact, "gam2", 'A', 0.0)) + " vs " +
       fmt(median_of(exact, "gam2", 'A', 0.7)));
}

void complexity() {
  const double ratio_50_5 = std::ldexp(1.0, 50 - 5);
  std::uint64_t calls_feature = 0, calls_group = 0;
  auto additive = [](Coalition s) { return static_cast<double>(s.size()); };
  const auto f = solve_game(20, [&](Coalition s) {
    ++calls_feature;
    return additive(s);
  });
  const auto g = solve_game(4, [&](Coalition s) {
    ++calls_group;
    return additive(s);
  });
  const bool ok = ratio_50_5 > 1e13 && calls_feature == (1ULL << 20) &&
                  calls_group == (1ULL << 4) && f.terms_per_player == (1ULL << 19) &&
                  g.terms_per_player == (1ULL << 3) && std::abs(f.phi[7] - 1.0) < kExact;
  report(8, "coalition counts", ok,
         "2^(M-G) at M=50, G=5: " + fmt(ratio_50_5) + "; M=20 vs G=4: " +
             std::to_string(calls_feature) + " vs " + std::to_string(calls_group) +
             " coalitions, " + std::to_string(f.terms_per_player) + " vs " +
             std::to_string(g.terms_per_player) + " terms per player");
}

void monte_carlo_agreement() {
  Rng rng = make_rng(31, {});
  std::uniform_int_distribution<int> pick_model(0, 5), pick_group(0, 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::uint64_t> pick_mask(0, (1ULL << 10) - 2);
  double worst_z = 0.0;
  int done = 0;
  while (done < 50) {
    const auto id = kAllPaperModels[pick_model(rng)];
    const auto p = paper_grouping(pick_group(rng) ? Grouping::kB : Grouping::kA);
    const double within = 0.9 * unit(rng), between = within * unit(rng);
    const auto dist = build_covariance({within, between, 1.0, p});
    const Vector x = dist.sample(1, rng).row(0).transpose();
    const Coalition s{pick_mask(rng)};
    const auto m = paper_model(id);
    Rng draw = make_rng(32, {static_cast<std::uint64_t>(done)});
    const auto e = contribution_mc(m, dist, x, s, 100000, draw);
    const double truth = contribution_analytic(m, dist, x, s);
    worst_z = std::max(worst_z, std::abs(e.value - truth) / e.standard_error);
    ++done;
  }
  report(9, "Monte Carlo agrees with analytic contributions", worst_z <= kSe,
         "worst |MC - analytic| / SE " + fmt(worst_z) + " over 50 triples, n = 1e5");
}

void determinism() {
  auto c = default_config(2, Grouping::kB);
  c.rho_grid = {0.3, 0.7};
  c.n_test = 12;
  c.mc_samples = 300;
  c.seed = 2024;
  c.threads = 1;
  const auto serial = records_csv(run_experiment(c).records);
  c.threads = 3;
  const auto threaded = records_csv(run_experiment(c).records);
  report(10, "records identical across thread counts", serial == threaded,
         std::to_string(serial.size()) + " bytes, 1 vs 3 threads");
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  try {
    exact_baseline();
    simplified_formula();
    contribution_identities();
    axioms();
    experiment_one();
    experiment_two();
    experiment_three();
    complexity();
    monte_carlo_agreement();
    determinism();
  } catch (const std::exception& e) {
    std::cout << "FAIL  aborted: " << e.what() << std::endl;
    return 1;
  }
  int failed = 0;
  for (const auto& o : g_outcomes) failed += o.pass ? 0 : 1;
  std::cout << (g_outcomes.size() - failed) << "/" << g_outcomes.size() << " criteria passed in "
            << fmt(seconds_since(t0)) << " s" << std::endl;
  return failed == 0 ? 0 : 1;
}
