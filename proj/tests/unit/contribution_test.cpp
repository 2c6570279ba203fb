#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gshap/contribution.hpp"
#include "gshap/experiment.hpp"

namespace gshap {
namespace {

const GaussianModel& standard10() {
  static const GaussianModel g(Vector::Zero(10), Matrix::Identity(10, 10));
  return g;
}

TEST(Analytic, EmptySetLm1IsIntercept) {
  EXPECT_NEAR(contribution_analytic(paper_model(PaperModelId::kLm1), standard10(),
                                    Vector::Ones(10), Coalition{}),
              -0.6, 1e-15);
}

TEST(Analytic, EmptySetGam1) {
  EXPECT_NEAR(contribution_analytic(paper_model(PaperModelId::kGam1), standard10(),
                                    Vector::Ones(10), Coalition{}),
              -0.6 + 10.0 * std::exp(-0.5), 1e-12);
}

TEST(Analytic, GrandCoalitionIsPrediction) {
  const Vector x = Vector::LinSpaced(10, -1.5, 2.0);
  const auto g = build_covariance({0.4, 0.2, 1.0, paper_grouping(Grouping::kA)});
  for (auto id : kAllPaperModels) {
    const auto m = paper_model(id);
    EXPECT_EQ(contribution_analytic(m, g, x, Coalition::grand(10)), evaluate_one(m, x));
  }
}

TEST(Analytic, LinearConditionalExpectation) {
  // Independent features: conditioned terms at x*, the rest at the mean.
  Vector x = Vector::Zero(10);
  x(0) = 1.0;
  EXPECT_NEAR(contribution_analytic(paper_model(PaperModelId::kLm1), standard10(), x,
                                    Coalition::single(0)),
              -0.6 + 0.2, 1e-15);
}

TEST(Analytic, HTermUnderCorrelation) {
  // E[h(a, b) | a = 2] with corr 0.5: b | a ~ N(1, 0.75)
  // = 2 E[b] + 2 E[b^2] + 4 E[b] = 2 + 2 (1 + 0.75) + 4
  ModelSpec m;
  m.feature_count = 2;
  m.hfun.push_back({0, 1});
  Matrix c(2, 2);
  c << 1.0, 0.5, 0.5, 1.0;
  const GaussianModel g(Vector::Zero(2), c);
  Vector x(2);
  x << 2.0, 0.0;
  EXPECT_NEAR(contribution_analytic(m, g, x, Coalition::single(0)), 2 + 2 * 1.75 + 4, 1e-12);
  // Unconditional: E[ab] + E[ab^2] + E[ba^2] = 0.5 + 0 + 0
  EXPECT_NEAR(contribution_analytic(m, g, x, Coalition{}), 0.5, 1e-12);
}

TEST(MonteCarlo, GrandCoalitionIsExact) {
  const auto m = paper_model(PaperModelId::kGam3);
  const Vector x = Vector::LinSpaced(10, -1.0, 1.0);
  Rng rng = make_rng(1, {});
  const auto e = contribution_mc(m, standard10(), x, Coalition::grand(10), 1000, rng);
  EXPECT_EQ(e.value, evaluate_one(m, x));
  EXPECT_EQ(e.standard_error, 0.0);
  EXPECT_EQ(e.model_evaluations, 1u);
}

TEST(MonteCarlo, ConstantModel) {
  ModelSpec m;
  m.feature_count = 10;
  m.intercept = 2.5;
  Rng rng = make_rng(2, {});
  for (std::uint64_t s : {0u, 1u, 0b1011u, 0b1111111110u}) {
    const auto e = contribution_mc(m, standard10(), Vector::Ones(10), Coalition{s}, 200, rng);
    EXPECT_DOUBLE_EQ(e.value, 2.5);
    EXPECT_EQ(e.standard_error, 0.0);
  }
}

TEST(MonteCarlo, Lm1SingleFeature) {
  Vector x = Vector::Zero(10);
  x(0) = 1.0;
  Rng rng = make_rng(3, {});
  const auto e = contribution_mc(paper_model(PaperModelId::kLm1), standard10(), x,
                                 Coalition::single(0), 1000, rng);
  EXPECT_LT(std::abs(e.value - (-0.6 + 0.2)), 4.0 * e.standard_error);
  EXPECT_GT(e.standard_error, 0.0);
  EXPECT_THROW(contribution_mc(paper_model(PaperModelId::kLm1), standard10(), x,
                               Coalition::single(0), 0, rng),
               DomainError);
}

TEST(MonteCarlo, AgreesWithAnalyticOnRandomTriples) {
  std::mt19937_64 pick(17);
  int within = 0;
  for (int t = 0; t < 20; ++t) {
    const auto id = kAllPaperModels[pick() % 6];
    const double rho = (pick() % 10) / 10.0;
    const auto g = build_covariance({rho, rho / 2, 1.0, paper_grouping(Grouping::kA)});
    const Coalition s{pick() & 0x3FF};
    Rng rng = make_rng(5, {static_cast<std::uint64_t>(t)});
    const Vector x = g.sample(1, rng).row(0).transpose();
    const auto m = paper_model(id);
    const auto mc = contribution_mc(m, g, x, s, 20000, rng);
    const double exact = contribution_analytic(m, g, x, s);
    if (std::abs(mc.value - exact) <= 4.0 * mc.standard_error + 1e-12) ++within;
  }
  EXPECT_EQ(within, 20);
}

TEST(Cache, EachCoalitionOnce) {
  const auto m = paper_model(PaperModelId::kLm2);
  ContributionCache cache(m, standard10(), Vector::Ones(10),
                          MonteCarloEstimator{100, 7, 0});
  const auto& a = cache.get(Coalition{0b101});
  const double first = a.value;
  cache.get(Coalition{0b101});
  cache.get(Coalition{0b101});
  EXPECT_EQ(cache.size(), 1u);
  EXPECT_EQ(cache.model_evaluations(), 100u);
  EXPECT_EQ(cache.value(Coalition{0b101}), first);
  cache.get(Coalition::grand(10));
  EXPECT_EQ(cache.model_evaluations(), 101u);
}

TEST(Cache, PerCoalitionStreamsAreReproducible) {
  const auto m = paper_model(PaperModelId::kGam2);
  ContributionCache a(m, standard10(), Vector::Ones(10), MonteCarloEstimator{50, 9, 3});
  ContributionCache b(m, standard10(), Vector::Ones(10), MonteCarloEstimator{50, 9, 3});
  // Different query order, same values.
  a.get(Coalition{1});
  const double va = a.value(Coalition{6});
  const double vb = b.value(Coalition{6});
  EXPECT_EQ(va, vb);
}

TEST(Cache, AnalyticEmptyValueIndependentOfInstance) {
  const auto m = paper_model(PaperModelId::kGam3);
  const auto g = build_covariance({0.3, 0.3, 1.0, paper_grouping(Grouping::kB)});
  ContributionCache a(m, g, Vector::Ones(10), AnalyticEstimator{});
  ContributionCache b(m, g, Vector::LinSpaced(10, -3.0, 3.0), AnalyticEstimator{});
  EXPECT_EQ(a.value(Coalition{}), b.value(Coalition{}));
}

TEST(Cache, DimensionMismatch) {
  const auto m = paper_model(PaperModelId::kLm1);
  EXPECT_THROW(ContributionCache(m, standard10(), Vector::Ones(9), AnalyticEstimator{}),
               ValidationError);
}

}  // namespace
}  // namespace gshap
