#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "gshap/errors.hpp"
#include "gshap/gaussian.hpp"
#include "gshap/partition.hpp"
#include "gshap/rng.hpp"

namespace gshap {

struct LinearTerm {
  int index;
  double coef;
};

struct CosineTerm {
  int index;
  double coef;
};

/// coef * x_i * x_j
struct ProductTerm {
  int i;
  int j;
  double coef;
};

/// coef * h(x_i, x_j) with h(a, b) = a*b + a*b^2 + b*a^2.
struct HTerm {
  int i;
  int j;
  double coef = 1.0;
};

inline double h_interaction(double a, double b) { return a * b + a * b * b + b * a * a; }

/// Closed-form predictive model over the term algebra
/// intercept + linear + cosine + product + h, reported as (raw - shift) / scale.
struct ModelSpec {
  int feature_count = 0;
  double intercept = 0.0;
  std::vector<LinearTerm> linear;
  std::vector<CosineTerm> cosine;
  std::vector<ProductTerm> product;
  std::vector<HTerm> hfun;
  double scale = 1.0;
  double shift = 0.0;

  template <typename Row>
  double raw(const Row& x) const {
    double out = intercept;
    for (const auto& t : linear) out += t.coef * x[t.index];
    for (const auto& t : cosine) out += t.coef * std::cos(x[t.index]);
    for (const auto& t : product) out += t.coef * x[t.i] * x[t.j];
    for (const auto& t : hfun) out += t.coef * h_interaction(x[t.i], x[t.j]);
    return out;
  }

  template <typename Row>
  double operator()(const Row& x) const {
    return (raw(x) - shift) / scale;
  }
};

inline void validate_model(const ModelSpec& m) {
  auto check_index = [&](int i) {
    if (i < 0 || i >= m.feature_count) {
      throw ValidationError("model term references feature " + std::to_string(i) +
                            " outside 0.." + std::to_string(m.feature_count - 1));
    }
  };
  auto check_pair = [&](int i, int j) {
    check_index(i);
    check_index(j);
    if (i == j) {
      throw ValidationError("interaction term pairs feature " + std::to_string(i) +
                            " with itself");
    }
  };
  if (m.feature_count < 1 || m.feature_count > kMaxPlayers) {
    throw ValidationError("model feature count must lie in 1..63");
  }
  for (const auto& t : m.linear) check_index(t.index);
  for (const auto& t : m.cosine) check_index(t.index);
  for (const auto& t : m.product) check_pair(t.i, t.j);
  for (const auto& t : m.hfun) check_pair(t.i, t.j);
  if (!(m.scale > 0.0) || !std::isfinite(m.scale)) {
    throw ValidationError("model scale must be positive and finite");
  }
  if (!std::isfinite(m.shift) || !std::isfinite(m.intercept)) {
    throw ValidationError("model shift and intercept must be finite");
  }
}

/// Row-wise evaluation of an n x M matrix.
inline Vector evaluate(const ModelSpec& model, const Matrix& x) {
  if (x.cols() != model.feature_count) {
    throw ValidationError("input has " + std::to_string(x.cols()) +
                          " columns, model expects " +
                          std::to_string(model.feature_count));
  }
  Vector out(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) out(r) = model(x.row(r));
  return out;
}

inline double evaluate_one(const ModelSpec& model, const Vector& x) {
  if (x.size() != model.feature_count) {
    throw ValidationError("instance has " + std::to_string(x.size()) +
                          " features, model expects " +
                          std::to_string(model.feature_count));
  }
  return model(x);
}

/// Every coefficient (including the intercept and shift) multiplied by c.
inline ModelSpec scaled(ModelSpec m, double c) {
  m.intercept *= c;
  m.shift *= c;
  for (auto& t : m.linear) t.coef *= c;
  for (auto& t : m.cosine) t.coef *= c;
  for (auto& t : m.product) t.coef *= c;
  for (auto& t : m.hfun) t.coef *= c;
  return m;
}

// ---------------------------------------------------------------------------
// Simulation-study models (10 features).

enum class PaperModelId { kLm1, kLm2, kLm3, kGam1, kGam2, kGam3 };

inline constexpr PaperModelId kAllPaperModels[] = {
    PaperModelId::kLm1,  PaperModelId::kLm2,  PaperModelId::kLm3,
    PaperModelId::kGam1, PaperModelId::kGam2, PaperModelId::kGam3};

inline std::string_view model_name(PaperModelId id) {
  switch (id) {
    case PaperModelId::kLm1: return "lm1";
    case PaperModelId::kLm2: return "lm2";
    case PaperModelId::kLm3: return "lm3";
    case PaperModelId::kGam1: return "gam1";
    case PaperModelId::kGam2: return "gam2";
    case PaperModelId::kGam3: return "gam3";
  }
  return "?";
}

inline PaperModelId parse_model_id(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (auto id : kAllPaperModels) {
    if (model_name(id) == lower) return id;
  }
  throw ValidationError("unknown model '" + std::string(name) +
                        "' (expected lm1, lm2, lm3, gam1, gam2 or gam3)");
}

namespace paper {
inline constexpr int kFeatures = 10;
inline constexpr double kIntercept = -0.6;
// beta_1..beta_10; beta_0 is kIntercept.
inline constexpr double kBeta[] = {0.2, -0.8, 1.6, 0.3, -0.8, 0.5, 0.7, 0.6, -0.3, 1.5};
inline constexpr double kGamma[] = {0.4, -0.6, -2.2, 1.1, 0.0};
inline constexpr double kDelta[] = {0.1, 0.9};
// 0-based feature pairs.
inline constexpr int kWithinPairs[5][2] = {{0, 1}, {2, 3}, {4, 5}, {6, 7}, {8, 9}};
inline constexpr int kBetweenPairs[7][2] = {{0, 4}, {0, 6}, {0, 8}, {2, 4},
                                            {2, 6}, {2, 8}, {4, 8}};
}  // namespace paper

/// Unstandardized simulation-study model.
inline ModelSpec paper_model(PaperModelId id) {
  using namespace paper;
  ModelSpec m;
  m.feature_count = kFeatures;
  m.intercept = kIntercept;
  const bool lm = id == PaperModelId::kLm1 || id == PaperModelId::kLm2 ||
                  id == PaperModelId::kLm3;
  for (int i = 0; i < kFeatures; ++i) {
    if (lm) {
      m.linear.push_back({i, kBeta[i]});
    } else {
      m.cosine.push_back({i, 1.0});
    }
  }
  switch (id) {
    case PaperModelId::kLm2:
      for (int k = 0; k < 5; ++k) {
        m.product.push_back({kWithinPairs[k][0], kWithinPairs[k][1], kGamma[k]});
      }
      break;
    case PaperModelId::kLm3:
      for (int k = 0; k < 7; ++k) {
        const double c = k < 5 ? kGamma[k] : kDelta[k - 5];
        m.product.push_back({kBetweenPairs[k][0], kBetweenPairs[k][1], c});
      }
      break;
    case PaperModelId::kGam2:
      for (const auto& p : kWithinPairs) m.hfun.push_back({p[0], p[1], 1.0});
      break;
    case PaperModelId::kGam3:
      for (const auto& p : kBetweenPairs) m.hfun.push_back({p[0], p[1], 1.0});
      break;
    default:
      break;
  }
  return m;
}

inline constexpr Eigen::Index kDefaultStandardizeSamples = 100000;

/// Sets scale to the empirical standard deviation of the raw model over
/// `n_std` draws from `dist`; shift is reset to 0.
inline ModelSpec standardize(ModelSpec model, const GaussianModel& dist, Rng& rng,
                             Eigen::Index n_std = kDefaultStandardizeSamples) {
  if (n_std < 10000) {
    throw DomainError("standardization needs at least 10^4 draws, got " +
                      std::to_string(n_std));
  }
  if (dist.dimension() != model.feature_count) {
    throw ValidationError("model and distribution dimensions differ");
  }
  const Matrix x = dist.sample(n_std, rng);
  double mean = 0.0;
  Vector raw(n_std);
  for (Eigen::Index r = 0; r < n_std; ++r) {
    raw(r) = model.raw(x.row(r));
    mean += raw(r);
  }
  mean /= static_cast<double>(n_std);
  const double var =
      (raw.array() - mean).square().sum() / static_cast<double>(n_std - 1);
  const double sd = std::sqrt(var);
  if (!(sd >= 1e-12)) {
    throw NumericalError("model is degenerate under the distribution (SD " +
                         std::to_string(sd) + ")");
  }
  model.scale = sd;
  model.shift = 0.0;
  return model;
}

// ---------------------------------------------------------------------------
// Group decomposition

/// An interaction whose two features sit in different groups.
struct CrossGroupTerm {
  std::string kind;  // "product" or "hfun"
  int i;
  int j;
};

struct NotSeparable {
  std::vector<CrossGroupTerm> offending;
};

/// Per-group sub-models, in partition order, summing to the full model.
struct GroupDecomposition {
  std::vector<ModelSpec> parts;
};

/// Splits the model into per-group parts when every term lives inside one
/// group. The intercept and shift go to the first group's part; every part
/// keeps the full model's scale.
inline std::variant<GroupDecomposition, NotSeparable> decompose_by_groups(
    const ModelSpec& model, const FeaturePartition& partition) {
  if (partition.feature_count() != model.feature_count) {
    throw ValidationError("model and partition feature counts differ");
  }
  NotSeparable bad;
  for (const auto& t : model.product) {
    if (partition.group_of(t.i) != partition.group_of(t.j)) {
      bad.offending.push_back({"product", t.i, t.j});
    }
  }
  for (const auto& t : model.hfun) {
    if (partition.group_of(t.i) != partition.group_of(t.j)) {
      bad.offending.push_back({"hfun", t.i, t.j});
    }
  }
  if (!bad.offending.empty()) return bad;

  GroupDecomposition out;
  out.parts.resize(static_cast<std::size_t>(partition.group_count()));
  for (auto& p : out.parts) {
    p.feature_count = model.feature_count;
    p.scale = model.scale;
  }
  out.parts.front().intercept = model.intercept;
  out.parts.front().shift = model.shift;
  auto part_of = [&](int feature) -> ModelSpec& {
    return out.parts[static_cast<std::size_t>(partition.group_of(feature))];
  };
  for (const auto& t : model.linear) part_of(t.index).linear.push_back(t);
  for (const auto& t : model.cosine) part_of(t.index).cosine.push_back(t);
  for (const auto& t : model.product) part_of(t.i).product.push_back(t);
  for (const auto& t : model.hfun) part_of(t.i).hfun.push_back(t);
  return out;
}

// ---------------------------------------------------------------------------
// JSON

/// {"intercept", "linear": [[i,c]], "cosine": [[i,c]], "product": [[i,j,c]],
///  "hfun": [[i,j]] or [[i,j,c]], "scale", "shift"} or {"paper_model": "lm2"}.
inline ModelSpec model_from_json(const nlohmann::json& doc, int feature_count) {
  if (!doc.is_object()) throw ValidationError("model spec must be a JSON object");
  ModelSpec m;
  try {
    if (doc.contains("paper_model")) {
      m = paper_model(parse_model_id(doc.at("paper_model").get<std::string>()));
      if (feature_count != m.feature_count) {
        throw ValidationError("benchmark models have 10 features, distribution has " +
                              std::to_string(feature_count));
      }
    } else {
      m.feature_count = feature_count;
      m.intercept = doc.value("intercept", 0.0);
      for (const auto& t : doc.value("linear", nlohmann::json::array())) {
        m.linear.push_back({t.at(0).get<int>(), t.at(1).get<double>()});
      }
      for (const auto& t : doc.value("cosine", nlohmann::json::array())) {
        m.cosine.push_back({t.at(0).get<int>(), t.at(1).get<double>()});
      }
      for (const auto& t : doc.value("product", nlohmann::json::array())) {
        m.product.push_back(
            {t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<double>()});
      }
      for (const auto& t : doc.value("hfun", nlohmann::json::array())) {
        m.hfun.push_back({t.at(0).get<int>(), t.at(1).get<int>(),
                          t.size() > 2 ? t.at(2).get<double>() : 1.0});
      }
    }
    if (doc.contains("scale")) m.scale = doc.at("scale").get<double>();
    if (doc.contains("shift")) m.shift = doc.at("shift").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed model spec: ") + e.what());
  }
  validate_model(m);
  return m;
}

inline nlohmann::json model_to_json(const ModelSpec& m) {
  nlohmann::json doc;
  doc["intercept"] = m.intercept;
  doc["linear"] = nlohmann::json::array();
  for (const auto& t : m.linear) doc["linear"].push_back({t.index, t.coef});
  doc["cosine"] = nlohmann::json::array();
  for (const auto& t : m.cosine) doc["cosine"].push_back({t.index, t.coef});
  doc["product"] = nlohmann::json::array();
  for (const auto& t : m.product) doc["product"].push_back({t.i, t.j, t.coef});
  doc["hfun"] = nlohmann::json::array();
  for (const auto& t : m.hfun) doc["hfun"].push_back({t.i, t.j, t.coef});
  doc["scale"] = m.scale;
  doc["shift"] = m.shift;
  return doc;
}

}  // namespace gshap
