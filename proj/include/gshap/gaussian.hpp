#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "gshap/coalition.hpp"
#include "gshap/errors.hpp"
#include "gshap/partition.hpp"
#include "gshap/rng.hpp"

namespace gshap {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kPsdRelativeTolerance = 1e-10;
inline constexpr double kPdRelativeTolerance = 1e-10;
inline constexpr double kCholeskyPivotFloor = 1e-12;
inline constexpr double kRepairEigenFloor = 1e-8;

/// Covariance rejected as not positive definite.
class NotPositiveDefiniteError : public NumericalError {
 public:
  NotPositiveDefiniteError(const std::string& what, double min_eigenvalue)
      : NumericalError(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

struct SpectrumSummary {
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
};

inline SpectrumSummary spectrum(const Matrix& sym) {
  if (sym.rows() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

/// First and second moments of a Gaussian, embedded in the full feature space.
/// Coordinates fixed by conditioning appear with their given value and zero
/// variance, so one set of formulas serves marginal and conditional laws.
class Moments {
 public:
  Moments(Vector mean, Matrix covariance)
      : mean_(std::move(mean)), cov_(std::move(covariance)) {}

  double mean(int i) const { return mean_(i); }
  double cov(int i, int j) const { return cov_(i, j); }

  /// E[x_i x_j]
  double second(int i, int j) const { return mean_(i) * mean_(j) + cov_(i, j); }

  /// E[x_i x_j^2] for a Gaussian vector (third-moment expansion).
  double cross_cubic(int i, int j) const {
    const double mi = mean_(i), mj = mean_(j);
    return mi * mj * mj + mi * cov_(j, j) + 2.0 * mj * cov_(i, j);
  }

  /// E[cos(x_i)] from the characteristic function.
  double cosine(int i) const {
    return std::exp(-0.5 * cov_(i, i)) * std::cos(mean_(i));
  }

  const Vector& mean_vector() const { return mean_; }
  const Matrix& covariance() const { return cov_; }

 private:
  Vector mean_;
  Matrix cov_;
};

namespace detail {

/// Lower factor F with F F^T = cov. Cholesky when it succeeds, otherwise an
/// eigen square root with negative eigenvalues clipped to zero.
inline Matrix sampling_factor(const Matrix& cov) {
  if (cov.rows() == 0) return cov;
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() == Eigen::Success) {
    Matrix l = llt.matrixL();
    if (l.diagonal().allFinite()) return l;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

/// Rows are independent draws mean + factor * z, z ~ N(0, I).
inline void fill_gaussian_rows(Matrix& out, const std::vector<int>& columns,
                               const Vector& mean, const Matrix& factor,
                               Rng& rng) {
  const auto d = static_cast<Eigen::Index>(columns.size());
  if (d == 0) return;
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(out.rows(), d);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index k = 0; k < d; ++k) z(r, k) = normal(rng);
  }
  Matrix draws = z * factor.transpose();
  draws.rowwise() += mean.transpose();
  for (Eigen::Index k = 0; k < d; ++k) {
    out.col(columns[static_cast<std::size_t>(k)]) = draws.col(k);
  }
}

inline std::vector<int> complement(Coalition s, int m) {
  std::vector<int> out;
  for (int i = 0; i < m; ++i) {
    if (!s.contains(i)) out.push_back(i);
  }
  return out;
}

inline Matrix submatrix(const Matrix& a, const std::vector<int>& rows,
                        const std::vector<int>& cols) {
  Matrix out(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) out(r, c) = a(rows[r], cols[c]);
  }
  return out;
}

inline Vector subvector(const Vector& a, const std::vector<int>& idx) {
  Vector out(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) out(k) = a(idx[k]);
  return out;
}

}  // namespace detail

class ConditionalGaussian;

/// Multivariate Gaussian feature distribution N(mean, covariance).
class GaussianModel {
 public:
  GaussianModel(Vector mean, Matrix covariance)
      : mean_(std::move(mean)), cov_(std::move(covariance)) {
    if (cov_.rows() != cov_.cols()) {
      throw ValidationError("covariance must be square");
    }
    if (mean_.size() != cov_.rows()) {
      throw ValidationError("mean length " + std::to_string(mean_.size()) +
                            " does not match covariance dimension " +
                            std::to_string(cov_.rows()));
    }
    if (mean_.size() < 1 || mean_.size() > kMaxPlayers) {
      throw ValidationError("dimension must lie in 1..63");
    }
    if (!mean_.allFinite() || !cov_.allFinite()) {
      throw ValidationError("mean and covariance must be finite");
    }
    const double asym = (cov_ - cov_.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTolerance) {
      throw ValidationError("covariance is not symmetric (max |S - S^T| = " +
                            std::to_string(asym) + ")");
    }
    cov_ = 0.5 * (cov_ + cov_.transpose());
    spectrum_ = spectrum(cov_);
    if (spectrum_.min_eigenvalue <
        -kPsdRelativeTolerance * std::max(spectrum_.max_eigenvalue, 0.0)) {
      std::ostringstream msg;
      msg << "covariance is not positive semi-definite (smallest eigenvalue "
          << spectrum_.min_eigenvalue << ")";
      throw NotPositiveDefiniteError(msg.str(), spectrum_.min_eigenvalue);
    }
    factor_ = detail::sampling_factor(cov_);
  }

  int dimension() const { return static_cast<int>(mean_.size()); }
  const Vector& mean() const { return mean_; }
  const Matrix& covariance() const { return cov_; }
  const SpectrumSummary& spectrum_summary() const { return spectrum_; }
  bool positive_definite() const {
    return spectrum_.min_eigenvalue >
           kPdRelativeTolerance * spectrum_.max_eigenvalue;
  }

  /// Frobenius distance of the nearest-PSD repair, when one was applied.
  std::optional<double> repair_distance() const { return repair_distance_; }
  void set_repair_distance(double d) { repair_distance_ = d; }

  /// n x M matrix of independent draws.
  Matrix sample(Eigen::Index n, Rng& rng) const {
    Matrix out(n, mean_.size());
    std::vector<int> all(static_cast<std::size_t>(mean_.size()));
    for (int i = 0; i < dimension(); ++i) all[static_cast<std::size_t>(i)] = i;
    detail::fill_gaussian_rows(out, all, mean_, factor_, rng);
    return out;
  }

  Moments moments() const { return Moments(mean_, cov_); }

  /// True when every covariance entry linking two different groups is zero.
  bool group_independent(const FeaturePartition& p) const {
    for (int i = 0; i < dimension(); ++i) {
      for (int j = 0; j < dimension(); ++j) {
        if (p.group_of(i) != p.group_of(j) && cov_(i, j) != 0.0) return false;
      }
    }
    return true;
  }

  ConditionalGaussian condition(Coalition s, const Vector& given) const;
  ConditionalGaussian condition_on_instance(Coalition s,
                                            const Vector& x_star) const;

 private:
  Vector mean_;
  Matrix cov_;
  Matrix factor_;
  SpectrumSummary spectrum_;
  std::optional<double> repair_distance_;
};

/// Law of the free coordinates given x_S = given values.
class ConditionalGaussian {
 public:
  int dimension() const { return full_dim_; }
  Coalition conditioned_on() const { return conditioned_; }
  const Vector& given_values() const { return given_; }
  const std::vector<int>& free_indices() const { return free_; }
  const std::vector<int>& conditioned_indices() const { return fixed_; }
  const Vector& mean() const { return mean_; }
  const Matrix& covariance() const { return cov_; }

  /// n x M draws; conditioned columns hold the given values.
  Matrix sample(Eigen::Index n, Rng& rng) const {
    Matrix out(n, full_dim_);
    for (std::size_t k = 0; k < fixed_.size(); ++k) {
      out.col(fixed_[k]).setConstant(given_(static_cast<Eigen::Index>(k)));
    }
    if (!free_.empty()) {
      detail::fill_gaussian_rows(out, free_, mean_, factor_, rng);
    }
    return out;
  }

  Moments moments() const {
    Vector mu(full_dim_);
    Matrix c = Matrix::Zero(full_dim_, full_dim_);
    for (std::size_t k = 0; k < fixed_.size(); ++k) {
      mu(fixed_[k]) = given_(static_cast<Eigen::Index>(k));
    }
    for (std::size_t a = 0; a < free_.size(); ++a) {
      mu(free_[a]) = mean_(static_cast<Eigen::Index>(a));
      for (std::size_t b = 0; b < free_.size(); ++b) {
        c(free_[a], free_[b]) = cov_(static_cast<Eigen::Index>(a),
                                     static_cast<Eigen::Index>(b));
      }
    }
    return Moments(std::move(mu), std::move(c));
  }

 private:
  friend class GaussianModel;
  int full_dim_ = 0;
  Coalition conditioned_;
  Vector given_;
  std::vector<int> free_;
  std::vector<int> fixed_;
  Vector mean_;
  Matrix cov_;
  Matrix factor_;
};

inline ConditionalGaussian GaussianModel::condition(Coalition s,
                                                    const Vector& given) const {
  const int m = dimension();
  if (!s.is_subset_of(Coalition::grand(m))) {
    throw DomainError("conditioning set references features beyond " +
                      std::to_string(m - 1));
  }
  if (given.size() != s.size()) {
    throw ValidationError("conditioning values have length " +
                          std::to_string(given.size()) + ", expected " +
                          std::to_string(s.size()));
  }
  ConditionalGaussian c;
  c.full_dim_ = m;
  c.conditioned_ = s;
  c.given_ = given;
  c.fixed_ = s.indices();
  c.free_ = detail::complement(s, m);

  if (c.fixed_.empty()) {
    c.mean_ = mean_;
    c.cov_ = cov_;
    c.factor_ = factor_;
    return c;
  }
  if (c.free_.empty()) {
    c.mean_ = Vector(0);
    c.cov_ = Matrix(0, 0);
    return c;
  }

  const Matrix sss = detail::submatrix(cov_, c.fixed_, c.fixed_);
  Eigen::LLT<Matrix> llt(sss);
  const Matrix l = llt.matrixL();
  const double min_pivot =
      llt.info() == Eigen::Success ? l.diagonal().cwiseAbs2().minCoeff() : 0.0;
  if (llt.info() != Eigen::Success || !(min_pivot > kCholeskyPivotFloor)) {
    const auto sp = spectrum(sss);
    std::ostringstream msg;
    msg << "conditioning block is singular (eigenvalues in [" << sp.min_eigenvalue
        << ", " << sp.max_eigenvalue << "], condition number "
        << (sp.min_eigenvalue > 0 ? sp.max_eigenvalue / sp.min_eigenvalue
                                  : INFINITY)
        << ")";
    throw NumericalError(msg.str());
  }
  const Matrix sfs = detail::submatrix(cov_, c.fixed_, c.free_);
  const Matrix w = l.triangularView<Eigen::Lower>().solve(sfs);
  const Vector centred = given - detail::subvector(mean_, c.fixed_);
  const Vector u = l.triangularView<Eigen::Lower>().solve(centred);
  c.mean_ = detail::subvector(mean_, c.free_) + w.transpose() * u;
  Matrix cov = detail::submatrix(cov_, c.free_, c.free_) - w.transpose() * w;
  c.cov_ = 0.5 * (cov + cov.transpose());
  c.factor_ = detail::sampling_factor(c.cov_);
  return c;
}

inline ConditionalGaussian GaussianModel::condition_on_instance(
    Coalition s, const Vector& x_star) const {
  if (x_star.size() != dimension()) {
    throw ValidationError("instance has " + std::to_string(x_star.size()) +
                          " features, expected " + std::to_string(dimension()));
  }
  return condition(s, detail::subvector(x_star, s.indices()));
}

/// Block correlation structure: `within_rho` inside a group, `between_rho`
/// across groups, common variance on the diagonal.
struct CorrelationDesign {
  double within_rho = 0.0;
  double between_rho = 0.0;
  double variance = 1.0;
  FeaturePartition partition;
};

enum class RepairPolicy { kReject, kNearestPsd };

/// Eigenvalue clipping at `floor`; returns the repaired matrix.
inline Matrix nearest_psd(const Matrix& sym, double floor = kRepairEigenFloor) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  Vector clipped = es.eigenvalues().cwiseMax(floor);
  Matrix out = es.eigenvectors() * clipped.asDiagonal() *
               es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

inline Matrix design_covariance(const CorrelationDesign& d) {
  const int m = d.partition.feature_count();
  Matrix cov(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i == j) {
        cov(i, j) = d.variance;
      } else if (d.partition.group_of(i) == d.partition.group_of(j)) {
        cov(i, j) = d.within_rho * d.variance;
      } else {
        cov(i, j) = d.between_rho * d.variance;
      }
    }
  }
  return cov;
}

/// Zero-mean Gaussian with the block covariance of `design`. Rejects a
/// non-PD result unless the caller opts into nearest-PSD repair, in which
/// case the Frobenius distance of the repair is recorded on the model.
inline GaussianModel build_covariance(const CorrelationDesign& design,
                                      RepairPolicy policy = RepairPolicy::kReject) {
  if (!(design.within_rho >= -1.0 && design.within_rho <= 1.0) ||
      !(design.between_rho >= -1.0 && design.between_rho <= 1.0)) {
    throw ValidationError("correlations must lie in [-1, 1]");
  }
  if (!(design.variance > 0.0)) {
    throw ValidationError("variance must be positive");
  }
  Matrix cov = design_covariance(design);
  const auto sp = spectrum(cov);
  const int m = design.partition.feature_count();
  if (sp.min_eigenvalue > kPdRelativeTolerance * sp.max_eigenvalue) {
    return GaussianModel(Vector::Zero(m), std::move(cov));
  }
  if (policy == RepairPolicy::kReject) {
    std::ostringstream msg;
    msg << "covariance with within_rho=" << design.within_rho
        << ", between_rho=" << design.between_rho
        << " is not positive definite (smallest eigenvalue " << sp.min_eigenvalue
        << ")";
    throw NotPositiveDefiniteError(msg.str(), sp.min_eigenvalue);
  }
  Matrix repaired = nearest_psd(cov);
  const double dist = (repaired - cov).norm();
  GaussianModel g(Vector::Zero(m), std::move(repaired));
  g.set_repair_distance(dist);
  return g;
}

}  // namespace gshap
