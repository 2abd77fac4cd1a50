#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "boxcast/errors.hpp"
#include "boxcast/transform.hpp"

namespace boxcast {

/// Mean curve, principal components and score series of a transformed
/// surface. Component k is column k of `components` (ages x K); the score
/// series of component k is column k of `scores` (years x K).
struct PcaDecomposition {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;
  Eigen::MatrixXd scores;
  Eigen::VectorXd singular_values;
  Eigen::VectorXd residual_variance;
  int k = 0;

  [[nodiscard]] int n_years() const noexcept { return static_cast<int>(scores.rows()); }
  [[nodiscard]] int n_ages() const noexcept { return static_cast<int>(mean.size()); }

  /// Copy holding only the first `k_keep` components and score series.
  [[nodiscard]] PcaDecomposition truncated(int k_keep) const {
    if (k_keep < 1 || k_keep > components.cols()) {
      throw ValidationError("cannot truncate to " + std::to_string(k_keep) + " components");
    }
    PcaDecomposition out = *this;
    out.components = components.leftCols(k_keep);
    out.scores = scores.leftCols(k_keep);
    out.k = k_keep;
    return out;
  }
};

struct Centered {
  Eigen::VectorXd mean;
  Eigen::MatrixXd matrix;
};

/// Per-age mean over years and the column-centered matrix.
inline Centered center(const Eigen::MatrixXd& z) {
  if (z.rows() < 2) throw ValidationError("centering needs at least 2 years");
  Centered out;
  out.mean = z.colwise().mean().transpose();
  out.matrix = z.rowwise() - out.mean.transpose();
  return out;
}

/// Thin SVD of a centered matrix, keeping the first `k_max` components.
/// Each component is flipped so its largest-magnitude entry is positive.
/// `mean` and `residual_variance` are left for the caller to fill.
inline PcaDecomposition svd_decompose(const Eigen::MatrixXd& centered, int k_max) {
  const int rank_bound = static_cast<int>(std::min(centered.rows(), centered.cols()));
  if (k_max < 1 || k_max > rank_bound) {
    throw ValidationError("k_max must lie in [1, " + std::to_string(rank_bound) + "]");
  }
  if (!centered.allFinite()) throw NumericalError("decomposition input has non-finite entries");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalError("singular value decomposition failed");

  PcaDecomposition out;
  out.singular_values = svd.singularValues();
  out.components = svd.matrixV().leftCols(k_max);
  out.scores = svd.matrixU().leftCols(k_max) * out.singular_values.head(k_max).asDiagonal();
  for (int k = 0; k < k_max; ++k) {
    Eigen::Index pivot = 0;
    out.components.col(k).cwiseAbs().maxCoeff(&pivot);
    if (out.components(pivot, k) < 0.0) {
      out.components.col(k) *= -1.0;
      out.scores.col(k) *= -1.0;
    }
  }
  out.k = k_max;
  return out;
}

/// Eigenvalue-ratio choice of K: argmin over k in [1, k_max] of
/// sigma_{k+1}^2 / sigma_k^2. A zero denominator counts as +inf; ties go to
/// the smaller k.
inline int select_k(const Eigen::VectorXd& singular_values, int k_max) {
  if (k_max < 1) throw ValidationError("k_max must be at least 1");
  if (singular_values.size() == 0 || singular_values.maxCoeff() <= 0.0) {
    throw NumericalError("all singular values are zero; no component to select");
  }
  const int limit = std::min<int>(k_max, static_cast<int>(singular_values.size()) - 1);
  int best = 1;
  double best_ratio = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= limit; ++k) {
    const double denom = singular_values(k - 1) * singular_values(k - 1);
    const double ratio = denom > 0.0
                             ? singular_values(k) * singular_values(k) / denom
                             : std::numeric_limits<double>::infinity();
    if (ratio < best_ratio) {
      best_ratio = ratio;
      best = k;
    }
  }
  return best;
}

/// Default search bound for `select_k`: floor(min(n, p) / 2), at least 1.
inline int default_k_max(int n_years, int n_ages) {
  return std::max(1, std::min(n_years, n_ages) / 2);
}

/// Per-age sample variance (divisor n-1) of what the first K components leave
/// unexplained in the centered matrix.
inline Eigen::VectorXd residual_variance(const Eigen::MatrixXd& centered,
                                         const PcaDecomposition& decomposition) {
  if (decomposition.scores.rows() != centered.rows() ||
      decomposition.components.rows() != centered.cols()) {
    throw ValidationError("decomposition does not match the centered matrix");
  }
  const int k = decomposition.k;
  const Eigen::MatrixXd residual =
      centered - decomposition.scores.leftCols(k) * decomposition.components.leftCols(k).transpose();
  const double denom = static_cast<double>(centered.rows() - 1);
  return residual.colwise().squaredNorm().transpose() / denom;
}

/// Full decomposition pipeline on a transformed surface: center, SVD up to
/// `k_max` (default floor(min(n,p)/2)), ratio-select K, residual variances.
/// A centered matrix with no variation at all keeps one (zero) component.
inline PcaDecomposition decompose(const TransformedSurface& surface, int k_max = 0) {
  const Centered c = center(surface.values);
  const int bound = std::min(surface.n_years(), surface.n_ages());
  if (k_max <= 0) k_max = default_k_max(surface.n_years(), surface.n_ages());
  // one extra component so the ratio at k_max is defined
  const int computed = std::min(bound, k_max + 1);
  PcaDecomposition full = svd_decompose(c.matrix, computed);

  // below this the centered matrix is rounding noise of a constant surface
  const double noise = 1e-12 * std::max(1.0, surface.values.cwiseAbs().maxCoeff()) *
                       std::sqrt(static_cast<double>(surface.values.size()));
  int k = 1;
  if (full.singular_values.maxCoeff() > noise) k = select_k(full.singular_values, k_max);
  PcaDecomposition out = full.truncated(k);
  out.mean = c.mean;
  out.residual_variance = residual_variance(c.matrix, out);
  return out;
}

}  // namespace boxcast
