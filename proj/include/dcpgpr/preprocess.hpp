// SPDX-License-Identifier: Apache-2.0
#pragma once

// Background suppression and the signal-to-clutter ratio.

#include "dcpgpr/core.hpp"

#include <Eigen/SVD>

#include <limits>
#include <optional>

namespace dcpgpr::preprocess {

/// Half-open sample/trace rectangle that holds the target reflection.
struct TargetWindow {
  std::size_t t_lo = 0, t_hi = 0;
  std::size_t x_lo = 0, x_hi = 0;

  void validate(const SurveyGrid& grid) const {
    if (!(t_lo < t_hi && t_hi <= grid.n_samples))
      throw DomainError("window: need 0 <= t_lo < t_hi <= n_samples");
    if (!(x_lo < x_hi && x_hi <= grid.n_traces))
      throw DomainError("window: need 0 <= x_lo < x_hi <= n_traces");
  }

  bool contains(Eigen::Index i, Eigen::Index j) const {
    const auto si = static_cast<std::size_t>(i);
    const auto sj = static_cast<std::size_t>(j);
    return si >= t_lo && si < t_hi && sj >= x_lo && sj < x_hi;
  }

  std::size_t area() const { return (t_hi - t_lo) * (x_hi - x_lo); }
};

/// Average trace (mean over traces for every time sample).
inline Eigen::VectorXd mean_trace(const Bscan& b) { return b.data().rowwise().mean(); }

/// Subtract an average trace from every trace.
///
/// Without a background, the scan's own average trace is used. With one, the
/// average trace of the (target-free) background scan is used instead.
inline Bscan mean_subtract(const Bscan& b, const std::optional<Bscan>& background = std::nullopt) {
  Eigen::VectorXd avg;
  if (background) {
    if (!(background->grid() == b.grid()))
      throw DimensionError("mean_subtract: background grid differs from scan grid");
    avg = mean_trace(*background);
  } else {
    avg = mean_trace(b);
  }
  Eigen::MatrixXd out = b.data().colwise() - avg;
  return b.with_data(std::move(out));
}

/// Zero the k largest singular values and reconstruct.
inline Bscan svd_remove_largest(const Bscan& b, std::size_t k = 1) {
  const auto min_dim = static_cast<std::size_t>(std::min(b.samples(), b.traces()));
  if (k < 1 || k >= min_dim)
    throw DomainError("svd_remove_largest: k must satisfy 1 <= k < min(n_samples, n_traces) = " +
                      std::to_string(min_dim));
  Eigen::BDCSVD<Eigen::MatrixXd> svd(b.data(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto kk = static_cast<Eigen::Index>(k);
  // Subtracting the leading components keeps the small-signal tail exact.
  Eigen::MatrixXd removed = svd.matrixU().leftCols(kk) *
                            svd.singularValues().head(kk).asDiagonal() *
                            svd.matrixV().leftCols(kk).transpose();
  Eigen::MatrixXd out = b.data() - removed;
  return b.with_data(std::move(out));
}

/// Ratio of the largest |amplitude| inside the window to the largest outside.
/// Returns +infinity when everything outside the window is zero.
inline double scr(const Bscan& b, const TargetWindow& window) {
  window.validate(b.grid());
  if (window.area() == b.grid().n_samples * b.grid().n_traces)
    throw DomainError("scr: window covers the whole scan, no clutter region left");
  double inside = 0;
  double outside = 0;
  const auto& d = b.data();
  for (Eigen::Index j = 0; j < d.cols(); ++j)
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
      const double a = std::abs(d(i, j));
      if (window.contains(i, j))
        inside = std::max(inside, a);
      else
        outside = std::max(outside, a);
    }
  if (outside == 0) return std::numeric_limits<double>::infinity();
  return inside / outside;
}

}  // namespace dcpgpr::preprocess
