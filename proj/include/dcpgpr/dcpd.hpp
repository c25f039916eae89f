// SPDX-License-Identifier: Apache-2.0
#pragma once

// Combination of the two cross-polarized frames and orientation-independent
// detection on the combined scan.

#include "dcpgpr/core.hpp"

#include <algorithm>
#include <optional>
#include <vector>

namespace dcpgpr::dcpd {

inline void check_aligned(const Bscan& s1, const Bscan& s2) {
  if (!(s1.grid() == s2.grid())) throw AlignmentError("cross-pol scans have different grids");
  if (s1.channel() != Channel::HV || s2.channel() != Channel::HV)
    throw AlignmentError("cross-pol inputs must both be HV channels");
  if (s1.frame() != Frame::I || s2.frame() != Frame::II)
    throw AlignmentError("first input must be frame I, second frame II");
}

/// Elementwise sqrt(s1^2 + s2^2) of frame-I and frame-II HV scans.
inline Bscan ccp(const Bscan& s1, const Bscan& s2) {
  check_aligned(s1, s2);
  Eigen::MatrixXd out = s1.data().binaryExpr(
      s2.data(), [](double a, double b) { return std::hypot(a, b); });
  return Bscan(s1.grid(), Channel::CCP, Frame::I, std::move(out));
}

/// Shift the traces of a scan by an integer number of positions; vacated
/// traces are zero-filled. Positive shifts move data toward higher indices.
inline Bscan shift_traces(const Bscan& b, long shift) {
  const auto n = b.traces();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(b.samples(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index src = j - static_cast<Eigen::Index>(shift);
    if (src >= 0 && src < n) out.col(j) = b.data().col(src);
  }
  return b.with_data(std::move(out));
}

struct Detection {
  std::optional<std::size_t> trace_index;
  std::optional<std::size_t> sample_index;
  double ccp_peak = 0;
  double noise_floor = 0;
  bool detected = false;
};

/// Median of the per-trace maxima after dropping the top decile.
inline double noise_floor(const Eigen::MatrixXd& data) {
  std::vector<double> maxima(static_cast<std::size_t>(data.cols()));
  for (Eigen::Index j = 0; j < data.cols(); ++j)
    maxima[static_cast<std::size_t>(j)] = data.col(j).maxCoeff();
  std::sort(maxima.begin(), maxima.end());
  const std::size_t drop = (maxima.size() + 9) / 10;
  const std::size_t keep = maxima.size() > drop ? maxima.size() - drop : 1;
  maxima.resize(keep);
  const std::size_t mid = keep / 2;
  return keep % 2 == 1 ? maxima[mid] : 0.5 * (maxima[mid - 1] + maxima[mid]);
}

/// Locate the global CCP maximum and decide whether it stands out: detected
/// when the robust floor is below `detect_threshold` times the peak.
/// Ties go to the smallest trace index, then the smallest sample index.
inline Detection detect(const Bscan& ccp_scan, double detect_threshold = 0.5) {
  if (!(detect_threshold > 0 && detect_threshold < 1))
    throw DomainError("detect: threshold must be in (0, 1)");
  const auto& d = ccp_scan.data();
  if ((d.array() < 0).any()) throw DomainError("detect: CCP scan must be nonnegative");

  Detection det;
  Eigen::Index best_i = 0, best_j = 0;
  double best = 0;
  for (Eigen::Index j = 0; j < d.cols(); ++j)
    for (Eigen::Index i = 0; i < d.rows(); ++i)
      if (d(i, j) > best) {
        best = d(i, j);
        best_i = i;
        best_j = j;
      }
  det.ccp_peak = best;
  if (best == 0) return det;

  det.noise_floor = noise_floor(d);
  det.detected = det.noise_floor < detect_threshold * best;
  if (det.detected) {
    det.trace_index = static_cast<std::size_t>(best_j);
    det.sample_index = static_cast<std::size_t>(best_i);
  }
  return det;
}

}  // namespace dcpgpr::dcpd
