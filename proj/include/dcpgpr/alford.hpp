// SPDX-License-Identifier: Apache-2.0
#pragma once

// Alford-style orientation baseline on a single frame's full scattering
// triple. For a thin scatterer at theta, HH - VV is proportional to cos 2theta
// and 2 HV to sin 2theta, so theta = 0.5 * atan2(2 HV, HH - VV), known only
// modulo 90 degrees.

#include "dcpgpr/core.hpp"
#include "dcpgpr/dcpoe.hpp"
#include "dcpgpr/preprocess.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace dcpgpr::alford {

/// 0.5 * atan2(2 hv, hh - vv) folded into [0, 90).
inline double per_sample_angle(double hh, double hv, double vv) {
  const double y = 2.0 * hv;
  const double x = hh - vv;
  if (x == 0 && y == 0) throw DomainError("alford: rotation angle undefined for HH == VV, HV == 0");
  double a = wrap_angle(0.5 * std::atan2(y, x) * kDegPerRad, 90.0);
  if (a >= 90.0) a -= 90.0;
  return a;
}

struct Options {
  double trace_threshold = 0.5;  ///< on max-normalized |HH + VV|, in (0, 1)
  std::optional<preprocess::TargetWindow> window;
  dcpoe::Averaging averaging = dcpoe::Averaging::BranchAligned;
};

/// Samples with normalized |HH + VV| above the threshold (optionally only
/// inside a window) vote with their rotation angle. sm1/sm2 in the result
/// hold the signed max-magnitude HV and HH - VV over the selection.
inline OrientationEstimate alford_estimate(const PolarimetricScan& scan, const Options& opt = {}) {
  if (!(opt.trace_threshold > 0 && opt.trace_threshold < 1))
    throw DomainError("alford: trace_threshold must be in (0, 1)");
  if (opt.window) opt.window->validate(scan.grid());

  const auto& hh = scan.hh().data();
  const auto& hv = scan.hv().data();
  const auto& vv = scan.vv().data();
  const Eigen::MatrixXd trace = (hh + vv).cwiseAbs();
  const double peak = trace.maxCoeff();
  if (peak == 0) throw NoSignalError("alford: HH + VV is zero everywhere");

  const Eigen::Index rows = hh.rows(), cols = hh.cols();
  OrientationEstimate est;
  est.mask.setConstant(rows, cols, false);
  est.angle_map.setConstant(rows, cols, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> angles;
  double best1 = -1, best2 = -1;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!(trace(i, j) / peak > opt.trace_threshold)) continue;
      if (opt.window && !opt.window->contains(i, j)) continue;
      const double diff = hh(i, j) - vv(i, j);
      if (diff == 0 && hv(i, j) == 0) continue;
      const double angle = per_sample_angle(hh(i, j), hv(i, j), vv(i, j));
      est.mask(i, j) = true;
      est.angle_map(i, j) = angle;
      angles.push_back(angle);
      if (std::abs(hv(i, j)) > best1) {
        best1 = std::abs(hv(i, j));
        est.sm1 = hv(i, j);
      }
      if (std::abs(diff) > best2) {
        best2 = std::abs(diff);
        est.sm2 = diff;
      }
    }
  if (angles.empty()) throw NoSignalError("alford: no sample selected by the trace threshold");

  est.n_selected = angles.size();
  est.theta_base = dcpoe::average_folded(angles, opt.averaging, &est.angle_spread);
  est.theta_cal = est.theta_base;
  est.region = Region::Unresolved;
  return est;
}

/// Alford's estimate is defined modulo 90 degrees, so it is scored that way.
inline double alford_error(double theta_cal, double theta_real) {
  return periodic_angle_error(theta_cal, theta_real, 90.0);
}

}  // namespace dcpgpr::alford
