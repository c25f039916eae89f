// SPDX-License-Identifier: Apache-2.0
#pragma once

// Orientation estimation from two 45-degree-offset cross-polarized scans.
//
// Every selected sample gives an angle 0.5*atan(S_I/S_II) folded into
// [0, 90); those are averaged, then the 90-degree ambiguity is removed with
// the sign pattern of the dominant cross-pol amplitudes:
//
//   base in [0, 45):  Rule 1, look at whichever of Sm1/Sm2 is larger in
//                     magnitude; add 90 when its sign matches the sign the
//                     target's reflection would have in region A'.
//   base in [45, 90): Rule 2, compare Sm1 and Sm2 as signed values.
//
// For a target denser than the medium (negative reflection) the A' sign is
// positive and Rule 2 adds 90 when Sm1 > Sm2; a rarer target flips both.

#include "dcpgpr/core.hpp"
#include "dcpgpr/dcpd.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace dcpgpr::dcpoe {

enum class ContrastMode { TargetDenser, TargetRarer };

inline std::string_view to_string(ContrastMode m) {
  return m == ContrastMode::TargetDenser ? "denser" : "rarer";
}

inline ContrastMode parse_contrast(std::string_view s) {
  if (s == "denser") return ContrastMode::TargetDenser;
  if (s == "rarer") return ContrastMode::TargetRarer;
  throw ConfigError("unknown contrast mode '" + std::string(s) + "' (expected denser|rarer)");
}

inline int reflection_sign(ContrastMode m) { return m == ContrastMode::TargetDenser ? -1 : 1; }

/// How per-sample angles are combined.
enum class Averaging {
  /// Shift every angle by a multiple of 90 into the branch centred on the
  /// circular mean, then take the plain mean. Matches Arithmetic whenever
  /// the angles do not straddle the 0/90 seam.
  BranchAligned,
  /// Plain mean of the folded angles.
  Arithmetic,
};

/// 0.5*atan(s1/s2) in degrees, folded into [0, 90).
inline double per_sample_angle(double s1, double s2) {
  if (s1 == 0 && s2 == 0) throw DomainError("per_sample_angle: both amplitudes are zero");
  if (s2 == 0) return 45.0;
  double a = 0.5 * std::atan(s1 / s2) * kDegPerRad;
  if (a < 0) a += 90.0;
  // -tiny + 90 can round up to exactly 90, which is the same orientation as 0.
  if (a >= 90.0) a -= 90.0;
  return a;
}

/// Average of angles that live on a 90-degree-periodic circle, in [0, 90).
/// Summation runs in the order given.
inline double average_folded(const std::vector<double>& angles, Averaging mode, double* spread = nullptr) {
  const double n = static_cast<double>(angles.size());
  double mean = 0;
  std::vector<double> aligned = angles;
  if (mode == Averaging::BranchAligned) {
    double sx = 0, sy = 0;
    for (double a : angles) {
      sx += cos_deg(4 * a);
      sy += sin_deg(4 * a);
    }
    const double ref = std::atan2(sy, sx) * kDegPerRad / 4.0;
    for (double& a : aligned) {
      const double d = a - ref;
      if (d >= 45.0)
        a -= 90.0;
      else if (d < -45.0)
        a += 90.0;
    }
  }
  for (double a : aligned) mean += a;
  mean /= n;
  if (spread) {
    double ss = 0;
    for (double a : aligned) ss += (a - mean) * (a - mean);
    *spread = std::sqrt(ss / n);
  }
  return wrap_angle(mean, 90.0);
}

struct Options {
  double threshold = 0.8;  ///< on max-normalized CCP, in (0, 1)
  ContrastMode contrast = ContrastMode::TargetDenser;
  Averaging averaging = Averaging::BranchAligned;
};

/// Ambiguity resolution for a base angle in [0, 90).
inline Region resolve_region(double theta_base, double sm1, double sm2, ContrastMode contrast) {
  const bool denser = contrast == ContrastMode::TargetDenser;
  if (theta_base < 45.0) {
    const double dominant = std::abs(sm1) > std::abs(sm2) ? sm1 : sm2;
    const bool shift = denser ? dominant > 0 : dominant < 0;
    return shift ? Region::APrime : Region::A;
  }
  const bool shift = denser ? sm1 > sm2 : sm1 < sm2;
  return shift ? Region::BPrime : Region::B;
}

inline double shift_for(Region r) { return (r == Region::APrime || r == Region::BPrime) ? 90.0 : 0.0; }

/// Full estimator over frame-I (s1) and frame-II (s2) HV scans.
inline OrientationEstimate estimate_orientation(const Bscan& s1, const Bscan& s2, const Options& opt = {}) {
  if (!(opt.threshold > 0 && opt.threshold < 1))
    throw DomainError("estimate_orientation: threshold must be in (0, 1)");
  const Bscan combined = dcpd::ccp(s1, s2);
  const double peak = combined.data().maxCoeff();
  if (peak == 0) throw NoSignalError("estimate_orientation: both cross-pol scans are zero");

  const auto& a = s1.data();
  const auto& b = s2.data();
  const Eigen::Index rows = a.rows(), cols = a.cols();

  OrientationEstimate est;
  est.mask.setConstant(rows, cols, false);
  est.angle_map.setConstant(rows, cols, std::numeric_limits<double>::quiet_NaN());

  std::vector<double> angles;
  double best1 = -1, best2 = -1;
  // Row-major sweep, as the summation order is part of the result.
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!(combined.data()(i, j) / peak > opt.threshold)) continue;
      const double angle = per_sample_angle(a(i, j), b(i, j));
      est.mask(i, j) = true;
      est.angle_map(i, j) = angle;
      angles.push_back(angle);
      if (std::abs(a(i, j)) > best1) {
        best1 = std::abs(a(i, j));
        est.sm1 = a(i, j);
      }
      if (std::abs(b(i, j)) > best2) {
        best2 = std::abs(b(i, j));
        est.sm2 = b(i, j);
      }
    }
  if (angles.empty())
    throw NoSignalError("estimate_orientation: no sample above normalized CCP threshold " +
                        std::to_string(opt.threshold));

  est.n_selected = angles.size();
  est.theta_base = average_folded(angles, opt.averaging, &est.angle_spread);
  est.region = resolve_region(est.theta_base, est.sm1, est.sm2, opt.contrast);
  est.theta_cal = wrap_angle(est.theta_base + shift_for(est.region), 180.0);
  return est;
}

struct SweepPoint {
  double threshold = 0;
  std::optional<double> theta_cal;
  std::optional<double> error;  ///< empty when the mask was empty
  std::size_t n_selected = 0;
};

/// Estimate at each threshold and score against a known orientation.
inline std::vector<SweepPoint> threshold_sweep(const Bscan& s1, const Bscan& s2,
                                               const std::vector<double>& thresholds,
                                               ContrastMode contrast, double theta_real,
                                               Averaging averaging = Averaging::BranchAligned) {
  if (thresholds.empty()) throw DomainError("threshold_sweep: no thresholds given");
  for (double th : thresholds)
    if (!(th > 0 && th < 1)) throw DomainError("threshold_sweep: thresholds must lie in (0, 1)");
  std::vector<SweepPoint> out;
  out.reserve(thresholds.size());
  for (double th : thresholds) {
    SweepPoint p;
    p.threshold = th;
    try {
      const auto est = estimate_orientation(s1, s2, {th, contrast, averaging});
      p.theta_cal = est.theta_cal;
      p.error = angle_error(est.theta_cal, theta_real);
      p.n_selected = est.n_selected;
    } catch (const NoSignalError&) {
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace dcpgpr::dcpoe
