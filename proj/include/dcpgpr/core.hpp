// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dcpgpr {

// ---------------------------------------------------------------------------
// Errors
//
// Two families: ValidationError covers malformed requests (bad parameters,
// misaligned inputs, dimension mismatch). DataError covers problems found in
// the data itself (unparseable files, degenerate or signal-free scans).
// The CLI maps the first family to exit code 1 and the second to 2.
// ---------------------------------------------------------------------------

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class AlignmentError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateInputError : public DataError {
 public:
  using DataError::DataError;
};

class NoSignalError : public DataError {
 public:
  using DataError::DataError;
};

class ParseError : public DataError {
 public:
  using DataError::DataError;
};

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------

enum class Channel { HH, HV, VV, CCP };
enum class Frame { I, II };

inline std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::HH: return "HH";
    case Channel::HV: return "HV";
    case Channel::VV: return "VV";
    case Channel::CCP: return "CCP";
  }
  return "?";
}

inline std::string_view to_string(Frame f) { return f == Frame::I ? "I" : "II"; }

inline Channel parse_channel(std::string_view s) {
  if (s == "HH") return Channel::HH;
  if (s == "HV") return Channel::HV;
  if (s == "VV") return Channel::VV;
  if (s == "CCP") return Channel::CCP;
  throw ParseError("unknown channel '" + std::string(s) + "'");
}

inline Frame parse_frame(std::string_view s) {
  if (s == "I") return Frame::I;
  if (s == "II") return Frame::II;
  throw ParseError("unknown frame '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Sampling geometry of a survey line. Times in ns, distances in m.
struct SurveyGrid {
  double dt = 0.01;
  double dx = 0.01;
  std::size_t n_samples = 512;
  std::size_t n_traces = 101;
  double epsilon_r = 3.0;

  void validate() const {
    if (!(std::isfinite(dt) && dt > 0)) throw DomainError("grid: dt must be > 0");
    if (!(std::isfinite(dx) && dx > 0)) throw DomainError("grid: dx must be > 0");
    if (n_samples < 2) throw DomainError("grid: n_samples must be >= 2");
    if (n_traces < 2) throw DomainError("grid: n_traces must be >= 2");
    if (!(std::isfinite(epsilon_r) && epsilon_r >= 1))
      throw DomainError("grid: epsilon_r must be >= 1");
  }

  double time_at(std::size_t sample) const { return static_cast<double>(sample) * dt; }
  double position_at(std::size_t trace) const { return static_cast<double>(trace) * dx; }

  friend bool operator==(const SurveyGrid&, const SurveyGrid&) = default;
};

/// One channel of one antenna frame: rows are time samples, columns traces.
///
/// Only HV is ever stored for the cross-polarized term; reciprocity makes VH
/// redundant. Channel::CCP labels derived combined-cross-pol scans.
class Bscan {
 public:
  Bscan(SurveyGrid grid, Channel channel, Frame frame, Eigen::MatrixXd data)
      : grid_(grid), channel_(channel), frame_(frame), data_(std::move(data)) {
    grid_.validate();
    if (static_cast<std::size_t>(data_.rows()) != grid_.n_samples ||
        static_cast<std::size_t>(data_.cols()) != grid_.n_traces) {
      throw DimensionError("bscan: data is " + std::to_string(data_.rows()) + "x" +
                           std::to_string(data_.cols()) + ", grid expects " +
                           std::to_string(grid_.n_samples) + "x" +
                           std::to_string(grid_.n_traces));
    }
    if (!data_.allFinite()) throw DomainError("bscan: data contains NaN or Inf");
  }

  /// Zero-filled scan.
  Bscan(SurveyGrid grid, Channel channel, Frame frame)
      : Bscan(grid, channel, frame,
              Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.n_samples),
                                    static_cast<Eigen::Index>(grid.n_traces))) {}

  const SurveyGrid& grid() const { return grid_; }
  Channel channel() const { return channel_; }
  Frame frame() const { return frame_; }
  const Eigen::MatrixXd& data() const { return data_; }

  Eigen::Index samples() const { return data_.rows(); }
  Eigen::Index traces() const { return data_.cols(); }

  /// Same labels and grid, new data (validated).
  Bscan with_data(Eigen::MatrixXd data) const { return {grid_, channel_, frame_, std::move(data)}; }
  Bscan relabeled(Channel channel) const { return {grid_, channel, frame_, data_}; }

 private:
  SurveyGrid grid_;
  Channel channel_;
  Frame frame_;
  Eigen::MatrixXd data_;
};

/// HH, HV and VV of one antenna frame over one survey line.
class PolarimetricScan {
 public:
  PolarimetricScan(Bscan hh, Bscan hv, Bscan vv)
      : hh_(std::move(hh)), hv_(std::move(hv)), vv_(std::move(vv)) {
    if (hh_.channel() != Channel::HH || hv_.channel() != Channel::HV ||
        vv_.channel() != Channel::VV)
      throw AlignmentError("polarimetric scan: channels must be HH, HV, VV");
    if (!(hh_.grid() == hv_.grid() && hh_.grid() == vv_.grid()))
      throw AlignmentError("polarimetric scan: channel grids differ");
    if (hh_.frame() != hv_.frame() || hh_.frame() != vv_.frame())
      throw AlignmentError("polarimetric scan: channel frames differ");
  }

  Frame frame() const { return hh_.frame(); }
  const SurveyGrid& grid() const { return hh_.grid(); }
  const Bscan& hh() const { return hh_; }
  const Bscan& hv() const { return hv_; }
  const Bscan& vv() const { return vv_; }

 private:
  Bscan hh_;
  Bscan hv_;
  Bscan vv_;
};

/// Thin elongated scatterer buried under the survey line.
struct TargetModel {
  double x0 = 0.5;      ///< along-line position, m
  double depth = 0.03;  ///< m
  double theta = 40.0;  ///< azimuth, degrees in [0, 180)
  /// -1 when the target is denser than the medium (metal, root in sand).
  int reflection_sign = -1;
  double amplitude = 1.0;
  /// Per-trace uniform orientation perturbation (degrees), approximating a
  /// slightly curved target. 0 means a straight segment.
  double orientation_jitter_deg = 0.0;

  void validate() const {
    if (!(std::isfinite(theta) && theta >= 0 && theta < 180))
      throw DomainError("target: theta must be in [0, 180)");
    if (reflection_sign != -1 && reflection_sign != 1)
      throw DomainError("target: reflection_sign must be -1 or +1");
    if (!(std::isfinite(amplitude) && amplitude > 0))
      throw DomainError("target: amplitude must be > 0");
    if (!(std::isfinite(depth) && depth > 0)) throw DomainError("target: depth must be > 0");
    if (!std::isfinite(x0)) throw DomainError("target: x0 must be finite");
    if (!(std::isfinite(orientation_jitter_deg) && orientation_jitter_deg >= 0))
      throw DomainError("target: orientation_jitter_deg must be >= 0");
  }
};

/// Which ambiguity region the orientation resolution landed in.
/// A = [0,45), B = [45,90), A' = [90,135), B' = [135,180).
enum class Region { A, B, APrime, BPrime, Unresolved };

inline std::string_view to_string(Region r) {
  switch (r) {
    case Region::A: return "A";
    case Region::B: return "B";
    case Region::APrime: return "A'";
    case Region::BPrime: return "B'";
    case Region::Unresolved: return "unresolved";
  }
  return "?";
}

/// Result of an orientation estimator.
struct OrientationEstimate {
  double theta_cal = 0;   ///< degrees
  double theta_base = 0;  ///< average per-sample angle before ambiguity resolution, [0, 90)
  Eigen::MatrixXd angle_map;                                  ///< NaN where not selected
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask;
  double sm1 = 0;  ///< signed max-magnitude frame-I cross-pol value over the mask
  double sm2 = 0;  ///< same for frame II
  std::size_t n_selected = 0;
  double angle_spread = 0;  ///< std of aligned per-sample angles, degrees
  Region region = Region::Unresolved;
};

// ---------------------------------------------------------------------------
// Angle algebra (degrees)
// ---------------------------------------------------------------------------

inline constexpr double kDegPerRad = 180.0 / std::numbers::pi;
inline constexpr double kRadPerDeg = std::numbers::pi / 180.0;

/// sin of an angle in degrees. Multiples of 90 give exact 0/+-1.
inline double sin_deg(double deg) {
  int quadrant = 0;
  const double r = std::remquo(deg, 90.0, &quadrant) * kRadPerDeg;
  switch (((quadrant % 4) + 4) % 4) {
    case 0: return std::sin(r);
    case 1: return std::cos(r);
    case 2: return -std::sin(r);
    default: return -std::cos(r);
  }
}

inline double cos_deg(double deg) {
  int quadrant = 0;
  const double r = std::remquo(deg, 90.0, &quadrant) * kRadPerDeg;
  switch (((quadrant % 4) + 4) % 4) {
    case 0: return std::cos(r);
    case 1: return -std::sin(r);
    case 2: return -std::cos(r);
    default: return std::sin(r);
  }
}

/// Reduce into [0, period).
inline double wrap_angle(double deg, double period) {
  double r = std::fmod(deg, period);
  if (r < 0) r += period;
  if (r >= period) r -= period;
  return r;
}

/// Distance between two orientations on a circle of the given period.
inline double periodic_angle_error(double a, double b, double period) {
  if (!std::isfinite(a) || !std::isfinite(b))
    throw DomainError("angle_error: non-finite input");
  const double d = wrap_angle(a - b, period);
  return std::min(d, period - d);
}

/// Orientation error with 180-degree periodicity; result in [0, 90].
inline double angle_error(double theta_a, double theta_b) {
  return periodic_angle_error(theta_a, theta_b, 180.0);
}

/// Scale so the largest absolute value is exactly 1.
inline Bscan normalize_bscan(const Bscan& b) {
  const double peak = b.data().cwiseAbs().maxCoeff();
  if (peak == 0) throw DegenerateInputError("normalize: all-zero scan");
  Eigen::MatrixXd out = b.data() / peak;
  return b.with_data(std::move(out));
}

}  // namespace dcpgpr
