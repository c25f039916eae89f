// SPDX-License-Identifier: Apache-2.0
#pragma once

// Synthetic dual-frame polarimetric B-scans of a thin elongated scatterer.
//
// The target contributes a hyperbolic Ricker arrival whose per-channel scale
// is the rotated scattering matrix of a horizontal thin scatterer. Clutter is
// antenna coupling (trace-constant) plus a rough ground-surface return, both
// landing on the co-polarized channels at full strength and on HV through a
// small leakage fraction. White noise goes on every channel.

#include "dcpgpr/core.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <random>

namespace dcpgpr::sim {

/// Speed of light in vacuum, m/ns.
inline constexpr double kSpeedOfLight = 0.299792458;

struct WaveletSpec {
  double center_frequency = 2.0;  ///< GHz, Ricker only

  void validate() const {
    if (!(std::isfinite(center_frequency) && center_frequency > 0))
      throw DomainError("wavelet: center_frequency must be > 0");
  }

  /// Half-width beyond which the Ricker magnitude is below ~2.7% of its peak.
  double half_support() const { return std::sqrt(6.0) / (std::numbers::pi * center_frequency); }
};

struct ClutterSpec {
  double coupling_amplitude = 0.0;
  double surface_amplitude = 0.0;
  double roughness_std = 0.0;
  double noise_std = 0.0;
  double cross_pol_leakage = 0.02;  ///< fraction of co-pol clutter seen on HV
  /// Shape the noise with the source wavelet's spectrum (receiver band)
  /// instead of leaving it white. Standard deviation stays noise_std.
  bool band_limited_noise = false;
  double coupling_delay_ns = 0.0;   ///< after time zero
  double surface_delay_ns = 2.0 * 0.02 / kSpeedOfLight;  ///< 2 cm air gap, two-way
  std::uint64_t seed = 0;

  void validate() const {
    auto nonneg = [](double v, const char* name) {
      if (!(std::isfinite(v) && v >= 0))
        throw DomainError(std::string("clutter: ") + name + " must be >= 0");
    };
    nonneg(coupling_amplitude, "coupling_amplitude");
    nonneg(surface_amplitude, "surface_amplitude");
    nonneg(roughness_std, "roughness_std");
    nonneg(noise_std, "noise_std");
    nonneg(cross_pol_leakage, "cross_pol_leakage");
    nonneg(coupling_delay_ns, "coupling_delay_ns");
    nonneg(surface_delay_ns, "surface_delay_ns");
  }

  static ClutterSpec none() {
    ClutterSpec c;
    c.cross_pol_leakage = 0.0;
    return c;
  }
};

struct PropagationSpec {
  double time_zero_ns = 1.0;       ///< arrival time of a zero-range reflection
  double attenuation_per_m = 0.0;  ///< amplitude attenuation, applied on the two-way path

  void validate() const {
    if (!(std::isfinite(time_zero_ns) && time_zero_ns >= 0))
      throw DomainError("propagation: time_zero_ns must be >= 0");
    if (!(std::isfinite(attenuation_per_m) && attenuation_per_m >= 0))
      throw DomainError("propagation: attenuation_per_m must be >= 0");
  }
};

/// Everything needed to synthesize one survey line in both frames.
struct SceneConfig {
  TargetModel target;
  SurveyGrid grid;
  WaveletSpec wavelet;
  ClutterSpec clutter;
  PropagationSpec propagation;
};

struct ScatteringTriple {
  double hh = 0;
  double hv = 0;
  double vv = 0;
};

/// Rotated scattering matrix of a thin scatterer at azimuth theta (degrees).
/// Frame II is frame I rotated by 45 degrees.
inline ScatteringTriple scattering_amplitudes(double theta, Frame frame, int reflection_sign) {
  const double s = reflection_sign;
  if (frame == Frame::I) {
    const double c = cos_deg(theta);
    const double n = sin_deg(theta);
    return {s * c * c, s * 0.5 * sin_deg(2 * theta), s * n * n};
  }
  const double c = cos_deg(theta + 45);
  const double n = sin_deg(theta + 45);
  return {s * c * c, s * 0.5 * cos_deg(2 * theta), s * n * n};
}

/// Ricker wavelet; t in ns, fc in GHz.
inline double ricker(double t, double fc) {
  const double a = std::numbers::pi * std::numbers::pi * fc * fc * t * t;
  return (1.0 - 2.0 * a) * std::exp(-a);
}

inline double wave_speed(const SurveyGrid& grid) { return kSpeedOfLight / std::sqrt(grid.epsilon_r); }

/// Two-way travel time (ns) from antenna position x to the target.
inline double travel_time(double x, const TargetModel& target, const SurveyGrid& grid) {
  return 2.0 * std::hypot(x - target.x0, target.depth) / wave_speed(grid);
}

/// Geometric amplitude decay, 1 at the apex.
inline double spreading(double x, const TargetModel& target) {
  return target.depth / std::hypot(x - target.x0, target.depth);
}

/// Where the target's reflection is expected to dominate.
struct GroundTruth {
  std::size_t apex_trace = 0;
  std::size_t apex_sample = 0;
  double apex_time_ns = 0;
  std::size_t t_lo = 0, t_hi = 0;  ///< half-open sample range
  std::size_t x_lo = 0, x_hi = 0;  ///< half-open trace range
};

inline GroundTruth ground_truth(const SceneConfig& cfg, std::size_t trace_halfwidth = 5) {
  const auto& g = cfg.grid;
  GroundTruth gt;
  const double apex_index = std::round(cfg.target.x0 / g.dx);
  gt.apex_trace = static_cast<std::size_t>(std::max(0.0, apex_index));
  gt.apex_trace = std::min(gt.apex_trace, g.n_traces - 1);
  gt.apex_time_ns = cfg.propagation.time_zero_ns + travel_time(cfg.target.x0, cfg.target, g);
  gt.apex_sample = std::min<std::size_t>(
      static_cast<std::size_t>(std::llround(gt.apex_time_ns / g.dt)), g.n_samples - 1);

  gt.x_lo = gt.apex_trace > trace_halfwidth ? gt.apex_trace - trace_halfwidth : 0;
  gt.x_hi = std::min(g.n_traces, gt.apex_trace + trace_halfwidth + 1);

  // Latest arrival inside the trace window bounds the time window from below.
  double t_max = gt.apex_time_ns;
  for (std::size_t j = gt.x_lo; j < gt.x_hi; ++j)
    t_max = std::max(t_max, cfg.propagation.time_zero_ns + travel_time(g.position_at(j), cfg.target, g));
  const double support = cfg.wavelet.half_support();
  const double lo = std::max(0.0, std::floor((gt.apex_time_ns - support) / g.dt));
  const double hi = std::ceil((t_max + support) / g.dt) + 1;
  gt.t_lo = static_cast<std::size_t>(lo);
  gt.t_hi = std::min(g.n_samples, static_cast<std::size_t>(hi));
  return gt;
}

namespace detail {

enum class Stream : std::uint32_t { Surface = 1, Orientation = 2, Noise = 3 };

inline std::mt19937_64 make_engine(std::uint64_t seed, Frame frame, std::size_t trace, Stream stream,
                                   std::uint32_t channel = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(frame == Frame::I ? 1 : 2),
                    static_cast<std::uint32_t>(trace),
                    static_cast<std::uint32_t>(stream),
                    channel};
  return std::mt19937_64(seq);
}

inline void check_scene(const SceneConfig& cfg) {
  cfg.target.validate();
  cfg.grid.validate();
  cfg.wavelet.validate();
  cfg.clutter.validate();
  cfg.propagation.validate();
  const double extent = cfg.grid.position_at(cfg.grid.n_traces - 1);
  if (cfg.target.x0 < 0 || cfg.target.x0 > extent)
    throw ConfigError("scene: target x0 outside the scanned extent [0, " + std::to_string(extent) + "] m");
  const double apex = cfg.propagation.time_zero_ns + travel_time(cfg.target.x0, cfg.target, cfg.grid);
  const double window = static_cast<double>(cfg.grid.n_samples) * cfg.grid.dt;
  if (apex + cfg.wavelet.half_support() > window)
    throw ConfigError("scene: apex arrival at " + std::to_string(apex) +
                      " ns plus wavelet support exceeds the " + std::to_string(window) +
                      " ns time window");
}

/// Sampled wavelet with unit energy, used to colour white noise.
inline Eigen::VectorXd noise_kernel(const WaveletSpec& wavelet, double dt) {
  const auto half = static_cast<Eigen::Index>(std::ceil(2.0 * wavelet.half_support() / dt));
  Eigen::VectorXd k(2 * half + 1);
  for (Eigen::Index n = -half; n <= half; ++n)
    k(n + half) = ricker(static_cast<double>(n) * dt, wavelet.center_frequency);
  return k / k.norm();
}

/// n unit-variance samples; white when the kernel is empty, else filtered.
inline Eigen::VectorXd unit_noise(std::mt19937_64& eng, Eigen::Index n, const Eigen::VectorXd& kernel) {
  std::normal_distribution<double> standard(0.0, 1.0);
  if (kernel.size() == 0) {
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w(i) = standard(eng);
    return w;
  }
  const Eigen::Index half = kernel.size() / 2;
  Eigen::VectorXd w(n + 2 * half);
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = standard(eng);
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = w.segment(i, kernel.size()).dot(kernel);
  return out;
}

}  // namespace detail

/// Synthesize HH, HV and VV for one antenna frame.
inline PolarimetricScan synthesize_scan(const SceneConfig& cfg, Frame frame) {
  detail::check_scene(cfg);
  const auto& g = cfg.grid;
  const auto& tgt = cfg.target;
  const auto& clut = cfg.clutter;
  const double fc = cfg.wavelet.center_frequency;
  const double t0 = cfg.propagation.time_zero_ns;
  const auto ns = static_cast<Eigen::Index>(g.n_samples);
  const auto nt = static_cast<Eigen::Index>(g.n_traces);

  Eigen::VectorXd noise_kernel;
  if (clut.band_limited_noise) noise_kernel = detail::noise_kernel(cfg.wavelet, g.dt);

  std::array<Eigen::MatrixXd, 3> data;  // HH, HV, VV
  for (auto& m : data) m = Eigen::MatrixXd::Zero(ns, nt);

  // Coupling is the same on every trace.
  Eigen::VectorXd coupling(ns);
  for (Eigen::Index i = 0; i < ns; ++i)
    coupling(i) = clut.coupling_amplitude *
                  ricker(g.time_at(static_cast<std::size_t>(i)) - t0 - clut.coupling_delay_ns, fc);

  for (Eigen::Index j = 0; j < nt; ++j) {
    const auto trace = static_cast<std::size_t>(j);
    const double x = g.position_at(trace);

    double theta = tgt.theta;
    if (tgt.orientation_jitter_deg > 0) {
      auto eng = detail::make_engine(clut.seed, frame, trace, detail::Stream::Orientation);
      std::uniform_real_distribution<double> u(-tgt.orientation_jitter_deg, tgt.orientation_jitter_deg);
      theta += u(eng);
    }
    const ScatteringTriple s = scattering_amplitudes(theta, frame, tgt.reflection_sign);
    const double r = std::hypot(x - tgt.x0, tgt.depth);
    const double scale = tgt.amplitude * spreading(x, tgt) *
                         std::exp(-cfg.propagation.attenuation_per_m * 2.0 * r);
    const double arrival = t0 + travel_time(x, tgt, g);

    double surface_gain = 1.0;
    double surface_shift = 0.0;
    if (clut.surface_amplitude > 0 && clut.roughness_std > 0) {
      auto eng = detail::make_engine(clut.seed, frame, trace, detail::Stream::Surface);
      std::normal_distribution<double> standard(0.0, 1.0);
      surface_gain = 1.0 + clut.roughness_std * standard(eng);
      surface_shift = clut.roughness_std * g.dt * standard(eng);
    }
    const double surface_time = t0 + clut.surface_delay_ns + surface_shift;

    for (Eigen::Index i = 0; i < ns; ++i) {
      const double t = g.time_at(static_cast<std::size_t>(i));
      const double w = scale * ricker(t - arrival, fc);
      double clutter = coupling(i);
      if (clut.surface_amplitude > 0)
        clutter -= clut.surface_amplitude * surface_gain * ricker(t - surface_time, fc);
      data[0](i, j) = s.hh * w + clutter;
      data[1](i, j) = s.hv * w + clut.cross_pol_leakage * clutter;
      data[2](i, j) = s.vv * w + clutter;
    }

    if (clut.noise_std > 0) {
      for (std::uint32_t c = 0; c < 3; ++c) {
        auto eng = detail::make_engine(clut.seed, frame, trace, detail::Stream::Noise, c);
        data[c].col(j) += clut.noise_std * detail::unit_noise(eng, ns, noise_kernel);
      }
    }
  }

  return PolarimetricScan(Bscan(g, Channel::HH, frame, std::move(data[0])),
                          Bscan(g, Channel::HV, frame, std::move(data[1])),
                          Bscan(g, Channel::VV, frame, std::move(data[2])));
}

struct DualFrameScene {
  PolarimetricScan frame1;
  PolarimetricScan frame2;
  GroundTruth truth;
};

inline DualFrameScene synthesize_scene(const SceneConfig& cfg) {
  return {synthesize_scan(cfg, Frame::I), synthesize_scan(cfg, Frame::II), ground_truth(cfg)};
}

}  // namespace dcpgpr::sim
