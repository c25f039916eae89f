// SPDX-License-Identifier: Apache-2.0
#pragma once

// Seeded experiment harness: orientation and depth sweeps, CCP constancy,
// estimator comparison.

#include "dcpgpr/alford.hpp"
#include "dcpgpr/core.hpp"
#include "dcpgpr/dcpd.hpp"
#include "dcpgpr/dcpoe.hpp"
#include "dcpgpr/preprocess.hpp"
#include "dcpgpr/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace dcpgpr::eval {

enum class Estimator { DCPOE, Alford };
enum class Method { None, Mean, Svd };

inline std::string_view to_string(Estimator e) { return e == Estimator::DCPOE ? "DCPOE" : "Alford"; }
inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::None: return "none";
    case Method::Mean: return "mean";
    case Method::Svd: return "svd";
  }
  return "?";
}

inline Estimator parse_estimator(std::string_view s) {
  if (s == "DCPOE" || s == "dcpoe") return Estimator::DCPOE;
  if (s == "Alford" || s == "alford") return Estimator::Alford;
  throw ConfigError("unknown estimator '" + std::string(s) + "'");
}

inline Method parse_method(std::string_view s) {
  if (s == "none") return Method::None;
  if (s == "mean") return Method::Mean;
  if (s == "svd") return Method::Svd;
  throw ConfigError("unknown preprocess method '" + std::string(s) + "' (expected none|mean|svd)");
}

inline Bscan apply_method(const Bscan& b, Method m) {
  switch (m) {
    case Method::None: return b;
    case Method::Mean: return preprocess::mean_subtract(b);
    case Method::Svd: return preprocess::svd_remove_largest(b, 1);
  }
  return b;
}

struct ExperimentPlan {
  std::vector<double> theta_list{0, 20, 40, 60, 80, 90, 100, 120, 140, 160};
  std::vector<double> depth_list{0.03, 0.21};
  std::size_t n_seeds = 1;
  /// Shared scene parameters; target theta/depth and clutter seed are set per run.
  sim::SceneConfig scene;
  std::set<Estimator> estimators{Estimator::DCPOE};
  Method method = Method::Mean;
  double threshold = 0.8;
  std::optional<dcpoe::ContrastMode> contrast;  ///< defaults to the target's reflection sign
  dcpoe::Averaging averaging = dcpoe::Averaging::BranchAligned;
  double alford_threshold = 0.5;
  bool alford_truth_window = false;  ///< restrict Alford to the ground-truth target window
  unsigned workers = 0;              ///< 0 = hardware concurrency

  dcpoe::ContrastMode effective_contrast() const {
    if (contrast) return *contrast;
    return scene.target.reflection_sign < 0 ? dcpoe::ContrastMode::TargetDenser
                                            : dcpoe::ContrastMode::TargetRarer;
  }

  void validate() const {
    if (theta_list.empty()) throw ConfigError("plan: theta_list is empty");
    if (depth_list.empty()) throw ConfigError("plan: depth_list is empty");
    if (n_seeds < 1) throw ConfigError("plan: n_seeds must be >= 1");
    if (estimators.empty()) throw ConfigError("plan: no estimators selected");
    for (double t : theta_list)
      if (!(t >= 0 && t < 180)) throw ConfigError("plan: thetas must lie in [0, 180)");
    for (double d : depth_list)
      if (!(d > 0)) throw ConfigError("plan: depths must be > 0");
    if (!(threshold > 0 && threshold < 1)) throw ConfigError("plan: threshold must be in (0, 1)");
    if (!(alford_threshold > 0 && alford_threshold < 1))
      throw ConfigError("plan: alford_threshold must be in (0, 1)");
  }
};

/// One simulated scene (theta, depth, seed).
struct RunRow {
  double theta = 0;
  double depth = 0;
  std::uint64_t seed = 0;
  double peak_ccp = 0;
  bool detected = false;
  std::optional<std::size_t> detected_trace;
  std::optional<double> theta_dcpoe, err_dcpoe;
  std::optional<double> theta_alford, err_alford;
  std::size_t n_selected_dcpoe = 0;
  Region region = Region::Unresolved;
  std::string failure;  ///< empty on success
};

struct ErrorStats {
  std::size_t n = 0;
  double mean = 0;
  double max = 0;

  void add(double e) {
    mean = (mean * static_cast<double>(n) + e) / static_cast<double>(n + 1);
    max = n == 0 ? e : std::max(max, e);
    ++n;
  }
};

/// Aggregate of all seeds for one (theta, depth).
struct Cell {
  double theta = 0;
  double depth = 0;
  double peak_ccp_mean = 0;
  ErrorStats dcpoe;
  ErrorStats alford;
  std::size_t failures = 0;
};

struct ResultTable {
  ExperimentPlan plan;
  std::vector<RunRow> rows;  ///< plan order: depth, theta, seed
  std::vector<Cell> cells;   ///< plan order: depth, theta
  ErrorStats dcpoe_overall;
  ErrorStats alford_overall;
};

/// Scene for one run of a plan.
inline sim::SceneConfig scene_for(const ExperimentPlan& plan, double theta, double depth, std::size_t seed_index) {
  sim::SceneConfig cfg = plan.scene;
  cfg.target.theta = theta;
  cfg.target.depth = depth;
  cfg.clutter.seed = plan.scene.clutter.seed + seed_index;
  return cfg;
}

inline RunRow run_scene(const ExperimentPlan& plan, const sim::SceneConfig& cfg) {
  RunRow row;
  row.theta = cfg.target.theta;
  row.depth = cfg.target.depth;
  row.seed = cfg.clutter.seed;
  try {
    const auto scene = sim::synthesize_scene(cfg);
    const Bscan s1 = apply_method(scene.frame1.hv(), plan.method);
    const Bscan s2 = apply_method(scene.frame2.hv(), plan.method);
    const Bscan combined = dcpd::ccp(s1, s2);
    row.peak_ccp = combined.data().maxCoeff();
    const auto det = dcpd::detect(combined);
    row.detected = det.detected;
    row.detected_trace = det.trace_index;

    if (plan.estimators.count(Estimator::DCPOE)) {
      const auto est = dcpoe::estimate_orientation(
          s1, s2, {plan.threshold, plan.effective_contrast(), plan.averaging});
      row.theta_dcpoe = est.theta_cal;
      row.err_dcpoe = angle_error(est.theta_cal, cfg.target.theta);
      row.n_selected_dcpoe = est.n_selected;
      row.region = est.region;
    }
    if (plan.estimators.count(Estimator::Alford)) {
      const PolarimetricScan f1(apply_method(scene.frame1.hh(), plan.method), s1,
                                apply_method(scene.frame1.vv(), plan.method));
      alford::Options opt;
      opt.trace_threshold = plan.alford_threshold;
      opt.averaging = plan.averaging;
      if (plan.alford_truth_window) {
        const auto& t = scene.truth;
        opt.window = preprocess::TargetWindow{t.t_lo, t.t_hi, t.x_lo, t.x_hi};
      }
      const auto est = alford::alford_estimate(f1, opt);
      row.theta_alford = est.theta_cal;
      row.err_alford = alford::alford_error(est.theta_cal, cfg.target.theta);
    }
  } catch (const std::exception& e) {
    row.failure = e.what();
  }
  return row;
}

/// Run `task(i)` for i in [0, n) on a few threads; each index is independent.
inline void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& task) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) task(i);
    });
}

inline ResultTable run_plan(const ExperimentPlan& plan) {
  plan.validate();
  ResultTable table;
  table.plan = plan;

  struct Job {
    double theta, depth;
    std::size_t seed_index;
  };
  std::vector<Job> jobs;
  for (double depth : plan.depth_list)
    for (double theta : plan.theta_list)
      for (std::size_t s = 0; s < plan.n_seeds; ++s) jobs.push_back({theta, depth, s});

  table.rows.resize(jobs.size());
  parallel_for(jobs.size(), plan.workers, [&](std::size_t k) {
    const auto& j = jobs[k];
    table.rows[k] = run_scene(plan, scene_for(plan, j.theta, j.depth, j.seed_index));
  });

  for (std::size_t c = 0; c < jobs.size(); c += plan.n_seeds) {
    Cell cell;
    cell.theta = jobs[c].theta;
    cell.depth = jobs[c].depth;
    double ccp_sum = 0;
    std::size_t ccp_n = 0;
    for (std::size_t k = c; k < c + plan.n_seeds; ++k) {
      const auto& r = table.rows[k];
      if (!r.failure.empty()) {
        ++cell.failures;
        continue;
      }
      ccp_sum += r.peak_ccp;
      ++ccp_n;
      if (r.err_dcpoe) {
        cell.dcpoe.add(*r.err_dcpoe);
        table.dcpoe_overall.add(*r.err_dcpoe);
      }
      if (r.err_alford) {
        cell.alford.add(*r.err_alford);
        table.alford_overall.add(*r.err_alford);
      }
    }
    cell.peak_ccp_mean = ccp_n ? ccp_sum / static_cast<double>(ccp_n) : 0;
    table.cells.push_back(cell);
  }
  return table;
}

/// (max - min) / mean of the per-cell mean peak CCP across orientations at one depth.
inline double ccp_constancy(const ResultTable& table, double depth) {
  std::vector<double> v;
  for (const auto& c : table.cells)
    if (c.depth == depth && c.failures == 0) v.push_back(c.peak_ccp_mean);
  if (v.size() < 2) throw DomainError("ccp_constancy: need at least two orientation cells at this depth");
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  return (*hi - *lo) / mean;
}

/// Same statistic over raw values, e.g. a published table.
inline double relative_spread(const std::vector<double>& values) {
  if (values.size() < 2) throw DomainError("relative_spread: need at least two values");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  double mean = 0;
  for (double x : values) mean += x;
  mean /= static_cast<double>(values.size());
  return (*hi - *lo) / mean;
}

struct ComparisonRow {
  double theta_real = 0;
  double depth = 0;
  std::uint64_t seed = 0;
  std::optional<double> theta_dcpoe, theta_alford, err_dcpoe, err_alford;
  std::string failure;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  ErrorStats dcpoe;
  ErrorStats alford;
};

/// Both estimators on every scene of the plan.
inline ComparisonReport compare_estimators(ExperimentPlan plan) {
  plan.estimators = {Estimator::DCPOE, Estimator::Alford};
  const auto table = run_plan(plan);
  ComparisonReport rep;
  for (const auto& r : table.rows)
    rep.rows.push_back({r.theta, r.depth, r.seed, r.theta_dcpoe, r.theta_alford, r.err_dcpoe, r.err_alford,
                        r.failure});
  rep.dcpoe = table.dcpoe_overall;
  rep.alford = table.alford_overall;
  return rep;
}

}  // namespace dcpgpr::eval
