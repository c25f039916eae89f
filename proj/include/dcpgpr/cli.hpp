// SPDX-License-Identifier: Apache-2.0
#pragma once

// Command-line front end. Every subcommand writes a JSON report (stdout or
// --report PATH) holding format_version, the full effective configuration
// and SHA-256 digests of every input file.
//
// Exit codes: 0 success, 1 validation/usage error, 2 data/runtime error.

#include "dcpgpr/alford.hpp"
#include "dcpgpr/core.hpp"
#include "dcpgpr/dcpd.hpp"
#include "dcpgpr/dcpoe.hpp"
#include "dcpgpr/evaluation.hpp"
#include "dcpgpr/io.hpp"
#include "dcpgpr/preprocess.hpp"
#include "dcpgpr/simulator.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace dcpgpr::cli {

using io::json;
namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitData = 2;

/// Accepts "dir/name", "dir/name.csv" or "dir/name.json".
inline fs::path scan_stem(const std::string& arg) {
  fs::path p(arg);
  if (p.extension() == ".csv" || p.extension() == ".json") p.replace_extension();
  return p;
}

inline json input_digest(const fs::path& stem) {
  const auto pair = io::ScanFilePair::from_stem(stem);
  return {{"stem", stem.string()},
          {"csv_sha256", io::file_sha256(pair.data_path)},
          {"json_sha256", io::file_sha256(pair.meta_path)}};
}

inline json base_report(std::string_view command) {
  return {{"format_version", io::kFormatVersion}, {"command", std::string(command)}};
}


inline json estimate_json(const OrientationEstimate& e) {
  return {{"theta_cal", e.theta_cal},
          {"theta_base", e.theta_base},
          {"region", std::string(to_string(e.region))},
          {"sm1", e.sm1},
          {"sm2", e.sm2},
          {"n_selected", e.n_selected},
          {"angle_spread", e.angle_spread}};
}

inline preprocess::TargetWindow parse_window(const std::vector<std::size_t>& v) {
  if (v.size() != 4) throw ConfigError("--window takes t_lo t_hi x_lo x_hi");
  return {v[0], v[1], v[2], v[3]};
}

/// Options shared by all subcommands; filled by CLI11, consumed by the runners.
struct Args {
  std::string report;

  // simulate
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;

  // preprocess
  std::string in;
  std::string method = "mean";
  std::string background;
  std::size_t k = 1;

  // ccp / estimate / sweep
  std::string s1, s2;
  long shift = 0;

  // detect
  double detect_threshold = 0.5;

  // estimate / sweep / export-heatmap
  double th = 0.8;
  std::string contrast = "denser";
  std::string averaging = "branch-aligned";
  std::string angle_map;

  // alford
  std::string hh, hv, vv;
  double alford_threshold = 0.5;
  std::vector<std::size_t> window;

  // sweep
  std::vector<double> ths{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::optional<double> theta_real;

  // plan
  std::string out_csv, out_json;
  unsigned workers = 0;

  // export-heatmap
  bool normalize = false;
};

class Runner {
 public:
  Runner(const Args& a, std::ostream& out) : a_(a), out_(out) {}

  void simulate() {
    sim::SceneConfig cfg = a_.config.empty() ? sim::SceneConfig{} : io::scene_from_json(io::parse_json_file(a_.config));
    if (a_.seed) cfg.clutter.seed = *a_.seed;
    const auto scene = sim::synthesize_scene(cfg);
    const fs::path dir(a_.out);
    json outputs = json::array();
    auto put = [&](const Bscan& b, const char* name) {
      io::write_scan(b, dir / name);
      outputs.push_back((dir / name).string());
    };
    put(scene.frame1.hh(), "frame1_hh");
    put(scene.frame1.hv(), "frame1_hv");
    put(scene.frame1.vv(), "frame1_vv");
    put(scene.frame2.hh(), "frame2_hh");
    put(scene.frame2.hv(), "frame2_hv");
    put(scene.frame2.vv(), "frame2_vv");

    const auto& t = scene.truth;
    json truth{{"format_version", io::kFormatVersion},
               {"config", io::to_json(cfg)},
               {"apex_trace", t.apex_trace},
               {"apex_sample", t.apex_sample},
               {"apex_time_ns", t.apex_time_ns},
               {"window", {{"t_lo", t.t_lo}, {"t_hi", t.t_hi}, {"x_lo", t.x_lo}, {"x_hi", t.x_hi}}}};
    io::write_text_atomic(dir / "truth.json", truth.dump(2) + "\n");
    outputs.push_back((dir / "truth.json").string());

    json r = base_report("simulate");
    r["config"] = {{"scene", io::to_json(cfg)}, {"out", a_.out}};
    r["inputs"] = json::object();
    if (!a_.config.empty()) r["inputs"]["config"] = {{"path", a_.config}, {"sha256", io::file_sha256(a_.config)}};
    r["outputs"] = outputs;
    emit(r);
  }

  void preprocess_cmd() {
    const auto stem = scan_stem(a_.in);
    const Bscan b = io::read_scan(stem);
    const auto method = eval::parse_method(a_.method);
    json inputs{{"in", input_digest(stem)}};
    Bscan result = b;
    if (method == eval::Method::Mean) {
      std::optional<Bscan> bg;
      if (!a_.background.empty()) {
        bg = io::read_scan(scan_stem(a_.background));
        inputs["background"] = input_digest(scan_stem(a_.background));
      }
      result = preprocess::mean_subtract(b, bg);
    } else if (method == eval::Method::Svd) {
      if (!a_.background.empty()) throw ConfigError("--background only applies to --method mean");
      result = preprocess::svd_remove_largest(b, a_.k);
    }
    io::write_scan(result, scan_stem(a_.out));

    json r = base_report("preprocess");
    r["config"] = {{"in", stem.string()},
                   {"out", scan_stem(a_.out).string()},
                   {"method", a_.method},
                   {"k", a_.k},
                   {"background", a_.background.empty() ? json(nullptr) : json(a_.background)}};
    r["inputs"] = inputs;
    emit(r);
  }

  void ccp_cmd() {
    const Bscan s1 = io::read_scan(scan_stem(a_.s1));
    Bscan s2 = io::read_scan(scan_stem(a_.s2));
    if (a_.shift != 0) s2 = dcpd::shift_traces(s2, a_.shift);
    const Bscan c = dcpd::ccp(s1, s2);
    io::write_scan(c, scan_stem(a_.out));

    json r = base_report("ccp");
    r["config"] = {{"s1", scan_stem(a_.s1).string()},
                   {"s2", scan_stem(a_.s2).string()},
                   {"out", scan_stem(a_.out).string()},
                   {"shift", a_.shift}};
    r["inputs"] = {{"s1", input_digest(scan_stem(a_.s1))}, {"s2", input_digest(scan_stem(a_.s2))}};
    r["result"] = {{"peak_ccp", c.data().maxCoeff()}};
    emit(r);
  }

  void detect_cmd() {
    const auto stem = scan_stem(a_.in);
    const Bscan b = io::read_scan(stem);
    if (b.channel() != Channel::CCP) throw AlignmentError("detect expects a CCP scan");
    const auto d = dcpd::detect(b, a_.detect_threshold);
    json r = base_report("detect");
    r["config"] = {{"in", stem.string()}, {"threshold", a_.detect_threshold}};
    r["inputs"] = {{"in", input_digest(stem)}};
    r["result"] = {{"detected", d.detected},
                   {"trace_index", d.trace_index ? json(*d.trace_index) : json(nullptr)},
                   {"sample_index", d.sample_index ? json(*d.sample_index) : json(nullptr)},
                   {"ccp_peak", d.ccp_peak},
                   {"noise_floor", d.noise_floor}};
    emit(r);
  }

  void estimate() {
    const Bscan s1 = io::read_scan(scan_stem(a_.s1));
    const Bscan s2 = io::read_scan(scan_stem(a_.s2));
    const dcpoe::Options opt{a_.th, dcpoe::parse_contrast(a_.contrast), io::parse_averaging(a_.averaging)};
    const auto est = dcpoe::estimate_orientation(s1, s2, opt);
    if (!a_.angle_map.empty()) io::write_text_atomic(a_.angle_map, io::heatmap_csv(est.angle_map, s1.grid()));

    json r = base_report("estimate");
    r["config"] = {{"s1", scan_stem(a_.s1).string()},
                   {"s2", scan_stem(a_.s2).string()},
                   {"th", a_.th},
                   {"contrast", a_.contrast},
                   {"averaging", a_.averaging},
                   {"angle_map", a_.angle_map.empty() ? json(nullptr) : json(a_.angle_map)}};
    r["inputs"] = {{"s1", input_digest(scan_stem(a_.s1))}, {"s2", input_digest(scan_stem(a_.s2))}};
    r["result"] = estimate_json(est);
    emit(r);
  }

  void alford_cmd() {
    const PolarimetricScan scan(io::read_scan(scan_stem(a_.hh)), io::read_scan(scan_stem(a_.hv)),
                                io::read_scan(scan_stem(a_.vv)));
    alford::Options opt;
    opt.trace_threshold = a_.alford_threshold;
    opt.averaging = io::parse_averaging(a_.averaging);
    if (!a_.window.empty()) opt.window = parse_window(a_.window);
    const auto est = alford::alford_estimate(scan, opt);

    json r = base_report("alford");
    r["config"] = {{"hh", scan_stem(a_.hh).string()},
                   {"hv", scan_stem(a_.hv).string()},
                   {"vv", scan_stem(a_.vv).string()},
                   {"threshold", a_.alford_threshold},
                   {"averaging", a_.averaging},
                   {"window", a_.window.empty() ? json(nullptr) : json(a_.window)}};
    r["inputs"] = {{"hh", input_digest(scan_stem(a_.hh))},
                   {"hv", input_digest(scan_stem(a_.hv))},
                   {"vv", input_digest(scan_stem(a_.vv))}};
    r["result"] = estimate_json(est);
    emit(r);
  }

  void sweep() {
    if (!a_.theta_real) throw ConfigError("sweep requires --theta-real");
    const Bscan s1 = io::read_scan(scan_stem(a_.s1));
    const Bscan s2 = io::read_scan(scan_stem(a_.s2));
    const auto points = dcpoe::threshold_sweep(s1, s2, a_.ths, dcpoe::parse_contrast(a_.contrast), *a_.theta_real,
                                               io::parse_averaging(a_.averaging));
    std::string csv = "threshold,theta_cal,error,n_selected\n";
    for (const auto& p : points)
      csv += io::format_double(p.threshold) + "," + io::detail::opt_num(p.theta_cal) + "," +
             io::detail::opt_num(p.error) + "," + std::to_string(p.n_selected) + "\n";
    io::write_text_atomic(a_.out, csv);

    json r = base_report("sweep");
    r["config"] = {{"s1", scan_stem(a_.s1).string()},
                   {"s2", scan_stem(a_.s2).string()},
                   {"ths", a_.ths},
                   {"theta_real", *a_.theta_real},
                   {"contrast", a_.contrast},
                   {"averaging", a_.averaging},
                   {"out", a_.out}};
    r["inputs"] = {{"s1", input_digest(scan_stem(a_.s1))}, {"s2", input_digest(scan_stem(a_.s2))}};
    emit(r);
  }

  void plan() {
    auto p = io::plan_from_json(io::parse_json_file(a_.config));
    p.workers = a_.workers;
    const auto table = eval::run_plan(p);
    if (!a_.out_csv.empty()) io::write_text_atomic(a_.out_csv, io::cells_to_csv(table));
    json full = io::table_to_json(table);
    full["format_version"] = io::kFormatVersion;
    full["config"] = io::to_json(p);
    if (!a_.out_json.empty()) io::write_text_atomic(a_.out_json, full.dump(2) + "\n");

    json r = base_report("plan");
    r["config"] = io::to_json(p);
    r["inputs"] = {{"config", {{"path", a_.config}, {"sha256", io::file_sha256(a_.config)}}}};
    r["result"] = full["summary"];
    emit(r);
  }

  void export_heatmap() {
    json r = base_report("export-heatmap");
    if (!a_.in.empty()) {
      if (!a_.s1.empty() || !a_.s2.empty()) throw ConfigError("give either --in or --s1/--s2, not both");
      const auto stem = scan_stem(a_.in);
      Bscan b = io::read_scan(stem);
      if (a_.normalize) b = normalize_bscan(b);
      io::write_text_atomic(a_.out, io::heatmap_csv(b.data(), b.grid()));
      r["config"] = {{"in", stem.string()}, {"normalize", a_.normalize}, {"out", a_.out}};
      r["inputs"] = {{"in", input_digest(stem)}};
    } else {
      if (a_.s1.empty() || a_.s2.empty()) throw ConfigError("export-heatmap needs --in, or --s1 and --s2");
      const Bscan s1 = io::read_scan(scan_stem(a_.s1));
      const Bscan s2 = io::read_scan(scan_stem(a_.s2));
      const auto est = dcpoe::estimate_orientation(
          s1, s2, {a_.th, dcpoe::parse_contrast(a_.contrast), io::parse_averaging(a_.averaging)});
      io::write_text_atomic(a_.out, io::heatmap_csv(est.angle_map, s1.grid()));
      r["config"] = {{"s1", scan_stem(a_.s1).string()}, {"s2", scan_stem(a_.s2).string()},
                     {"th", a_.th},                     {"contrast", a_.contrast},
                     {"averaging", a_.averaging},       {"out", a_.out}};
      r["inputs"] = {{"s1", input_digest(scan_stem(a_.s1))}, {"s2", input_digest(scan_stem(a_.s2))}};
    }
    emit(r);
  }

 private:
  void emit(const json& r) {
    const std::string text = r.dump(2) + "\n";
    if (a_.report.empty())
      out_ << text;
    else
      io::write_text_atomic(a_.report, text);
  }

  const Args& a_;
  std::ostream& out_;
};

/// Parse argv, run one subcommand and map errors to exit codes.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  Args a;
  CLI::App app{"Dual-frame cross-polarized GPR detection and orientation estimation", "dcpgpr"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--report", a.report, "write the JSON report here instead of stdout");

  auto scan_in = [](CLI::App* c, const char* name, std::string& dst, const char* what) {
    return c->add_option(name, dst, what)->required();
  };

  auto* simulate = app.add_subcommand("simulate", "synthesize both frames of a scene");
  simulate->add_option("--config", a.config, "scene JSON (defaults if omitted)")->check(CLI::ExistingFile);
  simulate->add_option("--out", a.out, "output directory")->required();
  simulate->add_option("--seed", a.seed, "override clutter.seed");

  auto* pre = app.add_subcommand("preprocess", "background removal");
  scan_in(pre, "--in", a.in, "input scan stem");
  scan_in(pre, "--out", a.out, "output scan stem");
  pre->add_option("--method", a.method, "none|mean|svd")->capture_default_str();
  pre->add_option("--background", a.background, "background scan stem for --method mean");
  pre->add_option("--k", a.k, "singular components removed by --method svd")->capture_default_str();

  auto* ccp = app.add_subcommand("ccp", "combine frame-I and frame-II HV scans");
  scan_in(ccp, "--s1", a.s1, "frame-I HV scan stem");
  scan_in(ccp, "--s2", a.s2, "frame-II HV scan stem");
  scan_in(ccp, "--out", a.out, "output scan stem");
  ccp->add_option("--shift", a.shift, "trace shift applied to --s2 first")->capture_default_str();

  auto* detect = app.add_subcommand("detect", "locate the CCP peak");
  scan_in(detect, "--in", a.in, "CCP scan stem");
  detect->add_option("--threshold", a.detect_threshold, "noise floor / peak limit")->capture_default_str();

  auto* estimate = app.add_subcommand("estimate", "orientation from dual-frame HV scans");
  scan_in(estimate, "--s1", a.s1, "frame-I HV scan stem");
  scan_in(estimate, "--s2", a.s2, "frame-II HV scan stem");
  estimate->add_option("--th", a.th, "normalized CCP threshold")->capture_default_str();
  estimate->add_option("--contrast", a.contrast, "denser|rarer")->capture_default_str();
  estimate->add_option("--averaging", a.averaging, "branch-aligned|arithmetic")->capture_default_str();
  estimate->add_option("--angle-map", a.angle_map, "also write the per-sample angle map as a heatmap CSV");

  auto* alf = app.add_subcommand("alford", "rotation-angle baseline on a frame-I triple");
  scan_in(alf, "--hh", a.hh, "HH scan stem");
  scan_in(alf, "--hv", a.hv, "HV scan stem");
  scan_in(alf, "--vv", a.vv, "VV scan stem");
  alf->add_option("--threshold", a.alford_threshold, "normalized |HH+VV| threshold")->capture_default_str();
  alf->add_option("--window", a.window, "t_lo t_hi x_lo x_hi (half-open)")->expected(4);
  alf->add_option("--averaging", a.averaging, "branch-aligned|arithmetic")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "estimation error versus CCP threshold");
  scan_in(sweep, "--s1", a.s1, "frame-I HV scan stem");
  scan_in(sweep, "--s2", a.s2, "frame-II HV scan stem");
  sweep->add_option("--theta-real", a.theta_real, "true orientation, degrees")->required();
  sweep->add_option("--ths", a.ths, "thresholds")->capture_default_str();
  sweep->add_option("--contrast", a.contrast, "denser|rarer")->capture_default_str();
  sweep->add_option("--averaging", a.averaging, "branch-aligned|arithmetic")->capture_default_str();
  sweep->add_option("--out", a.out, "output CSV")->required();

  auto* plan = app.add_subcommand("plan", "run an experiment plan");
  plan->add_option("--config", a.config, "plan JSON")->required()->check(CLI::ExistingFile);
  plan->add_option("--out-csv", a.out_csv, "per-cell CSV");
  plan->add_option("--out-json", a.out_json, "full result table JSON");
  plan->add_option("--workers", a.workers, "threads, 0 = all cores")->capture_default_str();

  auto* heat = app.add_subcommand("export-heatmap", "dense CSV grid of a scan or an angle map");
  heat->add_option("--in", a.in, "scan stem");
  heat->add_flag("--normalize", a.normalize, "divide by max |value|");
  heat->add_option("--s1", a.s1, "frame-I HV scan stem (angle map)");
  heat->add_option("--s2", a.s2, "frame-II HV scan stem (angle map)");
  heat->add_option("--th", a.th, "normalized CCP threshold")->capture_default_str();
  heat->add_option("--contrast", a.contrast, "denser|rarer")->capture_default_str();
  heat->add_option("--averaging", a.averaging, "branch-aligned|arithmetic")->capture_default_str();
  heat->add_option("--out", a.out, "output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  Runner r(a, out);
  try {
    if (*simulate) r.simulate();
    else if (*pre) r.preprocess_cmd();
    else if (*ccp) r.ccp_cmd();
    else if (*detect) r.detect_cmd();
    else if (*estimate) r.estimate();
    else if (*alf) r.alford_cmd();
    else if (*sweep) r.sweep();
    else if (*plan) r.plan();
    else if (*heat) r.export_heatmap();
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace dcpgpr::cli
