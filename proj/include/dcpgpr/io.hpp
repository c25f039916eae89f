// SPDX-License-Identifier: Apache-2.0
#pragma once

// File formats.
//
// A scan on disk is a pair of files sharing a stem:
//   <stem>.csv   n_samples rows of n_traces comma-separated numbers, no
//                header, '\n' line ends, each value the shortest decimal
//                that round-trips to the same binary64.
//   <stem>.json  {"format_version", "dt_ns", "dx_m", "n_samples",
//                 "n_traces", "epsilon_r", "channel", "frame"}, nothing else.
//
// Scene and plan configs are JSON objects whose keys mirror the struct
// fields; unknown keys are rejected.

#include "dcpgpr/core.hpp"
#include "dcpgpr/evaluation.hpp"
#include "dcpgpr/simulator.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <unistd.h>

namespace dcpgpr::io {

using nlohmann::json;
namespace fs = std::filesystem;

inline constexpr int kFormatVersion = 1;

class FileFormatError : public ParseError {
 public:
  enum class Kind { Dimension, Label, Number, Metadata };
  FileFormatError(Kind kind, const std::string& what) : ParseError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// ---------------------------------------------------------------------------
// Plain file helpers
// ---------------------------------------------------------------------------

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Write to a sibling temp file, then rename over the target.
inline void write_text_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw DataError("cannot rename into '" + path.string() + "': " + ec.message());
  }
}

inline std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

inline std::string file_sha256(const fs::path& path) { return sha256_hex(read_text(path)); }

// ---------------------------------------------------------------------------
// Numbers
// ---------------------------------------------------------------------------

/// Shortest decimal that parses back to exactly `v`.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, std::size_t row, std::size_t col) {
  auto where = [&] { return "row " + std::to_string(row) + ", column " + std::to_string(col); };
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec == std::errc::result_out_of_range)
    throw FileFormatError(FileFormatError::Kind::Number,
                          where() + ": value '" + std::string(s) + "' is out of binary64 range");
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty())
    throw FileFormatError(FileFormatError::Kind::Number, where() + ": cannot parse '" + std::string(s) + "'");
  if (!std::isfinite(v))
    throw FileFormatError(FileFormatError::Kind::Number, where() + ": non-finite value '" + std::string(s) + "'");
  return v;
}

// ---------------------------------------------------------------------------
// Matrix CSV
// ---------------------------------------------------------------------------

inline std::string matrix_to_csv(const Eigen::MatrixXd& m) {
  std::string out;
  out.reserve(static_cast<std::size_t>(m.size()) * 22);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out.push_back(',');
      out += format_double(m(i, j));
    }
    out.push_back('\n');
  }
  return out;
}

inline Eigen::MatrixXd matrix_from_csv(std::string_view text, std::size_t rows, std::size_t cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::size_t row = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() && pos >= text.size()) break;
    ++row;
    if (row > rows)
      throw FileFormatError(FileFormatError::Kind::Dimension,
                            "row " + std::to_string(row) + ": more rows than n_samples = " + std::to_string(rows));
    std::size_t col = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string_view field = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
      ++col;
      if (col > cols)
        throw FileFormatError(FileFormatError::Kind::Dimension,
                              "row " + std::to_string(row) + ": more than n_traces = " + std::to_string(cols) + " columns");
      m(static_cast<Eigen::Index>(row - 1), static_cast<Eigen::Index>(col - 1)) = parse_double(field, row, col);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (col != cols)
      throw FileFormatError(FileFormatError::Kind::Dimension,
                            "row " + std::to_string(row) + ": found " + std::to_string(col) +
                                " columns, n_traces = " + std::to_string(cols));
  }
  if (row != rows)
    throw FileFormatError(FileFormatError::Kind::Dimension,
                          "found " + std::to_string(row) + " rows, n_samples = " + std::to_string(rows));
  return m;
}

// ---------------------------------------------------------------------------
// Scan files
// ---------------------------------------------------------------------------

struct ScanFilePair {
  fs::path data_path;
  fs::path meta_path;

  static ScanFilePair from_stem(const fs::path& stem) {
    fs::path d = stem, m = stem;
    d += ".csv";
    m += ".json";
    return {d, m};
  }
};

inline json scan_metadata(const Bscan& b) {
  const auto& g = b.grid();
  return json{{"format_version", kFormatVersion},
              {"dt_ns", g.dt},
              {"dx_m", g.dx},
              {"n_samples", g.n_samples},
              {"n_traces", g.n_traces},
              {"epsilon_r", g.epsilon_r},
              {"channel", std::string(to_string(b.channel()))},
              {"frame", std::string(to_string(b.frame()))}};
}

inline ScanFilePair write_scan(const Bscan& b, const fs::path& stem) {
  const auto pair = ScanFilePair::from_stem(stem);
  write_text_atomic(pair.data_path, matrix_to_csv(b.data()));
  write_text_atomic(pair.meta_path, scan_metadata(b).dump(2) + "\n");
  return pair;
}

namespace detail {

template <class T>
T meta_get(const json& meta, const char* key) {
  try {
    return meta.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FileFormatError(FileFormatError::Kind::Metadata, std::string("metadata key '") + key + "': " + e.what());
  }
}

}  // namespace detail

inline Bscan read_scan(const ScanFilePair& pair) {
  json meta;
  try {
    meta = json::parse(read_text(pair.meta_path));
  } catch (const json::parse_error& e) {
    throw FileFormatError(FileFormatError::Kind::Metadata,
                          pair.meta_path.string() + ": invalid JSON: " + e.what());
  }
  static const std::set<std::string> expected{"format_version", "dt_ns",     "dx_m",    "n_samples",
                                              "n_traces",       "epsilon_r", "channel", "frame"};
  if (!meta.is_object()) throw FileFormatError(FileFormatError::Kind::Metadata, "metadata must be an object");
  for (const auto& [k, v] : meta.items())
    if (!expected.count(k))
      throw FileFormatError(FileFormatError::Kind::Metadata, "unknown metadata key '" + k + "'");
  for (const auto& k : expected)
    if (!meta.contains(k))
      throw FileFormatError(FileFormatError::Kind::Metadata, "missing metadata key '" + k + "'");
  if (detail::meta_get<int>(meta, "format_version") != kFormatVersion)
    throw FileFormatError(FileFormatError::Kind::Metadata, "unsupported format_version");

  SurveyGrid g;
  g.dt = detail::meta_get<double>(meta, "dt_ns");
  g.dx = detail::meta_get<double>(meta, "dx_m");
  g.n_samples = detail::meta_get<std::size_t>(meta, "n_samples");
  g.n_traces = detail::meta_get<std::size_t>(meta, "n_traces");
  g.epsilon_r = detail::meta_get<double>(meta, "epsilon_r");
  try {
    g.validate();
  } catch (const DomainError& e) {
    throw FileFormatError(FileFormatError::Kind::Metadata, e.what());
  }

  Channel channel;
  Frame frame;
  try {
    channel = parse_channel(detail::meta_get<std::string>(meta, "channel"));
    frame = parse_frame(detail::meta_get<std::string>(meta, "frame"));
  } catch (const FileFormatError&) {
    throw;
  } catch (const ParseError& e) {
    throw FileFormatError(FileFormatError::Kind::Label, e.what());
  }

  Eigen::MatrixXd data = matrix_from_csv(read_text(pair.data_path), g.n_samples, g.n_traces);
  return Bscan(g, channel, frame, std::move(data));
}

inline Bscan read_scan(const fs::path& stem) { return read_scan(ScanFilePair::from_stem(stem)); }

// ---------------------------------------------------------------------------
// Configs
// ---------------------------------------------------------------------------

namespace detail {

/// Reads known keys out of a JSON object and rejects the rest.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected a JSON object");
  }

  template <class T>
  void opt(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& at(const char* key) const { return j_.at(key); }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError(where_ + ": unknown key '" + k + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

}  // namespace detail

inline json to_json(const TargetModel& t) {
  return {{"x0", t.x0},
          {"depth", t.depth},
          {"theta", t.theta},
          {"reflection_sign", t.reflection_sign},
          {"amplitude", t.amplitude},
          {"orientation_jitter_deg", t.orientation_jitter_deg}};
}

inline json to_json(const SurveyGrid& g) {
  return {{"dt", g.dt}, {"dx", g.dx}, {"n_samples", g.n_samples}, {"n_traces", g.n_traces}, {"epsilon_r", g.epsilon_r}};
}

inline json to_json(const sim::WaveletSpec& w) { return {{"center_frequency", w.center_frequency}, {"kind", "ricker"}}; }

inline json to_json(const sim::ClutterSpec& c) {
  return {{"coupling_amplitude", c.coupling_amplitude},
          {"surface_amplitude", c.surface_amplitude},
          {"roughness_std", c.roughness_std},
          {"noise_std", c.noise_std},
          {"cross_pol_leakage", c.cross_pol_leakage},
          {"band_limited_noise", c.band_limited_noise},
          {"coupling_delay_ns", c.coupling_delay_ns},
          {"surface_delay_ns", c.surface_delay_ns},
          {"seed", c.seed}};
}

inline json to_json(const sim::PropagationSpec& p) {
  return {{"time_zero_ns", p.time_zero_ns}, {"attenuation_per_m", p.attenuation_per_m}};
}

inline json to_json(const sim::SceneConfig& s) {
  return {{"target", to_json(s.target)},
          {"grid", to_json(s.grid)},
          {"wavelet", to_json(s.wavelet)},
          {"clutter", to_json(s.clutter)},
          {"propagation", to_json(s.propagation)}};
}

inline void read_block(const json& j, TargetModel& t) {
  detail::Reader r(j, "target");
  r.opt("x0", t.x0);
  r.opt("depth", t.depth);
  r.opt("theta", t.theta);
  r.opt("reflection_sign", t.reflection_sign);
  r.opt("amplitude", t.amplitude);
  r.opt("orientation_jitter_deg", t.orientation_jitter_deg);
  r.finish();
}

inline void read_block(const json& j, SurveyGrid& g) {
  detail::Reader r(j, "grid");
  r.opt("dt", g.dt);
  r.opt("dx", g.dx);
  r.opt("n_samples", g.n_samples);
  r.opt("n_traces", g.n_traces);
  r.opt("epsilon_r", g.epsilon_r);
  r.finish();
}

inline void read_block(const json& j, sim::WaveletSpec& w) {
  detail::Reader r(j, "wavelet");
  r.opt("center_frequency", w.center_frequency);
  std::string kind = "ricker";
  r.opt("kind", kind);
  if (kind != "ricker") throw ConfigError("wavelet.kind: only 'ricker' is supported");
  r.finish();
}

inline void read_block(const json& j, sim::ClutterSpec& c) {
  detail::Reader r(j, "clutter");
  r.opt("coupling_amplitude", c.coupling_amplitude);
  r.opt("surface_amplitude", c.surface_amplitude);
  r.opt("roughness_std", c.roughness_std);
  r.opt("noise_std", c.noise_std);
  r.opt("cross_pol_leakage", c.cross_pol_leakage);
  r.opt("band_limited_noise", c.band_limited_noise);
  r.opt("coupling_delay_ns", c.coupling_delay_ns);
  r.opt("surface_delay_ns", c.surface_delay_ns);
  r.opt("seed", c.seed);
  r.finish();
}

inline void read_block(const json& j, sim::PropagationSpec& p) {
  detail::Reader r(j, "propagation");
  r.opt("time_zero_ns", p.time_zero_ns);
  r.opt("attenuation_per_m", p.attenuation_per_m);
  r.finish();
}

namespace detail {

inline void read_scene_blocks(Reader& r, sim::SceneConfig& s) {
  if (r.has("target")) read_block(r.at("target"), s.target);
  if (r.has("grid")) read_block(r.at("grid"), s.grid);
  if (r.has("wavelet")) read_block(r.at("wavelet"), s.wavelet);
  if (r.has("clutter")) read_block(r.at("clutter"), s.clutter);
  if (r.has("propagation")) read_block(r.at("propagation"), s.propagation);
}

}  // namespace detail

/// Missing blocks and keys keep their defaults.
inline sim::SceneConfig scene_from_json(const json& j) {
  sim::SceneConfig s;
  detail::Reader r(j, "scene");
  detail::read_scene_blocks(r, s);
  r.finish();
  return s;
}

inline json to_json(const eval::ExperimentPlan& p) {
  json est = json::array();
  for (auto e : p.estimators) est.push_back(std::string(to_string(e)));
  json j = to_json(p.scene);
  j["theta_list"] = p.theta_list;
  j["depth_list"] = p.depth_list;
  j["n_seeds"] = p.n_seeds;
  j["estimators"] = est;
  j["method"] = std::string(to_string(p.method));
  j["threshold"] = p.threshold;
  j["contrast"] = std::string(dcpoe::to_string(p.effective_contrast()));
  j["averaging"] = p.averaging == dcpoe::Averaging::BranchAligned ? "branch-aligned" : "arithmetic";
  j["alford_threshold"] = p.alford_threshold;
  j["alford_truth_window"] = p.alford_truth_window;
  return j;
}

inline dcpoe::Averaging parse_averaging(std::string_view s) {
  if (s == "branch-aligned") return dcpoe::Averaging::BranchAligned;
  if (s == "arithmetic") return dcpoe::Averaging::Arithmetic;
  throw ConfigError("unknown averaging '" + std::string(s) + "' (expected branch-aligned|arithmetic)");
}

inline eval::ExperimentPlan plan_from_json(const json& j) {
  eval::ExperimentPlan p;
  detail::Reader r(j, "plan");
  detail::read_scene_blocks(r, p.scene);
  r.opt("theta_list", p.theta_list);
  r.opt("depth_list", p.depth_list);
  r.opt("n_seeds", p.n_seeds);
  if (r.has("estimators")) {
    p.estimators.clear();
    std::vector<std::string> names;
    r.opt("estimators", names);
    for (const auto& n : names) p.estimators.insert(eval::parse_estimator(n));
  }
  std::string s;
  if (r.has("method")) {
    r.opt("method", s);
    p.method = eval::parse_method(s);
  }
  r.opt("threshold", p.threshold);
  if (r.has("contrast")) {
    r.opt("contrast", s);
    p.contrast = dcpoe::parse_contrast(s);
  }
  if (r.has("averaging")) {
    r.opt("averaging", s);
    p.averaging = parse_averaging(s);
  }
  r.opt("alford_threshold", p.alford_threshold);
  r.opt("alford_truth_window", p.alford_truth_window);
  r.finish();
  p.validate();
  return p;
}

inline json parse_json_file(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Result tables and heatmaps
// ---------------------------------------------------------------------------

namespace detail {
inline std::string opt_num(const std::optional<double>& v) { return v ? format_double(*v) : ""; }
}  // namespace detail

/// One CSV row per (depth, theta) cell.
inline std::string cells_to_csv(const eval::ResultTable& t) {
  std::string out =
      "theta,depth,n_seeds,failures,peak_ccp_mean,dcpoe_mean_err,dcpoe_max_err,alford_mean_err,alford_max_err\n";
  const bool dc = t.plan.estimators.count(eval::Estimator::DCPOE) > 0;
  const bool al = t.plan.estimators.count(eval::Estimator::Alford) > 0;
  for (const auto& c : t.cells) {
    out += format_double(c.theta) + "," + format_double(c.depth) + "," + std::to_string(t.plan.n_seeds) + "," +
           std::to_string(c.failures) + "," + format_double(c.peak_ccp_mean) + ",";
    out += (dc && c.dcpoe.n ? format_double(c.dcpoe.mean) + "," + format_double(c.dcpoe.max) : std::string(","));
    out += ",";
    out += (al && c.alford.n ? format_double(c.alford.mean) + "," + format_double(c.alford.max) : std::string(","));
    out += "\n";
  }
  return out;
}

inline json stats_json(const eval::ErrorStats& s) { return {{"n", s.n}, {"mean", s.mean}, {"max", s.max}}; }

inline json table_to_json(const eval::ResultTable& t) {
  json cells = json::array();
  for (const auto& c : t.cells)
    cells.push_back({{"theta", c.theta},
                     {"depth", c.depth},
                     {"failures", c.failures},
                     {"peak_ccp_mean", c.peak_ccp_mean},
                     {"dcpoe", stats_json(c.dcpoe)},
                     {"alford", stats_json(c.alford)}});
  json rows = json::array();
  for (const auto& r : t.rows) {
    json row{{"theta", r.theta},       {"depth", r.depth},   {"seed", r.seed},
             {"peak_ccp", r.peak_ccp}, {"detected", r.detected}};
    row["detected_trace"] = r.detected_trace ? json(*r.detected_trace) : json(nullptr);
    row["theta_dcpoe"] = r.theta_dcpoe ? json(*r.theta_dcpoe) : json(nullptr);
    row["err_dcpoe"] = r.err_dcpoe ? json(*r.err_dcpoe) : json(nullptr);
    row["region"] = std::string(to_string(r.region));
    row["theta_alford"] = r.theta_alford ? json(*r.theta_alford) : json(nullptr);
    row["err_alford"] = r.err_alford ? json(*r.err_alford) : json(nullptr);
    if (!r.failure.empty()) row["failure"] = r.failure;
    rows.push_back(std::move(row));
  }
  return {{"cells", cells},
          {"rows", rows},
          {"summary", {{"DCPOE", stats_json(t.dcpoe_overall)}, {"Alford", stats_json(t.alford_overall)}}}};
}

/// Dense grid for external plotting: header row of trace positions (m),
/// then one row per time sample starting with its time (ns). NaN cells are
/// written empty.
inline std::string heatmap_csv(const Eigen::MatrixXd& m, const SurveyGrid& g) {
  std::string out = "time_ns";
  for (Eigen::Index j = 0; j < m.cols(); ++j) out += "," + format_double(g.position_at(static_cast<std::size_t>(j)));
  out += "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out += format_double(g.time_at(static_cast<std::size_t>(i)));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out += ",";
      if (std::isfinite(m(i, j))) out += format_double(m(i, j));
    }
    out += "\n";
  }
  return out;
}

}  // namespace dcpgpr::io
