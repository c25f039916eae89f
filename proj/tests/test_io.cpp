// SPDX-License-Identifier: Apache-2.0
#include "test_util.hpp"

#include <cstring>

using namespace dcpgpr;
using namespace dcpgpr::io;

namespace {

void write_raw(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

std::string meta_text(std::size_t rows, std::size_t cols, const std::string& channel = "HV",
                      const std::string& extra = "") {
  return "{\"format_version\":1,\"dt_ns\":0.01,\"dx_m\":0.01,\"n_samples\":" + std::to_string(rows) +
         ",\"n_traces\":" + std::to_string(cols) + ",\"epsilon_r\":3,\"channel\":\"" + channel +
         "\",\"frame\":\"I\"" + extra + "}";
}

template <class Fn>
FileFormatError expect_format_error(Fn&& fn) {
  try {
    fn();
  } catch (const FileFormatError& e) {
    return e;
  }
  ADD_FAILURE() << "no FileFormatError thrown";
  return FileFormatError(FileFormatError::Kind::Metadata, "");
}

std::uint64_t bits(double d) {
  std::uint64_t u;
  std::memcpy(&u, &d, sizeof u);
  return u;
}

}  // namespace

TEST(ScanIo, TwoByTwoRoundTrip) {
  testutil::TempDir dir("io");
  Eigen::MatrixXd m(2, 2);
  m << 0.1, -2.5e-310, 1.0 / 3.0, -0.0;
  const auto b = testutil::make_scan(m, Channel::HH, Frame::II);
  write_scan(b, dir / "s");
  const auto r = read_scan(dir / "s");
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 0; j < 2; ++j) EXPECT_EQ(bits(r.data()(i, j)), bits(m(i, j)));
  EXPECT_EQ(r.grid(), b.grid());
  EXPECT_EQ(r.channel(), Channel::HH);
  EXPECT_EQ(r.frame(), Frame::II);
}

TEST(ScanIoProperty, RandomBitPatternsRoundTrip) {
  std::mt19937_64 rng(99);
  for (int k = 0; k < 200000; ++k) {
    std::uint64_t u = rng();
    double d;
    std::memcpy(&d, &u, sizeof d);
    if (!std::isfinite(d)) continue;
    EXPECT_EQ(bits(parse_double(format_double(d), 1, 1)), u);
  }
}

TEST(ScanIo, SimulatedScanRoundTripAndMetadataVerbatim) {
  testutil::TempDir dir("io");
  sim::SceneConfig cfg;
  cfg.clutter.noise_std = 0.05;
  const auto s = sim::synthesize_scan(cfg, Frame::I).hv();
  const auto pair = write_scan(s, dir / "a");
  const auto r = read_scan(pair);
  EXPECT_EQ(r.data(), s.data());
  write_scan(r, dir / "b");
  EXPECT_EQ(read_text(dir / "a.json"), read_text(dir / "b.json"));
  EXPECT_EQ(read_text(dir / "a.csv"), read_text(dir / "b.csv"));
}

TEST(ScanIo, ColumnCountMismatchCitesRow) {
  testutil::TempDir dir("io");
  write_raw(dir / "s.json", meta_text(2, 4));
  write_raw(dir / "s.csv", "1,2,3\n4,5,6\n");
  const auto e = expect_format_error([&] { read_scan(dir / "s"); });
  EXPECT_EQ(e.kind(), FileFormatError::Kind::Dimension);
  EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos) << e.what();
}

TEST(ScanIo, RowCountMismatch) {
  testutil::TempDir dir("io");
  write_raw(dir / "s.json", meta_text(3, 2));
  write_raw(dir / "s.csv", "1,2\n4,5\n");
  EXPECT_EQ(expect_format_error([&] { read_scan(dir / "s"); }).kind(), FileFormatError::Kind::Dimension);
  write_raw(dir / "s.csv", "1,2\n4,5\n1,1\n1,1\n");
  EXPECT_EQ(expect_format_error([&] { read_scan(dir / "s"); }).kind(), FileFormatError::Kind::Dimension);
}

TEST(ScanIo, OverflowIsAParseError) {
  testutil::TempDir dir("io");
  write_raw(dir / "s.json", meta_text(2, 2));
  write_raw(dir / "s.csv", "1,2\n1e999,5\n");
  const auto e = expect_format_error([&] { read_scan(dir / "s"); });
  EXPECT_EQ(e.kind(), FileFormatError::Kind::Number);
  EXPECT_NE(std::string(e.what()).find("row 2, column 1"), std::string::npos) << e.what();
  EXPECT_THROW(parse_double("1e999", 1, 1), ParseError);
}

TEST(ScanIo, BadNumbers) {
  for (const char* s : {"", "abc", "1.0x", "nan", "inf", "1,0"})
    EXPECT_THROW(parse_double(s, 3, 4), FileFormatError) << s;
  EXPECT_EQ(parse_double(" +2.5 ", 1, 1), 2.5);
}

TEST(ScanIo, UnknownChannelAndFrame) {
  testutil::TempDir dir("io");
  write_raw(dir / "s.csv", "1,2\n4,5\n");
  write_raw(dir / "s.json", meta_text(2, 2, "VH"));
  EXPECT_EQ(expect_format_error([&] { read_scan(dir / "s"); }).kind(), FileFormatError::Kind::Label);
  std::string bad_frame = meta_text(2, 2);
  bad_frame.replace(bad_frame.find("\"I\""), 3, "\"III\"");
  write_raw(dir / "s.json", bad_frame);
  EXPECT_EQ(expect_format_error([&] { read_scan(dir / "s"); }).kind(), FileFormatError::Kind::Label);
}

TEST(ScanIo, MetadataKeysMustMatchExactly) {
  testutil::TempDir dir("io");
  write_raw(dir / "s.csv", "1,2\n4,5\n");
  write_raw(dir / "s.json", meta_text(2, 2, "HV", ",\"note\":1"));
  EXPECT_EQ(expect_format_error([&] { read_scan(dir / "s"); }).kind(), FileFormatError::Kind::Metadata);
  write_raw(dir / "s.json", "{\"format_version\":1}");
  EXPECT_EQ(expect_format_error([&] { read_scan(dir / "s"); }).kind(), FileFormatError::Kind::Metadata);
  write_raw(dir / "s.json", "{not json");
  EXPECT_EQ(expect_format_error([&] { read_scan(dir / "s"); }).kind(), FileFormatError::Kind::Metadata);
  std::string v2 = meta_text(2, 2);
  v2.replace(v2.find("\"format_version\":1"), 18, "\"format_version\":2");
  write_raw(dir / "s.json", v2);
  EXPECT_EQ(expect_format_error([&] { read_scan(dir / "s"); }).kind(), FileFormatError::Kind::Metadata);
}

TEST(ScanIo, MissingFileIsADataError) {
  EXPECT_THROW(read_scan(fs::path("/nonexistent/dir/scan")), DataError);
}

TEST(AtomicWrite, LeavesOnlyTheTarget) {
  testutil::TempDir dir("io");
  write_text_atomic(dir / "sub" / "x.txt", "hello");
  write_text_atomic(dir / "sub" / "x.txt", "world");
  EXPECT_EQ(read_text(dir / "sub" / "x.txt"), "world");
  std::size_t n = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "sub")) ++n;
  EXPECT_EQ(n, 1u);
}

TEST(Digest, KnownVectors) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(SceneConfigJson, RoundTripAndUnknownKeys) {
  sim::SceneConfig cfg;
  cfg.target.theta = 123.25;
  cfg.target.reflection_sign = 1;
  cfg.grid.n_traces = 77;
  cfg.clutter.noise_std = 0.05;
  cfg.clutter.band_limited_noise = true;
  cfg.clutter.seed = 0xffffffffffffull;
  cfg.propagation.attenuation_per_m = 2;
  cfg.wavelet.center_frequency = 1.5;
  const auto back = scene_from_json(json::parse(to_json(cfg).dump()));
  EXPECT_EQ(to_json(back), to_json(cfg));
  EXPECT_EQ(back.target.theta, 123.25);
  EXPECT_EQ(back.clutter.seed, cfg.clutter.seed);

  EXPECT_THROW(scene_from_json(json::parse(R"({"target":{"thetaa":3}})")), ConfigError);
  EXPECT_THROW(scene_from_json(json::parse(R"({"targets":{}})")), ConfigError);
  EXPECT_THROW(scene_from_json(json::parse(R"({"grid":{"dt":"fast"}})")), ConfigError);
  EXPECT_THROW(scene_from_json(json::parse(R"({"wavelet":{"kind":"gaussian"}})")), ConfigError);
  EXPECT_EQ(scene_from_json(json::parse("{}")).target.theta, TargetModel{}.theta);
}

TEST(PlanJson, RoundTripAndValidation) {
  eval::ExperimentPlan p;
  p.theta_list = {10, 20};
  p.depth_list = {0.05};
  p.n_seeds = 4;
  p.estimators = {eval::Estimator::Alford, eval::Estimator::DCPOE};
  p.method = eval::Method::Svd;
  p.threshold = 0.7;
  p.averaging = dcpoe::Averaging::Arithmetic;
  p.alford_truth_window = true;
  p.scene.clutter.noise_std = 0.02;
  const auto back = plan_from_json(to_json(p));
  EXPECT_EQ(to_json(back), to_json(p));
  EXPECT_EQ(back.n_seeds, 4u);
  EXPECT_EQ(back.method, eval::Method::Svd);

  EXPECT_THROW(plan_from_json(json::parse(R"({"estimators":[]})")), ConfigError);
  EXPECT_THROW(plan_from_json(json::parse(R"({"theta_list":[200]})")), ConfigError);
  EXPECT_THROW(plan_from_json(json::parse(R"({"n_seed":3})")), ConfigError);
  EXPECT_THROW(plan_from_json(json::parse(R"({"method":"median"})")), ConfigError);
  EXPECT_THROW(plan_from_json(json::parse("[1,2]")), ConfigError);
}

TEST(Heatmap, HeaderAndEmptyCells) {
  Eigen::MatrixXd m(2, 3);
  m << 1, std::nan(""), 3, 4, 5, 6.5;
  SurveyGrid g = testutil::small_grid(2, 3);
  g.dt = 0.5;
  g.dx = 0.25;
  EXPECT_EQ(heatmap_csv(m, g), "time_ns,0,0.25,0.5\n0,1,,3\n0.5,4,5,6.5\n");
}
