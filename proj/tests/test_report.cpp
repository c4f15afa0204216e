// Copyright 2026 The sphere-sapt Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "sphere_sapt/harness.hpp"
#include "sphere_sapt/report.hpp"

using namespace sphere_sapt;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sphere_sapt_test_report_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Csv, FieldQuoting) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_field("two\nlines"), "\"two\nlines\"");
  EXPECT_EQ(csv_field("cr\r"), "\"cr\r\"");
  EXPECT_EQ(csv_field(""), "");
}

TEST(Csv, HeaderOnlyTable) {
  const CsvTable t({"d_j", "quantity", "value"});
  EXPECT_TRUE(t.empty());
  EXPECT_EQ(t.str(), "d_j,quantity,value\r\n");
}

TEST(Csv, RowsAndNumbers) {
  CsvTable t({"d_j", "quantity", "value"});
  t.add(11, "norm, spectral", 0.1);
  t.add(21, "x", 1e-300);
  EXPECT_EQ(t.str(), "d_j,quantity,value\r\n11,\"norm, spectral\",0.1\r\n21,x,1e-300\r\n");
  EXPECT_THROW(t.add(1, 2), std::invalid_argument);
  EXPECT_THROW(CsvTable(std::vector<std::string>{}), std::invalid_argument);
}

TEST(Csv, NumberFormatRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 6.02214076e23, 0.0}) {
    const std::string s = format_number(v);
    EXPECT_EQ(std::stod(s), v) << s;
  }
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_EQ(format_number(-std::numeric_limits<double>::infinity()), "-inf");
}

TEST(Json, SlopeFitFields) {
  const SlopeFit f = loglog_slope({11, 21, 41, 81}, {1.0 / 11, 1.0 / 21, 1.0 / 41, 1.0 / 81});
  const Json j = to_json(f);
  EXPECT_NEAR(j["slope"].get<double>(), -1.0, 1e-12);
  EXPECT_EQ(j["n_points"].get<int>(), 4);
  EXPECT_TRUE(j.contains("ci95"));
  EXPECT_TRUE(j["ci95"].is_number());
  const Json two = to_json(loglog_slope({1, 2}, {1, 2}));
  EXPECT_TRUE(two["ci95"].is_null());
  SweepTable t;
  t.dims = {11, 21};
  t.values = {0.0, 0.0};
  fit_sweep(t);
  EXPECT_TRUE(to_json(t)["fit"].is_null());
}

TEST(Json, SummaryContents) {
  RunReport r;
  r.subcommand = "demo";
  RunConfig c;
  c.subcommand = "gap";
  r.config = c.to_json();
  r.seed = 42;
  r.wall_time_seconds = 1.5;
  r.checks.push_back(check_near("slope", -0.95, -1.0, 0.3));
  r.checks.push_back(check_below("residual", 2e-9, 1e-9));
  r.table("values", {"a"});
  const Json j = r.summary();
  EXPECT_EQ(j["subcommand"], "demo");
  EXPECT_EQ(j["seed"], 42);
  EXPECT_EQ(j["wall_time_seconds"], 1.5);
  EXPECT_EQ(j["config"]["subcommand"], "gap");
  EXPECT_FALSE(j["passed"].get<bool>());
  EXPECT_TRUE(j["checks"][0]["passed"].get<bool>());
  EXPECT_FALSE(j["checks"][1]["passed"].get<bool>());
  EXPECT_EQ(j["tables"][0], "demo_values.csv");
  r.seed.reset();
  EXPECT_TRUE(r.summary()["seed"].is_null());
}

TEST(Json, ChecksAtBoundaries) {
  EXPECT_TRUE(check_near("x", -1.3, -1.0, 0.3 + 1e-15).passed);
  EXPECT_FALSE(check_near("x", -1.31, -1.0, 0.3).passed);
  EXPECT_FALSE(check_below("x", std::nan(""), 1.0).passed);
  EXPECT_TRUE(check_equal("x", 0.0, 0.0).passed);
}

TEST(Emit, WritesTablesAndSummary) {
  const fs::path dir = scratch("emit");
  RunReport r;
  r.subcommand = "demo";
  r.table("first", {"x"}).add(1);
  r.table("second", {"y"});
  const auto files = emit(r, dir / "nested");
  ASSERT_EQ(files.size(), 3u);
  EXPECT_EQ(slurp(files[0]), "x\r\n1\r\n");
  EXPECT_EQ(slurp(files[1]), "y\r\n");
  const Json j = Json::parse(slurp(files[2]));
  EXPECT_EQ(j["subcommand"], "demo");
  EXPECT_TRUE(j["passed"].get<bool>());
  fs::remove_all(dir);
}

TEST(Emit, UnwritablePathThrows) {
  const fs::path dir = scratch("blocked");
  write_file(dir, "a regular file");
  EXPECT_THROW(write_file(dir / "child.csv", "x"), std::runtime_error);
  fs::remove_all(dir);
}

TEST(Config, ReadsKeyValueFile) {
  const fs::path dir = scratch("config");
  write_file(dir / "run.cfg", "# comment\n\n two-j = 10,20 \n--lambda=0.2\nout=\n");
  const auto entries = read_config_file((dir / "run.cfg").string());
  ASSERT_EQ(entries.size(), 3u);
  EXPECT_EQ(entries[0], std::make_pair(std::string("two-j"), std::string("10,20")));
  EXPECT_EQ(entries[1], std::make_pair(std::string("lambda"), std::string("0.2")));
  EXPECT_EQ(entries[2], std::make_pair(std::string("out"), std::string()));
  write_file(dir / "bad.cfg", "no equals sign\n");
  EXPECT_THROW(read_config_file((dir / "bad.cfg").string()), std::invalid_argument);
  EXPECT_THROW(read_config_file((dir / "missing.cfg").string()), std::invalid_argument);
  fs::remove_all(dir);
}

TEST(Config, Validation) {
  RunConfig c;
  c.subcommand = "gap";
  EXPECT_NO_THROW(c.validate());
  c.lambdas = {1.2};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.lambdas = {};
  c.order = 2;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.order = 1;
  c.subcommand = "egorov";
  c.two_js = {10};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.subcommand = "nope";
  c.two_js = {};
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Harness, GapRunIsDeterministic) {
  RunConfig c;
  c.subcommand = "gap";
  c.lambdas = {0.2, 0.5};
  c.thetas = 16;
  const RunReport a = execute(c);
  const RunReport b = execute(c);
  ASSERT_EQ(a.tables.size(), 1u);
  EXPECT_EQ(a.tables[0].second.str(), b.tables[0].second.str());
  EXPECT_EQ(a.tables[0].second.size(), 34u);
  EXPECT_TRUE(a.passed());
  EXPECT_FALSE(a.seed.has_value());
}

TEST(Harness, ChernExampleReport) {
  RunConfig c;
  c.subcommand = "chern";
  c.two_ss = {1};
  c.lambdas = {0.8};
  const RunReport r = execute(c);
  ASSERT_EQ(r.results["bands"].size(), 2u);
  EXPECT_EQ(r.results["bands"][0]["band"], "+");
  EXPECT_EQ(r.results["bands"][0]["chern"], -1);
  EXPECT_EQ(r.results["bands"][1]["band"], "-");
  EXPECT_EQ(r.results["bands"][1]["chern"], 1);
  EXPECT_TRUE(r.passed());
}

TEST(Harness, EmptyResultSet) {
  RunConfig c;
  c.subcommand = "chern";
  c.two_ss = {1};
  c.lambdas = {0.8};
  c.band = 7;
  const RunReport r = execute(c);
  EXPECT_TRUE(r.tables[0].second.empty());
  EXPECT_TRUE(r.passed());
}

TEST(Harness, ObstructionRanks) {
  RunConfig c;
  c.subcommand = "obstruction";
  c.two_js = {8};
  c.lambdas = {0.8};
  const RunReport r = execute(c);
  EXPECT_EQ(r.results["ranks"][0]["rank"], 10);
  EXPECT_EQ(r.results["ranks"][1]["rank"], 8);
  EXPECT_EQ(r.results["ranks"][0]["reference_rank"], 9);
  EXPECT_TRUE(r.passed());
}

TEST(Harness, ExitCodes) {
  std::ostringstream out, err;
  RunConfig bad;
  bad.subcommand = "gap";
  bad.lambdas = {2.0};
  EXPECT_EQ(run(bad, out, err), kExitInvalidArguments);

  RunConfig gapless;
  gapless.subcommand = "invariance-slopes";
  gapless.lambdas = {0.5};
  gapless.two_js = {10, 20};
  EXPECT_EQ(run(gapless, out, err), kExitInvalidArguments);

  const fs::path dir = scratch("exit");
  RunConfig ok;
  ok.subcommand = "gap";
  ok.lambdas = {0.3};
  ok.thetas = 4;
  ok.output = dir.string();
  EXPECT_EQ(run(ok, out, err), kExitSuccess);
  EXPECT_TRUE(fs::exists(dir / "gap_profile.csv"));
  EXPECT_TRUE(fs::exists(dir / "gap.json"));

  write_file(dir / "blocker", "file");
  ok.output = (dir / "blocker" / "sub").string();
  EXPECT_EQ(run(ok, out, err), kExitInvalidArguments);
  fs::remove_all(dir);
}

TEST(Harness, BandNames) {
  EXPECT_EQ(detail::band_name(1, 0), "+");
  EXPECT_EQ(detail::band_name(1, 1), "-");
  EXPECT_EQ(detail::band_name(2, 0), "+1");
  EXPECT_EQ(detail::band_name(2, 1), "0");
  EXPECT_EQ(detail::band_name(3, 3), "-3/2");
}
