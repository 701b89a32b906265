#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace jsnet;
namespace fs = std::filesystem;

namespace {

nlohmann::json small_config() {
  return nlohmann::json{{"algorithm", "djist"}, {"topology", "regular-5"}, {"n", 50},
                        {"k", 5},               {"V", 6},                  {"m_list", {15, 20}},
                        {"signal_sets", 2},     {"matrices_per_set", 2},   {"seed", 7}};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir() {
  const auto dir = fs::temp_directory_path() / ("jsnet_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Config, ParsesFlatKeys) {
  auto j = small_config();
  j["tau_overrides"] = {{"15", 0.01}};
  j["stop_scope"] = "per_node";
  const auto c = parse_config(j);
  EXPECT_EQ(c.algorithm, Algorithm::DjIst);
  EXPECT_FALSE(c.topology.complete);
  EXPECT_EQ(c.topology.degree, 5u);
  EXPECT_EQ(c.sweep, SweepVariable::Measurements);
  EXPECT_EQ(c.sweep_values, (std::vector<std::size_t>{15, 20}));
  EXPECT_EQ(c.runs(), 4u);
  EXPECT_DOUBLE_EQ(c.tau_overrides.at(15), 0.01);
  EXPECT_EQ(c.params.stop_scope, StopScope::PerNode);
}

TEST(Config, DefaultsToDeskScaleEnsemble) {
  auto j = small_config();
  j.erase("signal_sets");
  j.erase("matrices_per_set");
  auto c = parse_config(j);
  EXPECT_EQ(c.runs(), 50u);
  c.use_full_ensemble();
  EXPECT_EQ(c.runs(), 250u);
}

TEST(Config, AdmmUsesItsOwnAlpha) {
  auto j = small_config();
  j["algorithm"] = "djadmm";
  EXPECT_DOUBLE_EQ(parse_config(j).params.alpha, 5e-3);
  j["alpha"] = 1e-3;
  EXPECT_DOUBLE_EQ(parse_config(j).params.alpha, 1e-3);
}

TEST(Config, FailsFast) {
  auto unknown = small_config();
  unknown["lamda"] = 1.0;
  EXPECT_THROW(parse_config(unknown), ConfigError);
  auto both = small_config();
  both["V_list"] = {6, 8};
  EXPECT_THROW(parse_config(both), ConfigError);
  auto none = small_config();
  none.erase("m_list");
  EXPECT_THROW(parse_config(none), ConfigError);
  auto bad_topo = small_config();
  bad_topo["topology"] = "star";
  EXPECT_THROW(parse_config(bad_topo), ConfigError);
  auto bad_type = small_config();
  bad_type["n"] = "fifty";
  EXPECT_THROW(parse_config(bad_type), ConfigError);
  auto bad_tau = small_config();
  bad_tau["tau"] = -1.0;
  EXPECT_THROW(parse_config(bad_tau), ConfigError);
  auto zero_runs = small_config();
  zero_runs["signal_sets"] = 0;
  EXPECT_THROW(parse_config(zero_runs), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), IoError);
}

TEST(Sweep, SingleNodeCompleteGivesOneRow) {
  const auto c = parse_config({{"algorithm", "djist"}, {"topology", "complete"}, {"n", 20}, {"k", 2},
                               {"V_list", {1}}, {"m", 8}, {"signal_sets", 1}, {"matrices_per_set", 1}});
  const auto out = run_sweep(c);
  ASSERT_EQ(out.rows.size(), 1u);
  EXPECT_EQ(out.rows[0].nodes, 1u);
  EXPECT_EQ(out.rows[0].total_bits, 0u);
}

TEST(Sweep, ByteIdenticalAcrossRunsAndThreadCounts) {
  auto c = parse_config(small_config());
  const auto dir = scratch_dir();
  write_csv_atomic(dir / "a.csv", run_sweep(c).rows);
  write_csv_atomic(dir / "b.csv", run_sweep(c).rows);
  c.threads = 3;
  write_csv_atomic(dir / "c.csv", run_sweep(c).rows);
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "c.csv"));
  EXPECT_FALSE(fs::exists(dir / "a.csv.tmp"));
  fs::remove_all(dir);
}

TEST(Sweep, RowsAreOrderedAndComplete) {
  const auto c = parse_config(small_config());
  const auto rows = run_sweep(c).rows;
  ASSERT_EQ(rows.size(), 8u);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    EXPECT_EQ(rows[t].m, c.sweep_values[t / 4]);
    EXPECT_EQ(rows[t].run_id, t % 4);
    EXPECT_EQ(rows[t].algorithm, "djist");
    EXPECT_EQ(rows[t].topology, "regular-5");
    EXPECT_TRUE(std::isfinite(rows[t].rse));
  }
}

TEST(Sweep, AlgorithmsShareInstancesAtAPoint) {
  auto j = small_config();
  j["algorithm"] = "dcomp1";
  const auto a = execute_run(parse_config(j), 20, 3);
  j["algorithm"] = "dcomp2";
  const auto b = execute_run(parse_config(j), 20, 3);
  EXPECT_EQ(a.instance.support, b.instance.support);
  EXPECT_TRUE((a.instance.A[2].array() == b.instance.A[2].array()).all());
}

TEST(Sweep, MatricesVaryWithinASignalSet) {
  const auto c = parse_config(small_config());
  const auto r0 = execute_run(c, 15, 0), r1 = execute_run(c, 15, 1), r2 = execute_run(c, 15, 2);
  EXPECT_EQ(r0.instance.support, r1.instance.support);
  EXPECT_TRUE((r0.instance.x_star[0].array() == r1.instance.x_star[0].array()).all());
  EXPECT_FALSE((r0.instance.A[0].array() == r1.instance.A[0].array()).all());
  EXPECT_FALSE((r0.instance.x_star[0].array() == r2.instance.x_star[0].array()).all());
}

TEST(Sweep, TauIsValidatedOrShrunk) {
  auto j = small_config();
  j["tau"] = 10.0;
  EXPECT_THROW(run_sweep(parse_config(j)), InvalidParameter);
  j["auto_shrink_tau"] = true;
  const auto out = run_sweep(parse_config(j));
  EXPECT_EQ(out.warnings.size(), out.rows.size());
  auto o = small_config();
  o["tau_overrides"] = {{"15", 10.0}};
  EXPECT_THROW(run_sweep(parse_config(o)), InvalidParameter);
}

TEST(Csv, RoundTrip) {
  const auto rows = run_sweep(parse_config(small_config())).rows;
  std::stringstream ss;
  write_rows(ss, rows);
  EXPECT_EQ(read_rows(ss), rows);
  SweepRow odd;
  odd.algorithm = "dcomp2";
  odd.topology = "complete";
  odd.rse = 1.2345678901234567e-31;
  odd.ase = 0.1 + 0.2;
  std::stringstream s2;
  write_rows(s2, {odd});
  EXPECT_EQ(read_rows(s2), std::vector<SweepRow>{odd});
}

TEST(Csv, RejectsMalformedInput) {
  std::stringstream empty;
  EXPECT_THROW(read_rows(empty), IoError);
  std::stringstream header("a,b,c\n");
  EXPECT_THROW(read_rows(header), IoError);
  std::stringstream short_row(std::string(sweep_csv_header) + "\ndjist,complete,1\n");
  EXPECT_THROW(read_rows(short_row), IoError);
  std::stringstream bad_number(std::string(sweep_csv_header) + "\ndjist,complete,x,1,1,1,0,0,1,0,1,0,,1\n");
  EXPECT_THROW(read_rows(bad_number), IoError);
}

TEST(Summarize, SingleRowAndGroups) {
  SweepRow r;
  r.algorithm = "dcomp1";
  r.topology = "regular-5";
  r.m = 10;
  r.ase = 0.25;
  r.total_bits = 2800;
  const auto one = summarize({r}, {"algorithm"});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].ase.mean, 0.25);
  EXPECT_EQ(one[0].ase.min, 0.25);
  EXPECT_EQ(one[0].ase.max, 0.25);

  auto r2 = r;
  r2.total_bits = 2520;
  r2.ase = 0.75;
  auto r3 = r;
  r3.m = 12;
  const auto by_m = summarize({r, r2, r3}, {"m"});
  ASSERT_EQ(by_m.size(), 2u);
  EXPECT_EQ(by_m[0].count, 2u);
  EXPECT_EQ(by_m[0].bits.max, 2800.0);
  EXPECT_EQ(by_m[0].bits.min, 2520.0);
  EXPECT_EQ(by_m[0].ase.mean, 0.5);
  EXPECT_THROW(summarize({}, {"m"}), InvalidParameter);
  EXPECT_THROW(summarize({r}, {"color"}), InvalidParameter);
}

TEST(Plot, OneSeriesPerAlgorithm) {
  std::vector<SweepRow> rows;
  for (const char* algo : {"djist", "djadmm", "dcomp1", "dcomp2"})
    for (std::size_t m : {8u, 16u, 24u}) {
      SweepRow r;
      r.algorithm = algo;
      r.topology = "regular-5";
      r.m = m;
      r.ase = m == 24 ? 0.0 : 0.1 / static_cast<double>(m);
      rows.push_back(r);
    }
  PlotSpec spec;
  spec.log_y = true;
  const auto series = collect_series(rows, spec);
  EXPECT_EQ(series.size(), 4u);
  const auto svg = render_svg(series, spec);
  std::size_t polylines = 0;
  for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++polylines;
  EXPECT_EQ(polylines, 4u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  const auto dir = scratch_dir();
  emit_plot(rows, spec, dir / "p.svg");
  EXPECT_TRUE(fs::exists(dir / "p.svg"));
  fs::remove_all(dir);
}

TEST(Plot, SinglePointAndMissingSeries) {
  SweepRow r;
  r.algorithm = "djist";
  r.topology = "complete";
  r.m = 10;
  r.ase = 0.5;
  PlotSpec spec;
  EXPECT_NO_THROW(render_svg(collect_series({r}, spec), spec));
  spec.series = {"djist/complete"};
  EXPECT_EQ(collect_series({r}, spec).size(), 1u);
  spec.series = {"dcomp2"};
  EXPECT_THROW(collect_series({r}, spec), MissingSeries);
}
