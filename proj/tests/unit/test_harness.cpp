#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pdsim/error.hpp"
#include "pdsim/harness.hpp"
#include "pdsim/workload.hpp"

using namespace pdsim;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pdsim_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentSpec small_spec(Mode mode, const fs::path& out) {
  ExperimentSpec s;
  s.mode = mode;
  s.workload_path = PDSIM_SOURCE_DIR "/workloads/small.cfg";
  s.config_path = PDSIM_SOURCE_DIR "/configs/default.cfg";
  s.seed = 11;
  s.out_dir = out.string();
  return s;
}

}  // namespace

TEST(Workload, ZeroSigmaGivesZeros) {
  WorkloadSpec ws;
  ws.seq_len = 20;
  ws.sigma = 0.0;
  const auto w = gen_workload(ws, 1);
  for (int32_t c : w.q.codes()) EXPECT_EQ(c, 0);
  for (int32_t c : w.v.codes()) EXPECT_EQ(c, 0);
}

TEST(Workload, DeterministicInSeed) {
  WorkloadSpec ws;
  ws.seq_len = 33;
  ws.heads = 2;
  EXPECT_EQ(gen_workload(ws, 4).k, gen_workload(ws, 4).k);
  EXPECT_NE(gen_workload(ws, 4).k, gen_workload(ws, 5).k);
  EXPECT_EQ(gen_workload(ws, 4).q.rows(), 66u);
  ws.distribution = Distribution::Uniform;
  EXPECT_EQ(gen_workload(ws, 4).v, gen_workload(ws, 4).v);
}

TEST(Workload, SaveLoadRoundTrip) {
  WorkloadSpec ws;
  ws.seq_len = 40;
  ws.heads = 3;
  const auto w = gen_workload(ws, 9);
  const auto dir = scratch("wl");
  save_workload(w, dir.string());
  const auto back = load_workload((dir / "workload.cfg").string());
  EXPECT_EQ(back.q, w.q);
  EXPECT_EQ(back.k, w.k);
  EXPECT_EQ(back.v, w.v);
  EXPECT_EQ(back.heads, 3u);
}

TEST(Workload, RejectsUnknownKey) {
  std::stringstream ss("seq_len = 4\nwidth = 3\n");
  EXPECT_THROW(parse_workload_spec(ss, "w.cfg"), Error);
}

TEST(Workload, EchoRoundTrips) {
  WorkloadSpec ws;
  ws.seq_len = 77;
  ws.sigma = 0.5;
  std::stringstream ss(echo_workload_spec(ws));
  EXPECT_EQ(echo_workload_spec(parse_workload_spec(ss)), echo_workload_spec(ws));
}

TEST(Harness, ModeNames) {
  for (auto m : {Mode::Fidelity, Mode::Histogram, Mode::Cost, Mode::Compare, Mode::Sweep})
    EXPECT_EQ(parse_mode(to_string(m)), m);
  EXPECT_THROW(parse_mode("nope"), Error);
}

TEST(Harness, ReportsAreByteIdenticalAcrossRuns) {
  for (Mode m : {Mode::Fidelity, Mode::Histogram, Mode::Cost, Mode::Compare}) {
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    run_experiment(small_spec(m, a));
    run_experiment(small_spec(m, b));
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(a)) {
      EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path();
      ++files;
    }
    EXPECT_GE(files, 2u);
  }
}

TEST(Harness, FidelityMatchesOracle) {
  const auto r = run_experiment(small_spec(Mode::Fidelity, scratch("fid"))).json;
  EXPECT_TRUE(r["results"]["pass"].get<bool>());
  EXPECT_EQ(r["results"]["hybrid_oracle_mismatches"]["scores"].get<uint64_t>(), 0u);
  EXPECT_EQ(r["metadata"]["seed"].get<uint64_t>(), 11u);
}

TEST(Harness, HistogramCsvIsMonotone) {
  const auto out = scratch("hist");
  run_experiment(small_spec(Mode::Histogram, out));
  std::ifstream in(out / "histogram.csv");
  std::string line;
  std::getline(in, line);
  double prev = -1.0;
  int rows = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
    ASSERT_EQ(f.size(), 5u);
    const double frac = std::stod(f[3]);
    EXPECT_GE(frac, prev);
    prev = frac;
    ++rows;
  }
  EXPECT_EQ(rows, 3);
}

TEST(Harness, CompareReplaysFromDumpedTraces) {
  const auto out = scratch("cmp");
  const auto r = run_experiment(small_spec(Mode::Compare, out)).json["results"];
  const HardwareConfig hw = load_hardware_config(PDSIM_SOURCE_DIR "/configs/default.cfg");
  const HardwareConfig base = load_hardware_config((out / "baseline.cfg").string());
  EXPECT_EQ(echo_hardware_config(base), echo_hardware_config(single_adc_baseline(hw)));
  const auto hy = cost_report(load_trace_csv((out / "trace.csv").string()), hw);
  const auto bl = cost_report(load_trace_csv((out / "baseline_trace.csv").string()), base);
  const auto c = compare(hy, bl);
  EXPECT_EQ(c.speedup_per_area, r["speedup_per_area"].get<double>());
  EXPECT_EQ(c.energy_eff_per_area, r["energy_eff_per_area"].get<double>());
  EXPECT_EQ(r["conversion_slot_ratio"].get<double>(), 32.0);
}

TEST(Harness, ConfigHashMatchesEcho) {
  const auto out = scratch("hash");
  const auto r = run_experiment(small_spec(Mode::Cost, out)).json;
  const auto echoed = load_hardware_config((out / "config.cfg").string());
  EXPECT_EQ(r["metadata"]["config_hash"].get<std::string>(), config_hash(echoed));
}

TEST(Harness, OverridesApply) {
  auto spec = small_spec(Mode::Cost, scratch("ovr"));
  spec.tiles = 4;
  spec.noise = 0.25;
  spec.serialize_transfers = true;
  const auto hw = resolve_config(spec);
  EXPECT_EQ(hw.tiles, 4);
  EXPECT_DOUBLE_EQ(hw.noise_sigma, 0.25);
  EXPECT_TRUE(hw.serialize_flagged_transfers);
  spec.tiles = 0;
  EXPECT_THROW(resolve_config(spec), Error);
}

TEST(Harness, SweepKeepsInputOrder) {
  WorkloadSpec ws;
  ws.seq_len = 64;
  const auto pts = sweep_tiles(ws, HardwareConfig{}, {4, 1, 2}, 3);
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_EQ(pts[0].value, 4.0);
  EXPECT_EQ(pts[1].value, 1.0);
  EXPECT_GT(pts[1].report.latency_s, pts[0].report.latency_s * 0.99);
}

TEST(Harness, ValidateConfig) {
  const auto text = validate_config(PDSIM_SOURCE_DIR "/configs/default.cfg");
  EXPECT_NE(text.find("total area 17.3267 mm2"), std::string::npos) << text;
  EXPECT_THROW(validate_config(PDSIM_SOURCE_DIR "/tests/data/unknown_key.cfg"), ConfigError);
  EXPECT_THROW(validate_config("/nonexistent/pdsim.cfg"), Error);
}
