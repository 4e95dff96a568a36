// Runs every acceptance criterion and prints one PASS/FAIL line each.
// Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pdsim/cost_model.hpp"
#include "pdsim/dataflow.hpp"
#include "pdsim/digital_die.hpp"
#include "pdsim/harness.hpp"
#include "pdsim/logging.hpp"
#include "pdsim/photonic.hpp"
#include "pdsim/qtensor.hpp"

using namespace pdsim;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Check {
  Outcome* out;
  void expect(bool ok, const std::string& what) {
    if (!ok && out->pass) {
      out->pass = false;
      out->detail = what;
    }
  }
};

std::string fmt_num(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

const std::string kSource = PDSIM_SOURCE_DIR;

// Random 4-bit operand pairs shared by the fidelity and exactness criteria.
struct Pair {
  oracle::Codes a, b;
};

std::vector<Pair> random_pairs() {
  std::mt19937_64 rng(2024);
  std::vector<Pair> out;
  for (int t = 0; t < 100; ++t) {
    const std::size_t m = 1 + rng() % 256, k = 1 + rng() % 256, n = 1 + rng() % 256;
    out.push_back({oracle::random_codes(rng, m, k), oracle::random_codes(rng, k, n)});
  }
  return out;
}

Outcome table_totals() {
  Outcome o;
  Check c{&o};
  const auto hw = load_hardware_config(kSource + "/configs/default.cfg");
  const double area = aggregate_area(hw).total;
  const double power = aggregate_power(hw).total / 1000;
  c.expect(std::fabs(area - 17.38) <= 0.01 * 17.38, "area " + fmt_num(area));
  c.expect(std::fabs(power - 39.9) <= 0.01 * 39.9, "power " + fmt_num(power));
  if (o.pass) o.detail = "area " + fmt_num(area) + " mm2, power " + fmt_num(power) + " W";
  return o;
}

Outcome breakdown_shares() {
  Outcome o;
  Check c{&o};
  const auto hw = load_hardware_config(kSource + "/configs/default.cfg");
  const auto a = aggregate_area(hw);
  const auto p = aggregate_power(hw);
  struct Row {
    const char* label;
    double got, want;
  };
  const Row rows[] = {{"area dptc", a.category_fraction("dptc") * 100, 45.1},
                      {"area memory", a.category_fraction("memory") * 100, 34.7},
                      {"area pdac", a.category_fraction("pdac") * 100, 14.2},
                      {"power dptc", p.category_fraction("dptc") * 100, 49.5},
                      {"power pdac", p.category_fraction("pdac") * 100, 41.6}};
  std::string detail;
  for (const auto& r : rows) {
    c.expect(std::fabs(r.got - r.want) <= 1.0, std::string(r.label) + " " + fmt_num(r.got));
    detail += std::string(detail.empty() ? "" : ", ") + r.label + " " + fmt_num(r.got) + "%";
  }
  if (o.pass) o.detail = detail;
  return o;
}

Outcome hybrid_fidelity(const std::vector<Pair>& pairs) {
  Outcome o;
  Check c{&o};
  std::mt19937_64 rng(7);
  for (std::size_t t = 0; t < pairs.size(); ++t) {
    HardwareConfig hw;
    hw.adc_lsb = t % 2 == 0 ? 1.0 : 0.5 * static_cast<double>(1 + rng() % 6);
    const auto& [a, b] = pairs[t];
    const auto r = run_gemm(oracle::to_matrix(a), oracle::to_matrix(b), hw, {0, t, {}});
    c.expect(r.out.values == oracle::hybrid(a, b, hw.adc_bits, hw.adc_lsb),
             "workload " + std::to_string(t) + " differs from the hybrid oracle");
  }
  if (o.pass) o.detail = std::to_string(pairs.size()) + " workloads bit-exact";
  return o;
}

Outcome exactness(const std::vector<Pair>& pairs) {
  Outcome o;
  Check c{&o};
  HardwareConfig hw;
  hw.adc_bits = 30;
  for (std::size_t t = 0; t < pairs.size(); ++t) {
    const auto a = oracle::to_matrix(pairs[t].a);
    const auto b = oracle::to_matrix(pairs[t].b);
    const auto r = run_gemm(a, b, hw, {0, t, {}});
    const auto exact = int_gemm(a, b);
    bool same = r.out.values.size() == exact.values.size();
    for (std::size_t i = 0; same && i < exact.values.size(); ++i)
      same = r.out.values[i] == static_cast<double>(exact.values[i]);
    c.expect(same, "workload " + std::to_string(t) + " differs from int_gemm");
  }
  if (o.pass) o.detail = std::to_string(pairs.size()) + " workloads equal int_gemm";
  return o;
}

Outcome histogram() {
  Outcome o;
  Check c{&o};
  const std::vector<int> bits{2, 4, 8};
  double synthetic_4bit = 0.0;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    WorkloadSpec ws;
    ws.seq_len = 128;
    const auto w = gen_workload(ws, seed);
    const std::vector<GemmOperands> ops{{w.q, w.k.transposed()}};
    const auto h = resolution_histogram(ops, bits, 64);
    for (std::size_t i = 1; i < h.bins.size(); ++i)
      c.expect(h.bins[i].fraction_in_range >= h.bins[i - 1].fraction_in_range,
               "non-monotone at seed " + std::to_string(seed));
    c.expect(h.bins[1].fraction_in_range < 1.0, "no over-range signals at 4 bits");
    if (seed == 1) synthetic_4bit = h.bins[1].fraction_in_range;
  }
  // Ternary operands over 64 terms keep every partial within +-64.
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    const auto a = oracle::random_codes(rng, 1 + rng() % 200, 1 + rng() % 200, 2);
    const auto b = oracle::random_codes(rng, a.cols, 1 + rng() % 200, 2);
    const std::vector<GemmOperands> ops{{oracle::to_matrix(a, 2), oracle::to_matrix(b, 2)}};
    const auto h = resolution_histogram(ops, bits, 64);
    c.expect(h.bins[2].fraction_in_range == 1.0, "8-bit fraction below 1 for bounded partials");
    for (std::size_t i = 1; i < h.bins.size(); ++i)
      c.expect(h.bins[i].fraction_in_range >= h.bins[i - 1].fraction_in_range, "non-monotone");
  }
  if (o.pass)
    o.detail = "synthetic gaussian in-range fraction at 4 bits " + fmt_num(synthetic_4bit);
  return o;
}

Outcome softmax_lut() {
  Outcome o;
  Check c{&o};
  const SoftmaxLut lut;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> d(-16.0, 0.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const FixedArg a = FixedArg::from_real(d(rng));
    worst = std::max(worst, std::fabs(lut.lut_exp(a) - std::exp(a.value())));
  }
  c.expect(worst <= 1.0 / 64, "max error " + fmt_num(worst));
  std::normal_distribution<double> s(0.0, 30.0);
  double worst_sum = 0.0;
  for (int r = 0; r < 500; ++r) {
    std::vector<double> row(1 + rng() % 512);
    for (double& x : row) x = std::round(s(rng));
    const auto p = softmax_row(row, 0.03, 64, lut);
    worst_sum = std::max(worst_sum, std::fabs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0));
  }
  c.expect(worst_sum <= 1e-12, "row sum off by " + fmt_num(worst_sum));
  for (std::size_t n : {1, 7, 128, 333}) {
    const std::vector<double> row(n, -4.0);
    const auto p = softmax_row(row, 0.1, 64, lut);
    for (double v : p) c.expect(v == p[0], "uniform row not uniform");
  }
  if (o.pass) o.detail = "max |lut-exp| " + fmt_num(worst) + ", max |sum-1| " + fmt_num(worst_sum);
  return o;
}

Outcome schedule() {
  Outcome o;
  Check c{&o};
  std::mt19937_64 rng(31);
  for (int t = 0; t < 50; ++t) {
    const auto m = oracle::to_matrix(oracle::random_codes(rng, 1 + rng() % 300, 1 + rng() % 300));
    c.expect(reassemble(partition(m, 64, 64)) == m, "partition round-trip differs");
  }
  const auto hw = load_hardware_config(kSource + "/configs/default.cfg");
  const auto s = build_schedule({128, 128, 128}, hw);
  c.expect(s.ops.size() == 8, "array ops " + std::to_string(s.ops.size()));
  c.expect(conversion_slots_per_op(hw) == 128,
           "slots per op " + std::to_string(conversion_slots_per_op(hw)));
  if (o.pass) o.detail = "8 array ops, 128 slots per op";
  return o;
}

Outcome baseline() {
  Outcome o;
  Check c{&o};
  ExperimentSpec spec;
  spec.mode = Mode::Compare;
  spec.config_path = kSource + "/configs/default.cfg";
  spec.workload_path = kSource + "/workloads/bert_base.cfg";
  spec.seed = 7;
  const auto r = run_experiment(spec).json["results"];
  const double sp = r["speedup_per_area"].get<double>();
  const double ee = r["energy_eff_per_area"].get<double>();
  const double slots = r["conversion_slot_ratio"].get<double>();
  c.expect(sp > 1.0, "speedup/area " + fmt_num(sp));
  c.expect(ee > 1.0, "energy-efficiency/area " + fmt_num(ee));
  c.expect(slots == 32.0, "slot ratio " + fmt_num(slots));
  const std::string detail = "speedup/area " + fmt_num(sp) + " (published 9.8), energy-eff/area " +
                             fmt_num(ee) + " (published 2.2), slot ratio " + fmt_num(slots);
  if (o.pass)
    o.detail = detail;
  else
    o.detail += "; " + detail;
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  Outcome o;
  Check c{&o};
  const fs::path root = fs::temp_directory_path() / "pdsim_acceptance_determinism";
  std::size_t files = 0;
  for (Mode m : {Mode::Fidelity, Mode::Histogram, Mode::Cost, Mode::Compare, Mode::Sweep}) {
    std::vector<fs::path> dirs;
    for (const char* run : {"a", "b"}) {
      ExperimentSpec spec;
      spec.mode = m;
      spec.workload_path = kSource + "/workloads/small.cfg";
      spec.seed = 5;
      spec.noise = 0.5;
      spec.dump_output = true;
      spec.sweep_seq_lens = {32, 64};
      spec.sweep_tiles = {4, 8};
      const fs::path dir = root / std::string(to_string(m)) / run;
      fs::remove_all(dir);
      spec.out_dir = dir.string();
      run_experiment(spec);
      dirs.push_back(dir);
    }
    for (const auto& e : fs::directory_iterator(dirs[0])) {
      c.expect(slurp(e.path()) == slurp(dirs[1] / e.path().filename()),
               std::string(to_string(m)) + "/" + e.path().filename().string() + " differs");
      ++files;
    }
  }
  if (o.pass) o.detail = std::to_string(files) + " report files byte-identical";
  return o;
}

Outcome scalability() {
  Outcome o;
  Check c{&o};
  const auto hw = load_hardware_config(kSource + "/configs/default.cfg");
  WorkloadSpec ws;
  ws.d_k = 64;
  const auto by_len = sweep_seq_len(ws, hw, {128, 256, 512}, 3);
  double lo = by_len[0].cycles_per_shard(), hi = lo;
  std::string detail = "cycles";
  for (std::size_t i = 0; i < by_len.size(); ++i) {
    detail += " " + std::to_string(by_len[i].compute_cycles);
    if (i > 0)
      c.expect(by_len[i].compute_cycles > by_len[i - 1].compute_cycles, "cycles do not grow");
    lo = std::min(lo, by_len[i].cycles_per_shard());
    hi = std::max(hi, by_len[i].cycles_per_shard());
  }
  c.expect(hi <= lo * 1.05, "cycles per shard spread " + fmt_num(lo) + ".." + fmt_num(hi));
  ws.seq_len = 512;
  const auto by_tiles = sweep_tiles(ws, hw, {8, 16, 32, 64}, 3);
  detail += "; hbm bytes";
  for (std::size_t i = 0; i < by_tiles.size(); ++i) {
    detail += " " + std::to_string(by_tiles[i].traffic.hbm_bytes());
    if (i > 0)
      c.expect(by_tiles[i].traffic.hbm_bytes() >= by_tiles[i - 1].traffic.hbm_bytes(),
               "HBM bytes drop at " + fmt_num(by_tiles[i].value) + " tiles");
  }
  if (o.pass) o.detail = detail;
  return o;
}

}  // namespace

int main() {
  configure_logging();
  const auto pairs = random_pairs();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"table_totals", table_totals},
      {"breakdown_shares", breakdown_shares},
      {"hybrid_fidelity", [&] { return hybrid_fidelity(pairs); }},
      {"exactness_dominance", [&] { return exactness(pairs); }},
      {"histogram_monotonicity", histogram},
      {"softmax_lut_accuracy", softmax_lut},
      {"schedule_correctness", schedule},
      {"baseline_comparison", baseline},
      {"determinism", determinism},
      {"scalability", scalability},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " ["
              << fmt_num(secs) << " s]\n";
    failed += o.pass ? 0 : 1;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << "\n";
  return failed == 0 ? 0 : 1;
}
