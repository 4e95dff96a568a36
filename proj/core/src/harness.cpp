#include "pdsim/harness.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <ostream>

#include "pdsim/error.hpp"
#include "pdsim/photonic.hpp"
#include "pdsim/reference.hpp"

#ifndef PDSIM_VERSION
#define PDSIM_VERSION "0.0.0"
#endif

namespace pdsim {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Published ratios for the single-ADC comparison; printed for calibration only.
constexpr double kTargetSpeedupPerArea = 9.8;
constexpr double kTargetEnergyEffPerArea = 2.2;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("{}: cannot open for writing", path.string()));
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json workload_json(const WorkloadSpec& w) {
  return json{{"seq_len", w.seq_len},
              {"d_k", w.d_k},
              {"heads", w.heads},
              {"batch", w.batch},
              {"bits", w.bits},
              {"source", w.source == WorkloadSource::Files ? "files" : "synthetic"},
              {"distribution", w.distribution == Distribution::Gaussian ? "gaussian" : "uniform"},
              {"sigma", w.sigma},
              {"range", w.range}};
}

json metadata(const ExperimentSpec& spec, const HardwareConfig& hw) {
  return json{{"name", spec.name},
              {"mode", std::string(to_string(spec.mode))},
              {"seed", spec.seed},
              {"config_hash", config_hash(hw)},
              {"version", PDSIM_VERSION}};
}

double fraction(uint64_t part, uint64_t whole) {
  return whole > 0 ? static_cast<double>(part) / static_cast<double>(whole) : 0.0;
}

void write_real_text(const fs::path& path, const RealMatrix& m) {
  std::string text;
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      if (c > 0) text += ' ';
      text += fmt::format("{}", m.at(r, c));
    }
    text += '\n';
  }
  write_text(path, text);
}

json run_fidelity(const ExperimentSpec& spec, const HardwareConfig& hw, const AttentionWorkload& w,
                  const fs::path* out) {
  const AttentionResult res = run_attention(w, hw, spec.seed, true);
  const AdcSpec adc = hw.adc_spec();
  const std::size_t depth = hw.dptc_spec().k_depth();
  const std::size_t L = w.seq_len;

  uint64_t score_mismatch = 0;
  uint64_t output_mismatch = 0;
  double score_max_vs_exact = 0.0;
  for (std::size_t blk = 0; blk < w.blocks(); ++blk) {
    const HeadResult& h = res.heads[blk];
    const QuantizedMatrix qh = slice_rows(w.q, blk * L, L);
    const QuantizedMatrix kt = slice_rows(w.k, blk * L, L).transposed();
    const QuantizedMatrix vh = slice_rows(w.v, blk * L, L);
    const std::vector<double> s_ref = hybrid_reference(qh, kt, adc, depth);
    const IntMatrix s_exact = int_gemm(qh, kt);
    for (std::size_t i = 0; i < s_ref.size(); ++i) {
      if (hw.hybrid()) score_mismatch += h.s.values[i] != s_ref[i] ? 1 : 0;
      score_max_vs_exact = std::max(
          score_max_vs_exact, std::abs(h.s.values[i] - static_cast<double>(s_exact.values[i])));
    }
    if (hw.hybrid()) {
      const std::vector<double> o_ref = hybrid_reference(h.p, vh, adc, depth);
      for (std::size_t i = 0; i < o_ref.size(); ++i) output_mismatch += h.o.values[i] != o_ref[i] ? 1 : 0;
    }
  }

  double max_err = 0.0;
  double max_ref = 0.0;
  for (std::size_t blk = 0; blk < w.blocks(); ++blk) {
    const RealMatrix ref = reference_attention(dequantize(slice_rows(w.q, blk * L, L)),
                                               dequantize(slice_rows(w.k, blk * L, L)),
                                               dequantize(slice_rows(w.v, blk * L, L)));
    for (std::size_t i = 0; i < ref.values.size(); ++i) {
      const double got = res.output.values[blk * L * w.d_k + i];
      max_err = std::max(max_err, std::abs(got - ref.values[i]));
      max_ref = std::max(max_ref, std::abs(ref.values[i]));
    }
  }

  const bool noiseless = hw.noise_sigma == 0.0 && hw.hybrid();
  const bool oracle_match = noiseless ? score_mismatch == 0 && output_mismatch == 0 : true;
  if (out != nullptr && spec.dump_output) write_real_text(*out / "output.txt", res.output);

  const auto& ss = res.score_stats;
  return json{{"score_gemm", to_json(res.score_stats)},
              {"output_gemm", to_json(res.output_stats)},
              {"overres_fraction_scores", fraction(ss.overres, ss.signals)},
              {"hybrid_oracle_mismatches", {{"scores", score_mismatch}, {"outputs", output_mismatch}}},
              {"hybrid_oracle_checked", noiseless},
              {"score_max_abs_error_vs_exact", score_max_vs_exact},
              {"output_max_abs_error_vs_reference", max_err},
              {"output_max_abs_reference", max_ref},
              {"pass", oracle_match}};
}

json run_histogram(const ExperimentSpec& spec, const HardwareConfig& hw, const AttentionWorkload& w,
                   const fs::path* out) {
  std::vector<GemmOperands> ops;
  const std::size_t L = w.seq_len;
  for (std::size_t blk = 0; blk < w.blocks(); ++blk) {
    ops.push_back(GemmOperands{slice_rows(w.q, blk * L, L), slice_rows(w.k, blk * L, L).transposed()});
  }
  const ResolutionHistogram h =
      resolution_histogram(ops, spec.bits, hw.dptc_spec().k_depth(), hw.adc_lsb);
  json bins = json::array();
  std::string csv = "bits,within,total,fraction_in_range,fraction_over_range\n";
  for (const auto& b : h.bins) {
    bins.push_back(json{{"bits", b.bits},
                        {"within", b.within},
                        {"fraction_in_range", b.fraction_in_range},
                        {"fraction_over_range", 1.0 - b.fraction_in_range}});
    csv += fmt::format("{},{},{},{},{}\n", b.bits, b.within, h.total_signals, b.fraction_in_range,
                       1.0 - b.fraction_in_range);
  }
  bool monotone = true;
  for (std::size_t i = 1; i < h.bins.size(); ++i) {
    monotone = monotone && h.bins[i].fraction_in_range >= h.bins[i - 1].fraction_in_range;
  }
  if (out != nullptr) write_text(*out / "histogram.csv", csv);
  return json{{"total_signals", h.total_signals}, {"bins", bins}, {"monotone", monotone}};
}

struct CostRun {
  AttentionResult result;
  CostReport report;
};

CostRun cost_run(const HardwareConfig& hw, const AttentionWorkload& w, uint64_t seed) {
  CostRun r{run_attention(w, hw, seed), {}};
  r.report = cost_report(r.result.trace, hw);
  return r;
}

json run_json(const CostRun& r, const HardwareConfig& hw) {
  return json{{"cost", to_json(r.report)},
              {"traffic", to_json(traffic_account(r.result.trace))},
              {"compute_cycles", r.result.trace.compute_cycles()},
              {"windows", r.result.trace.windows.size()},
              {"score_gemm", to_json(r.result.score_stats)},
              {"output_gemm", to_json(r.result.output_stats)},
              {"conversion_slots_per_array_op", conversion_slots_per_op(hw)},
              {"residency",
               {{"capacity_bytes", r.result.residency.capacity_bytes},
                {"q", r.result.residency.q},
                {"k", r.result.residency.k},
                {"v", r.result.residency.v},
                {"s", r.result.residency.s},
                {"p", r.result.residency.p}}}};
}

json run_cost(const HardwareConfig& hw, const AttentionWorkload& w, uint64_t seed,
              const fs::path* out) {
  const CostRun r = cost_run(hw, w, seed);
  if (out != nullptr) {
    save_trace_csv((*out / "trace.csv").string(), r.result.trace);
    std::ofstream cost(*out / "cost.csv");
    write_cost_csv(cost, {{"candidate", &r.report}});
    std::ofstream bd(*out / "breakdown.csv");
    write_breakdown_csv(bd, {{"candidate", &r.report}});
  }
  return run_json(r, hw);
}

json run_compare(const HardwareConfig& hw, const AttentionWorkload& w, uint64_t seed,
                 const fs::path* out) {
  const HardwareConfig base_hw = single_adc_baseline(hw);
  const CostRun hy = cost_run(hw, w, seed);
  const CostRun base = cost_run(base_hw, w, seed);
  const Comparison cmp = compare(hy.report, base.report);
  const uint64_t hy_slots = conversion_slots_per_op(hw);
  const uint64_t base_slots = conversion_slots_per_op(base_hw);
  spdlog::info("speedup/area {:.3f} (published {}), energy-efficiency/area {:.3f} (published {})",
               cmp.speedup_per_area, kTargetSpeedupPerArea, cmp.energy_eff_per_area,
               kTargetEnergyEffPerArea);
  if (out != nullptr) {
    save_trace_csv((*out / "trace.csv").string(), hy.result.trace);
    save_trace_csv((*out / "baseline_trace.csv").string(), base.result.trace);
    write_text(*out / "baseline.cfg", echo_hardware_config(base_hw));
    std::ofstream cost(*out / "cost.csv");
    write_cost_csv(cost, {{"candidate", &hy.report}, {"baseline", &base.report}});
    std::ofstream bd(*out / "breakdown.csv");
    write_breakdown_csv(bd, {{"candidate", &hy.report}, {"baseline", &base.report}});
  }
  return json{{"candidate", run_json(hy, hw)},
              {"baseline", run_json(base, base_hw)},
              {"baseline_config_hash", config_hash(base_hw)},
              {"speedup_per_area", cmp.speedup_per_area},
              {"energy_eff_per_area", cmp.energy_eff_per_area},
              {"conversion_slot_ratio",
               static_cast<double>(base_slots) / static_cast<double>(hy_slots)},
              {"published_speedup_per_area", kTargetSpeedupPerArea},
              {"published_energy_eff_per_area", kTargetEnergyEffPerArea}};
}

json point_json(const SweepPoint& p) {
  return json{{"axis", p.axis},
              {"value", p.value},
              {"cost", to_json(p.report)},
              {"traffic", to_json(p.traffic)},
              {"compute_cycles", p.compute_cycles},
              {"output_shards", p.output_shards},
              {"array_ops", p.array_ops},
              {"cycles_per_shard", p.cycles_per_shard()}};
}

json run_sweep(const ExperimentSpec& spec, const HardwareConfig& hw, const WorkloadSpec& ws,
               const fs::path* out) {
  std::vector<SweepPoint> points = sweep_seq_len(ws, hw, spec.sweep_seq_lens, spec.seed);
  const auto by_tiles = sweep_tiles(ws, hw, spec.sweep_tiles, spec.seed);
  points.insert(points.end(), by_tiles.begin(), by_tiles.end());
  json arr = json::array();
  std::string csv =
      "axis,value,latency_s,energy_j,hbm_bytes,compute_cycles,output_shards,cycles_per_shard,"
      "array_ops,perf_per_area,energy_eff_per_area\n";
  for (const auto& p : points) {
    arr.push_back(point_json(p));
    csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", p.axis, p.value, p.report.latency_s,
                       p.report.energy_j, p.traffic.hbm_bytes(), p.compute_cycles, p.output_shards,
                       p.cycles_per_shard(), p.array_ops, p.report.perf_per_area,
                       p.report.energy_eff_per_area);
  }
  if (out != nullptr) write_text(*out / "sweep.csv", csv);
  return json{{"points", arr}};
}

SweepPoint sweep_point(std::string axis, double value, const WorkloadSpec& ws,
                       const HardwareConfig& hw, uint64_t seed) {
  const AttentionWorkload w = gen_workload(ws, seed);
  const AttentionResult r = run_attention(w, hw, seed);
  const AttentionShape shape = attention_shape(ws.seq_len, ws.d_k, w.blocks(), hw);
  SweepPoint p;
  p.axis = std::move(axis);
  p.value = value;
  p.report = cost_report(r.trace, hw);
  p.traffic = traffic_account(r.trace);
  p.compute_cycles = r.trace.compute_cycles();
  p.output_shards = shape.output_shards;
  p.array_ops = shape.array_ops;
  return p;
}

template <class Job>
std::vector<SweepPoint> fan_out(std::size_t n, Job job) {
  std::vector<std::future<SweepPoint>> futures;
  futures.reserve(n);
  for (std::size_t i = 0; i < n; ++i) futures.push_back(std::async(std::launch::async, job, i));
  std::vector<SweepPoint> out;
  out.reserve(n);
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

}  // namespace

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Fidelity: return "fidelity";
    case Mode::Histogram: return "histogram";
    case Mode::Cost: return "cost";
    case Mode::Compare: return "compare";
    case Mode::Sweep: return "sweep";
  }
  return "?";
}

Mode parse_mode(std::string_view s) {
  for (auto m : {Mode::Fidelity, Mode::Histogram, Mode::Cost, Mode::Compare, Mode::Sweep}) {
    if (s == to_string(m)) return m;
  }
  throw Error(fmt::format("unknown mode \"{}\"", s));
}

HardwareConfig resolve_config(const ExperimentSpec& spec) {
  HardwareConfig hw = spec.config_path.empty() ? HardwareConfig{} : load_hardware_config(spec.config_path);
  if (spec.tiles) hw.tiles = *spec.tiles;
  if (spec.noise) hw.noise_sigma = *spec.noise;
  if (spec.serialize_transfers) hw.serialize_flagged_transfers = true;
  hw.validate();
  return hw;
}

WorkloadSpec resolve_workload(const ExperimentSpec& spec) {
  return spec.workload_path.empty() ? WorkloadSpec{} : load_workload_spec(spec.workload_path);
}

AttentionShape attention_shape(std::size_t seq_len, std::size_t d_k, std::size_t blocks,
                               const HardwareConfig& hw) {
  AttentionShape s;
  for (const GemmShape g : {GemmShape{seq_len, d_k, seq_len}, GemmShape{seq_len, seq_len, d_k}}) {
    const TileSchedule t = build_schedule(g, hw);
    s.array_ops += t.ops.size();
    s.cycles += t.cycles;
    s.output_shards += t.row_shards * t.col_shards;
  }
  s.array_ops *= blocks;
  s.cycles *= blocks;
  s.output_shards *= blocks;
  return s;
}

std::vector<SweepPoint> sweep_seq_len(const WorkloadSpec& base, const HardwareConfig& hw,
                                      const std::vector<std::size_t>& seq_lens, uint64_t seed) {
  if (seq_lens.empty()) throw Error("sweep: no sequence lengths");
  return fan_out(seq_lens.size(), [&](std::size_t i) {
    WorkloadSpec ws = base;
    ws.seq_len = seq_lens[i];
    return sweep_point("seq_len", static_cast<double>(seq_lens[i]), ws, hw, seed);
  });
}

std::vector<SweepPoint> sweep_tiles(const WorkloadSpec& base, const HardwareConfig& hw,
                                    const std::vector<int>& tiles, uint64_t seed) {
  if (tiles.empty()) throw Error("sweep: no tile counts");
  return fan_out(tiles.size(), [&](std::size_t i) {
    HardwareConfig h = hw;
    h.tiles = tiles[i];
    h.validate();
    return sweep_point("tiles", tiles[i], base, h, seed);
  });
}

SimulationReport run_experiment(const ExperimentSpec& spec) {
  const HardwareConfig hw = resolve_config(spec);
  const WorkloadSpec ws = resolve_workload(spec);
  std::optional<fs::path> out;
  if (!spec.out_dir.empty()) {
    out = fs::path(spec.out_dir);
    fs::create_directories(*out);
  }
  const fs::path* outp = out ? &*out : nullptr;
  spdlog::info("{}: mode {}, config {}, seed {}", spec.name, to_string(spec.mode), config_hash(hw),
               spec.seed);

  SimulationReport report;
  report.json["metadata"] = metadata(spec, hw);
  report.json["workload"] = workload_json(ws);
  if (spec.mode == Mode::Sweep) {
    report.json["results"] = run_sweep(spec, hw, ws, outp);
  } else {
    const AttentionWorkload w = gen_workload(ws, spec.seed);
    switch (spec.mode) {
      case Mode::Fidelity: report.json["results"] = run_fidelity(spec, hw, w, outp); break;
      case Mode::Histogram: report.json["results"] = run_histogram(spec, hw, w, outp); break;
      case Mode::Cost: report.json["results"] = run_cost(hw, w, spec.seed, outp); break;
      case Mode::Compare: report.json["results"] = run_compare(hw, w, spec.seed, outp); break;
      case Mode::Sweep: break;
    }
  }
  if (outp != nullptr) {
    write_json(*outp / "report.json", report.json);
    write_text(*outp / "config.cfg", echo_hardware_config(hw));
  }
  return report;
}

json to_json(const CostReport& r) {
  auto fractions = [](const Breakdown& b) {
    json comp = json::object();
    for (const auto& [k, v] : b.components) comp[k] = b.fraction(k);
    json cat = json::object();
    for (const auto& [k, v] : b.categories) cat[k] = b.category_fraction(k);
    return json{{"components", comp}, {"categories", cat}};
  };
  return json{{"total_area_mm2", r.total_area_mm2},
              {"total_power_w", r.total_power_w},
              {"area_breakdown", fractions(r.area)},
              {"power_breakdown", fractions(r.power)},
              {"latency_s", r.latency_s},
              {"energy_j", r.energy_j},
              {"component_energy_j", r.component_energy_j},
              {"throughput_ops", r.throughput_ops},
              {"perf_per_area", r.perf_per_area},
              {"energy_efficiency", r.energy_efficiency},
              {"energy_eff_per_area", r.energy_eff_per_area}};
}

json to_json(const GemmStats& s) {
  return json{{"array_ops", s.array_ops},
              {"cycles", s.cycles},
              {"signals", s.signals},
              {"lowres", s.lowres},
              {"overres", s.overres},
              {"saturated", s.saturated},
              {"mau_tasks", s.mau_tasks},
              {"exact_contributions", s.exact_contributions},
              {"lowres_contributions", s.lowres_contributions},
              {"spilled", s.spilled},
              {"register_peak", s.register_peak}};
}

json to_json(const TrafficSummary& t) {
  return json{{"hbm_read_bytes", t.hbm_read_bytes},
              {"hbm_write_bytes", t.hbm_write_bytes},
              {"shared_to_local_bytes", t.shared_to_local_bytes},
              {"broadcast_bytes", t.broadcast_bytes},
              {"photonic_to_digital_bytes", t.photonic_to_digital_bytes}};
}

void write_cost_csv(std::ostream& out,
                    const std::vector<std::pair<std::string, const CostReport*>>& reports) {
  out << "label,total_area_mm2,total_power_w,latency_s,energy_j,throughput_ops,perf_per_area,"
         "energy_efficiency,energy_eff_per_area\n";
  for (const auto& [label, r] : reports) {
    out << fmt::format("{},{},{},{},{},{},{},{},{}\n", label, r->total_area_mm2, r->total_power_w,
                       r->latency_s, r->energy_j, r->throughput_ops, r->perf_per_area,
                       r->energy_efficiency, r->energy_eff_per_area);
  }
}

void write_breakdown_csv(std::ostream& out,
                         const std::vector<std::pair<std::string, const CostReport*>>& reports) {
  out << "label,metric,component,value,fraction\n";
  for (const auto& [label, r] : reports) {
    for (const auto& [name, v] : r->area.components) {
      out << fmt::format("{},area_mm2,{},{},{}\n", label, name, v, r->area.fraction(name));
    }
    for (const auto& [name, v] : r->power.components) {
      out << fmt::format("{},power_mw,{},{},{}\n", label, name, v, r->power.fraction(name));
    }
    for (const auto& [name, e] : r->component_energy_j) {
      out << fmt::format("{},energy_j,{},{},{}\n", label, name, e,
                         r->energy_j > 0.0 ? e / r->energy_j : 0.0);
    }
  }
}

std::string validate_config(const std::string& path) {
  const HardwareConfig hw = load_hardware_config(path);
  const Breakdown area = aggregate_area(hw);
  const Breakdown power = aggregate_power(hw);
  return echo_hardware_config(hw) +
         fmt::format("\n# total area {:.4f} mm2, total power {:.4f} W, hash {}\n", area.total,
                     power.total * 1e-3, config_hash(hw));
}

}  // namespace pdsim
