#include "pdsim/cost_model.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "pdsim/dataflow.hpp"
#include "pdsim/error.hpp"

namespace pdsim {
namespace {

enum class Scope { Shared, PhotonicDie, DigitalDie };

struct Entry {
  const char* name;
  const char* category;
  Scope scope;
  const Component HardwareConfig::*field;
};

constexpr Entry kEntries[] = {
    {"shared_pdac", "pdac", Scope::Shared, &HardwareConfig::shared_pdac},
    {"shared_sram", "memory", Scope::Shared, &HardwareConfig::shared_sram},
    {"pdac", "pdac", Scope::PhotonicDie, &HardwareConfig::pdac},
    {"adc", "adc", Scope::PhotonicDie, &HardwareConfig::adc},
    {"dptc", "dptc", Scope::PhotonicDie, &HardwareConfig::dptc},
    {"local_sram", "memory", Scope::PhotonicDie, &HardwareConfig::local_sram},
    {"registers", "memory", Scope::PhotonicDie, &HardwareConfig::registers},
    {"accumulator", "accumulator_comparator", Scope::PhotonicDie, &HardwareConfig::accumulator},
    {"comparator", "accumulator_comparator", Scope::PhotonicDie, &HardwareConfig::comparator},
    {"mau", "digital_die", Scope::DigitalDie, &HardwareConfig::mau},
    {"digital_registers", "digital_die", Scope::DigitalDie, &HardwareConfig::digital_registers},
    {"softmax", "digital_die", Scope::DigitalDie, &HardwareConfig::softmax},
};

Breakdown aggregate(const HardwareConfig& hw, double Component::*value) {
  Breakdown b;
  for (const auto& e : kEntries) {
    const double v = (hw.*e.field).*value;
    double total = v;
    switch (e.scope) {
      case Scope::Shared: b.shared += v; break;
      case Scope::PhotonicDie: b.photonic_die += v; total = v * hw.tiles; break;
      case Scope::DigitalDie: b.digital_die += v; total = v * hw.tiles; break;
    }
    b.components[e.name] = total;
    b.categories[e.category] += total;
  }
  b.total = hw.tiles * (b.photonic_die + b.digital_die) + b.shared;
  return b;
}

double safe_div(double a, double b) { return b > 0.0 ? a / b : 0.0; }

}  // namespace

double Breakdown::fraction(const std::string& component) const {
  const auto it = components.find(component);
  return it == components.end() ? 0.0 : safe_div(it->second, total);
}

double Breakdown::category_fraction(const std::string& category) const {
  const auto it = categories.find(category);
  return it == categories.end() ? 0.0 : safe_div(it->second, total);
}

Breakdown aggregate_area(const HardwareConfig& hw) { return aggregate(hw, &Component::area_mm2); }
Breakdown aggregate_power(const HardwareConfig& hw) { return aggregate(hw, &Component::power_mw); }

LatencyEnergy latency_energy(const CycleTrace& trace, const HardwareConfig& hw) {
  const Timing& tm = hw.timing;
  const uint64_t slot_limit = conversion_slots_per_op(hw);
  const auto tiles = static_cast<uint64_t>(hw.tiles);

  // Active seconds summed over all instances of each component group.
  std::map<std::string, double> active;
  for (const auto& e : kEntries) active[e.name] = 0.0;

  LatencyEnergy out;
  uint64_t macs = 0;
  for (const auto& w : trace.windows) {
    if (w.photonic_ops > tiles) {
      throw Error(fmt::format("trace window {}: {} array ops on {} Tiles", w.window,
                              w.photonic_ops, tiles));
    }
    if (w.adc_slots_max > slot_limit) {
      throw Error(fmt::format("trace window {}: {} ADC slots exceed the {} available per array op",
                              w.window, w.adc_slots_max, slot_limit));
    }
    if (w.adc_slots_total > w.adc_slots_max * w.photonic_ops) {
      throw Error(fmt::format("trace window {}: slot total {} inconsistent with per-array max {}",
                              w.window, w.adc_slots_total, w.adc_slots_max));
    }
    if (!hw.hybrid() && (w.overres > 0 || w.digital_tasks > 0)) {
      throw Error(fmt::format("trace window {}: recomputation on a config without comparators",
                              w.window));
    }
    const double pdac = static_cast<double>(w.pdac_conversions) * tm.pdac_modulation_time;
    const double photonic = w.photonic_ops > 0 ? tm.photonic_op_time : 0.0;
    const double adc = static_cast<double>(w.adc_slots_max) * tm.adc_conversion_time;
    const double digital = static_cast<double>(w.digital_cycles_max) * tm.digital_cycle_time;
    const double softmax = static_cast<double>(w.softmax_cycles_max) * tm.digital_cycle_time;
    const double hbm = static_cast<double>(w.hbm_read_bytes + w.hbm_write_bytes) / hw.hbm_bandwidth;
    const double sram = static_cast<double>(w.sram_fill_bytes) / hw.sram_bandwidth;
    double latency = std::max({pdac, photonic, adc, softmax, hbm, sram});
    latency = hw.serialize_flagged_transfers ? latency + digital : std::max(latency, digital);
    out.latency_s += latency;

    const double ops = static_cast<double>(w.photonic_ops);
    const double slot_time = static_cast<double>(w.adc_slots_total) * tm.adc_conversion_time;
    const double fill_time = static_cast<double>(w.sram_fill_bytes) / hw.sram_bandwidth;
    const double sram_bytes = static_cast<double>(w.sram_fill_bytes + w.broadcast_bytes +
                                                  w.hbm_read_bytes + w.hbm_write_bytes);
    active["shared_pdac"] += pdac;
    active["shared_sram"] += sram_bytes / hw.sram_bandwidth;
    active["pdac"] += ops * tm.pdac_modulation_time;
    active["adc"] += slot_time;
    active["accumulator"] += slot_time;
    active["registers"] += slot_time;
    active["dptc"] += ops * tm.photonic_op_time;
    active["comparator"] += ops * tm.photonic_op_time;
    active["local_sram"] += fill_time + ops * tm.photonic_op_time;
    active["mau"] += static_cast<double>(w.digital_cycles_total) * tm.digital_cycle_time;
    active["digital_registers"] += static_cast<double>(w.digital_cycles_total) * tm.digital_cycle_time;
    active["softmax"] += static_cast<double>(w.softmax_cycles_total) * tm.digital_cycle_time;
    macs += w.macs;
  }
  out.ops = 2 * macs;

  for (const auto& e : kEntries) {
    const double instances = e.scope == Scope::Shared ? 1.0 : static_cast<double>(tiles);
    const double available = instances * out.latency_s;
    const double busy = std::min(active[e.name], available);
    const double power_w = (hw.*e.field).power_mw * 1e-3;
    const double energy = power_w * (busy + hw.idle_power_fraction * (available - busy));
    out.component_energy_j[e.name] = energy;
    out.energy_j += energy;
  }
  return out;
}

HardwareConfig single_adc_baseline(const HardwareConfig& hw) {
  HardwareConfig b = hw;
  const double scale = std::ldexp(1.0, kBaselineAdcBits - hw.adc_bits);
  b.adc = Component{hw.adc.unit_area_mm2() * scale, hw.adc.unit_power_mw() * scale, 1};
  b.adc_bits = kBaselineAdcBits;
  b.comparator = Component{};
  b.registers = Component{};
  b.register_bytes = 0;
  b.mau = Component{};
  b.digital_registers = Component{};
  b.digital_register_bytes = 0;
  return b;
}

CostReport cost_report(const CycleTrace& trace, const HardwareConfig& hw) {
  CostReport r;
  r.area = aggregate_area(hw);
  r.power = aggregate_power(hw);
  r.total_area_mm2 = r.area.total;
  r.total_power_w = r.power.total * 1e-3;
  const LatencyEnergy le = latency_energy(trace, hw);
  r.latency_s = le.latency_s;
  r.energy_j = le.energy_j;
  r.component_energy_j = le.component_energy_j;
  const double ops = static_cast<double>(le.ops);
  r.throughput_ops = safe_div(ops, r.latency_s);
  r.perf_per_area = safe_div(r.throughput_ops, r.total_area_mm2);
  r.energy_efficiency = safe_div(ops, r.energy_j);
  r.energy_eff_per_area = safe_div(r.energy_efficiency, r.total_area_mm2);
  return r;
}

Comparison compare(const CostReport& candidate, const CostReport& baseline) {
  if (!(baseline.perf_per_area > 0.0) || !(baseline.energy_eff_per_area > 0.0)) {
    throw Error("compare: baseline per-area metrics must be positive");
  }
  return {candidate.perf_per_area / baseline.perf_per_area,
          candidate.energy_eff_per_area / baseline.energy_eff_per_area};
}

}  // namespace pdsim
