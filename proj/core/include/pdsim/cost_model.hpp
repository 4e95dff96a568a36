#pragma once

#include <map>
#include <string>
#include <vector>

#include "pdsim/cycle_trace.hpp"
#include "pdsim/hardware_config.hpp"

namespace pdsim {

/// Component totals (per-Tile groups already multiplied by the Tile count).
struct Breakdown {
  double total = 0.0;
  double photonic_die = 0.0;  // per Tile
  double digital_die = 0.0;   // per Tile
  double shared = 0.0;
  std::map<std::string, double> components;
  std::map<std::string, double> categories;

  double fraction(const std::string& component) const;
  double category_fraction(const std::string& category) const;
};

/// mm^2.
Breakdown aggregate_area(const HardwareConfig& hw);
/// mW.
Breakdown aggregate_power(const HardwareConfig& hw);

struct LatencyEnergy {
  double latency_s = 0.0;
  double energy_j = 0.0;
  std::map<std::string, double> component_energy_j;
  uint64_t ops = 0;  // 2 * valid MACs
};

/// Per-window pipelined latency summed over windows, and active/idle energy
/// per component. Rejects traces that exceed the configured resources.
LatencyEnergy latency_energy(const CycleTrace& trace, const HardwareConfig& hw);

/// Same photonic die with one 8-bit ADC per array (area and power scaled from
/// the 4-bit unit by 2^(8-4)) and no comparator, coordinate register or MAU.
HardwareConfig single_adc_baseline(const HardwareConfig& hw);

inline constexpr int kBaselineAdcBits = 8;

struct CostReport {
  double total_area_mm2 = 0.0;
  double total_power_w = 0.0;
  Breakdown area;
  Breakdown power;
  double latency_s = 0.0;
  double energy_j = 0.0;
  std::map<std::string, double> component_energy_j;
  double throughput_ops = 0.0;       // ops/s
  double perf_per_area = 0.0;        // ops/s/mm^2
  double energy_efficiency = 0.0;    // ops/J
  double energy_eff_per_area = 0.0;  // ops/J/mm^2
};

CostReport cost_report(const CycleTrace& trace, const HardwareConfig& hw);

struct Comparison {
  double speedup_per_area = 0.0;
  double energy_eff_per_area = 0.0;
};

Comparison compare(const CostReport& candidate, const CostReport& baseline);

}  // namespace pdsim
