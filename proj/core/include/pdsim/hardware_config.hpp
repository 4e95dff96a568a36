#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pdsim/digital_die.hpp"
#include "pdsim/error.hpp"
#include "pdsim/photonic.hpp"

namespace pdsim {

/// Area and power of one component group as listed per Tile (or once for
/// shared components); `count` is the number of units inside the group.
struct Component {
  double area_mm2 = 0.0;
  double power_mw = 0.0;
  int count = 0;

  double unit_area_mm2() const { return count > 0 ? area_mm2 / count : 0.0; }
  double unit_power_mw() const { return count > 0 ? power_mw / count : 0.0; }
};

enum class TileAssignment { RoundRobin, Blocked };

struct Timing {
  double photonic_op_time = 1e-9;
  double adc_conversion_time = 1e-9;
  double digital_cycle_time = 1e-9;
  double pdac_modulation_time = 1e-9;
};

/// Full accelerator description. Defaults reproduce the published 32-Tile
/// configuration; timings and the few unpublished knobs are documented in
/// README.md.
struct HardwareConfig {
  // Shared by all Tiles.
  Component shared_pdac{0.0016, 8.0, 1};
  int shared_pdac_bits = 4;
  Component shared_sram{3.68, 1230.0, 1};
  std::size_t shared_sram_bytes = 2u * 1024 * 1024;

  // Photonic die, per Tile.
  Component pdac{0.0748, 520.0, 64};
  int pdac_bits = 4;
  Component adc{0.0057, 29.6, 32};
  int adc_bits = 4;
  double adc_lsb = 1.0;
  Component dptc{0.246, 624.0, 1};
  std::size_t dptc_rows = 64;
  std::size_t dptc_cols = 64;
  double noise_sigma = 0.0;
  Component local_sram{0.06, 19.0, 1};
  std::size_t local_sram_bytes = 32u * 1024;
  Component registers{0.015, 5.23, 1};
  std::size_t register_bytes = 8u * 1024;
  std::size_t register_entry_bytes = 4;
  Component accumulator{0.0014, 0.039, 32};
  Component comparator{0.00031, 0.019, 32};

  // Digital die, per Tile.
  Component mau{0.014, 8.2, 1};
  int mau_macs_per_cycle = 64;
  Component digital_registers{0.002, 0.63, 1};
  std::size_t digital_register_bytes = 1024;
  Component softmax{0.0072, 1.134, 1};
  std::size_t softmax_lut_bytes = 512;

  // System.
  int tiles = 32;
  double hbm_bandwidth = 1e12;   // bytes/s
  double sram_bandwidth = 1e12;  // bytes/s, shared SRAM port
  double idle_power_fraction = 0.1;
  bool double_buffering = true;
  bool serialize_flagged_transfers = false;
  TileAssignment assignment = TileAssignment::RoundRobin;

  Timing timing;

  /// Comparator-equipped configurations classify signals and fall back to the
  /// MAU; configurations without comparators convert everything.
  bool hybrid() const { return comparator.count > 0; }

  AdcSpec adc_spec() const;
  PdacSpec pdac_spec() const;
  DptcSpec dptc_spec() const;
  MauSpec mau_spec() const;

  /// Throws ConfigError listing every violation.
  void validate() const;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> diagnostics);
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

/// Line-oriented `key = value` format with `[section]` headers. Keys not
/// present keep their defaults; unknown keys and bad values are errors.
HardwareConfig parse_hardware_config(std::istream& in, const std::string& source = "<stream>");
HardwareConfig load_hardware_config(const std::string& path);

/// Canonical, fully-resolved text of a config. parse(echo(c)) == c.
std::string echo_hardware_config(const HardwareConfig& hw);

/// FNV-1a 64 of the canonical echo, as 16 hex digits.
std::string config_hash(const HardwareConfig& hw);

}  // namespace pdsim
