#include "pdsim/hardware_config.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string_view>

namespace pdsim {
namespace {

using Setter = std::function<std::optional<std::string>(HardwareConfig&, std::string_view)>;
using Getter = std::function<std::string(const HardwareConfig&)>;

struct Field {
  std::string section;
  std::string key;
  Getter get;
  Setter set;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_real(std::string_view v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) return std::nullopt;
  return out;
}

std::optional<long long> parse_int(std::string_view v) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return out;
}

template <class Acc>
Field real_field(std::string section, std::string key, Acc acc, bool positive = false) {
  return Field{
      std::move(section), std::move(key),
      [acc](const HardwareConfig& c) {
        return fmt::format("{}", acc(const_cast<HardwareConfig&>(c)));
      },
      [acc, positive](HardwareConfig& c, std::string_view v) -> std::optional<std::string> {
        const auto x = parse_real(v);
        if (!x) return fmt::format("expected a real number, got \"{}\"", v);
        if (*x < 0.0) return fmt::format("must be non-negative, got {}", *x);
        if (positive && *x == 0.0) return "must be strictly positive";
        acc(c) = *x;
        return std::nullopt;
      }};
}

template <class Acc>
Field int_field(std::string section, std::string key, Acc acc, long long min_value = 0) {
  return Field{
      std::move(section), std::move(key),
      [acc](const HardwareConfig& c) {
        return fmt::format("{}", acc(const_cast<HardwareConfig&>(c)));
      },
      [acc, min_value](HardwareConfig& c, std::string_view v) -> std::optional<std::string> {
        const auto x = parse_int(v);
        if (!x) return fmt::format("expected an integer, got \"{}\"", v);
        if (*x < 0) return fmt::format("must be non-negative, got {}", *x);
        if (*x < min_value) return fmt::format("must be >= {}, got {}", min_value, *x);
        using T = std::remove_reference_t<decltype(acc(c))>;
        if (static_cast<unsigned long long>(*x) >
            static_cast<unsigned long long>(std::numeric_limits<T>::max())) {
          return fmt::format("value {} is too large", *x);
        }
        acc(c) = static_cast<T>(*x);
        return std::nullopt;
      }};
}

template <class Acc>
Field bool_field(std::string section, std::string key, Acc acc) {
  return Field{std::move(section), std::move(key),
               [acc](const HardwareConfig& c) {
                 return std::string(acc(const_cast<HardwareConfig&>(c)) ? "true" : "false");
               },
               [acc](HardwareConfig& c, std::string_view v) -> std::optional<std::string> {
                 if (v == "true" || v == "1") {
                   acc(c) = true;
                 } else if (v == "false" || v == "0") {
                   acc(c) = false;
                 } else {
                   return fmt::format("expected true or false, got \"{}\"", v);
                 }
                 return std::nullopt;
               }};
}

template <class Acc>
void component_fields(std::vector<Field>& out, const std::string& section,
                      const std::string& prefix, Acc acc) {
  out.push_back(real_field(section, prefix + ".area_mm2",
                           [acc](HardwareConfig& c) -> double& { return acc(c).area_mm2; }));
  out.push_back(real_field(section, prefix + ".power_mw",
                           [acc](HardwareConfig& c) -> double& { return acc(c).power_mw; }));
  out.push_back(int_field(section, prefix + ".count",
                          [acc](HardwareConfig& c) -> int& { return acc(c).count; }));
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    using C = HardwareConfig;
    const std::string shared = "shared";
    const std::string pd = "photonic_die";
    const std::string dd = "digital_die";

    component_fields(f, shared, "pdac", [](C& c) -> Component& { return c.shared_pdac; });
    f.push_back(int_field(shared, "pdac.bits", [](C& c) -> int& { return c.shared_pdac_bits; }, 2));
    component_fields(f, shared, "sram", [](C& c) -> Component& { return c.shared_sram; });
    f.push_back(int_field(shared, "sram.capacity_bytes",
                          [](C& c) -> std::size_t& { return c.shared_sram_bytes; }));

    component_fields(f, pd, "pdac", [](C& c) -> Component& { return c.pdac; });
    f.push_back(int_field(pd, "pdac.bits", [](C& c) -> int& { return c.pdac_bits; }, 2));
    component_fields(f, pd, "adc", [](C& c) -> Component& { return c.adc; });
    f.push_back(int_field(pd, "adc.bits", [](C& c) -> int& { return c.adc_bits; }, 2));
    f.push_back(real_field(pd, "adc.lsb", [](C& c) -> double& { return c.adc_lsb; }, true));
    component_fields(f, pd, "dptc", [](C& c) -> Component& { return c.dptc; });
    f.push_back(int_field(pd, "dptc.rows", [](C& c) -> std::size_t& { return c.dptc_rows; }, 1));
    f.push_back(int_field(pd, "dptc.cols", [](C& c) -> std::size_t& { return c.dptc_cols; }, 1));
    f.push_back(real_field(pd, "dptc.noise_sigma", [](C& c) -> double& { return c.noise_sigma; }));
    component_fields(f, pd, "sram", [](C& c) -> Component& { return c.local_sram; });
    f.push_back(int_field(pd, "sram.capacity_bytes",
                          [](C& c) -> std::size_t& { return c.local_sram_bytes; }, 1));
    component_fields(f, pd, "registers", [](C& c) -> Component& { return c.registers; });
    f.push_back(int_field(pd, "registers.capacity_bytes",
                          [](C& c) -> std::size_t& { return c.register_bytes; }));
    f.push_back(int_field(pd, "registers.entry_bytes",
                          [](C& c) -> std::size_t& { return c.register_entry_bytes; }, 1));
    component_fields(f, pd, "accumulator", [](C& c) -> Component& { return c.accumulator; });
    component_fields(f, pd, "comparator", [](C& c) -> Component& { return c.comparator; });

    component_fields(f, dd, "mau", [](C& c) -> Component& { return c.mau; });
    f.push_back(int_field(dd, "mau.macs_per_cycle",
                          [](C& c) -> int& { return c.mau_macs_per_cycle; }, 1));
    component_fields(f, dd, "registers", [](C& c) -> Component& { return c.digital_registers; });
    f.push_back(int_field(dd, "registers.capacity_bytes",
                          [](C& c) -> std::size_t& { return c.digital_register_bytes; }));
    component_fields(f, dd, "softmax", [](C& c) -> Component& { return c.softmax; });
    f.push_back(int_field(dd, "softmax.lut_bytes",
                          [](C& c) -> std::size_t& { return c.softmax_lut_bytes; }));

    const std::string sys = "system";
    f.push_back(int_field(sys, "tiles", [](C& c) -> int& { return c.tiles; }, 1));
    f.push_back(real_field(sys, "hbm_bandwidth", [](C& c) -> double& { return c.hbm_bandwidth; }, true));
    f.push_back(real_field(sys, "sram_bandwidth", [](C& c) -> double& { return c.sram_bandwidth; }, true));
    f.push_back(real_field(sys, "idle_power_fraction",
                           [](C& c) -> double& { return c.idle_power_fraction; }));
    f.push_back(bool_field(sys, "double_buffering", [](C& c) -> bool& { return c.double_buffering; }));
    f.push_back(bool_field(sys, "serialize_flagged_transfers",
                           [](C& c) -> bool& { return c.serialize_flagged_transfers; }));
    f.push_back(Field{
        sys, "assignment",
        [](const C& c) {
          return std::string(c.assignment == TileAssignment::Blocked ? "blocked" : "round_robin");
        },
        [](C& c, std::string_view v) -> std::optional<std::string> {
          if (v == "round_robin") {
            c.assignment = TileAssignment::RoundRobin;
          } else if (v == "blocked") {
            c.assignment = TileAssignment::Blocked;
          } else {
            return fmt::format("expected round_robin or blocked, got \"{}\"", v);
          }
          return std::nullopt;
        }});

    const std::string tm = "timing";
    f.push_back(real_field(tm, "photonic_op_time", [](C& c) -> double& { return c.timing.photonic_op_time; }));
    f.push_back(real_field(tm, "adc_conversion_time",
                           [](C& c) -> double& { return c.timing.adc_conversion_time; }));
    f.push_back(real_field(tm, "digital_cycle_time",
                           [](C& c) -> double& { return c.timing.digital_cycle_time; }));
    f.push_back(real_field(tm, "pdac_modulation_time",
                           [](C& c) -> double& { return c.timing.pdac_modulation_time; }));
    return f;
  }();
  return table;
}

void check_component(std::vector<std::string>& diag, const char* name, const Component& c) {
  if (!(c.area_mm2 >= 0.0) || !std::isfinite(c.area_mm2)) {
    diag.push_back(fmt::format("{}.area_mm2: must be finite and non-negative", name));
  }
  if (!(c.power_mw >= 0.0) || !std::isfinite(c.power_mw)) {
    diag.push_back(fmt::format("{}.power_mw: must be finite and non-negative", name));
  }
  if (c.count < 0) diag.push_back(fmt::format("{}.count: must be non-negative", name));
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> diagnostics)
    : Error([&] {
        std::string msg = "invalid hardware config:";
        for (const auto& d : diagnostics) msg += "\n  " + d;
        return msg;
      }()),
      diagnostics_(std::move(diagnostics)) {}

AdcSpec HardwareConfig::adc_spec() const {
  return AdcSpec{adc_bits, adc_lsb, adc.count, timing.adc_conversion_time};
}

PdacSpec HardwareConfig::pdac_spec() const {
  return PdacSpec{pdac_bits, timing.pdac_modulation_time, pdac.count};
}

DptcSpec HardwareConfig::dptc_spec() const {
  return DptcSpec{dptc_rows, dptc_cols, timing.photonic_op_time, noise_sigma};
}

MauSpec HardwareConfig::mau_spec() const {
  return MauSpec{mau_macs_per_cycle, timing.digital_cycle_time, 512, 512};
}

void HardwareConfig::validate() const {
  std::vector<std::string> diag;
  check_component(diag, "shared.pdac", shared_pdac);
  check_component(diag, "shared.sram", shared_sram);
  check_component(diag, "photonic_die.pdac", pdac);
  check_component(diag, "photonic_die.adc", adc);
  check_component(diag, "photonic_die.dptc", dptc);
  check_component(diag, "photonic_die.sram", local_sram);
  check_component(diag, "photonic_die.registers", registers);
  check_component(diag, "photonic_die.accumulator", accumulator);
  check_component(diag, "photonic_die.comparator", comparator);
  check_component(diag, "digital_die.mau", mau);
  check_component(diag, "digital_die.registers", digital_registers);
  check_component(diag, "digital_die.softmax", softmax);

  if (tiles < 1) diag.push_back(fmt::format("system.tiles: must be >= 1, got {}", tiles));
  if (shared_pdac_bits < 2) diag.push_back("shared.pdac.bits: must be >= 2");
  if (pdac_bits < 2) diag.push_back("photonic_die.pdac.bits: must be >= 2");
  if (adc_bits < 2 || adc_bits > 30) {
    diag.push_back(fmt::format("photonic_die.adc.bits: must be in [2, 30], got {}", adc_bits));
  }
  if (!(adc_lsb > 0.0) || !std::isfinite(adc_lsb)) diag.push_back("photonic_die.adc.lsb: must be > 0");
  if (dptc_rows < 1 || dptc_cols < 1) diag.push_back("photonic_die.dptc: rows and cols must be >= 1");
  if (adc.count < 1) {
    diag.push_back(fmt::format("photonic_die.adc.count: must be >= 1, got {}", adc.count));
  } else if (static_cast<std::size_t>(adc.count) > dptc_rows * dptc_cols) {
    diag.push_back(fmt::format("photonic_die.adc.count: {} ADCs exceed the {} array outputs",
                               adc.count, dptc_rows * dptc_cols));
  }
  if (comparator.count != 0 && comparator.count != adc.count) {
    diag.push_back(fmt::format("photonic_die.comparator.count: must be 0 or equal adc.count ({}), "
                               "got {}", adc.count, comparator.count));
  }
  if (!(noise_sigma >= 0.0)) diag.push_back("photonic_die.dptc.noise_sigma: must be >= 0");
  if (register_entry_bytes < 1) diag.push_back("photonic_die.registers.entry_bytes: must be >= 1");
  if (hybrid()) {
    if (mau.count < 1) diag.push_back("digital_die.mau.count: comparators need at least one MAU");
    if (register_bytes < register_entry_bytes) {
      diag.push_back("photonic_die.registers.capacity_bytes: must hold at least one entry when "
                     "comparators are present");
    }
  }
  if (mau_macs_per_cycle < 1) diag.push_back("digital_die.mau.macs_per_cycle: must be >= 1");
  if (softmax.count > 0 && softmax_lut_bytes != 2 * SoftmaxLut::kEntries) {
    diag.push_back(fmt::format("digital_die.softmax.lut_bytes: the split tables occupy {} bytes, "
                               "got {}", 2 * SoftmaxLut::kEntries, softmax_lut_bytes));
  }
  if (local_sram_bytes < 1) diag.push_back("photonic_die.sram.capacity_bytes: must be >= 1");
  if (!(hbm_bandwidth > 0.0)) diag.push_back("system.hbm_bandwidth: must be > 0");
  if (!(sram_bandwidth > 0.0)) diag.push_back("system.sram_bandwidth: must be > 0");
  if (!(idle_power_fraction >= 0.0 && idle_power_fraction <= 1.0)) {
    diag.push_back("system.idle_power_fraction: must be in [0, 1]");
  }
  for (double t : {timing.photonic_op_time, timing.adc_conversion_time, timing.digital_cycle_time,
                   timing.pdac_modulation_time}) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
      diag.push_back("timing: all times must be finite and non-negative");
      break;
    }
  }
  if (!diag.empty()) throw ConfigError(std::move(diag));
}

HardwareConfig parse_hardware_config(std::istream& in, const std::string& source) {
  std::map<std::string, const Field*> index;
  std::set<std::string> sections;
  for (const auto& f : fields()) {
    index[f.section + "." + f.key] = &f;
    sections.insert(f.section);
  }

  HardwareConfig hw;
  std::vector<std::string> diag;
  std::set<std::string> seen;
  std::string section;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        diag.push_back(fmt::format("{}:{}: malformed section header \"{}\"", source, line_no, line));
        continue;
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!sections.contains(section)) {
        diag.push_back(fmt::format("{}:{}: unknown section [{}]", source, line_no, section));
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      diag.push_back(fmt::format("{}:{}: expected key = value, got \"{}\"", source, line_no, line));
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const std::string full = section + "." + key;
    const auto it = index.find(full);
    if (section.empty() || it == index.end()) {
      diag.push_back(fmt::format("{}:{}: unknown key \"{}\"{}", source, line_no, key,
                                 section.empty() ? " outside any section"
                                                 : fmt::format(" in [{}]", section)));
      continue;
    }
    if (!seen.insert(full).second) {
      diag.push_back(fmt::format("{}:{}: key \"{}\" in [{}] set twice", source, line_no, key, section));
      continue;
    }
    if (auto err = it->second->set(hw, value)) {
      diag.push_back(fmt::format("{}:{}: key \"{}\" in [{}]: {}", source, line_no, key, section, *err));
    }
  }
  if (!diag.empty()) throw ConfigError(std::move(diag));
  try {
    hw.validate();
  } catch (const ConfigError& e) {
    std::vector<std::string> prefixed;
    for (const auto& d : e.diagnostics()) prefixed.push_back(fmt::format("{}: {}", source, d));
    throw ConfigError(std::move(prefixed));
  }
  return hw;
}

HardwareConfig load_hardware_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("{}: cannot open for reading", path));
  return parse_hardware_config(in, path);
}

std::string echo_hardware_config(const HardwareConfig& hw) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    if (f.section != section) {
      if (!section.empty()) out += "\n";
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += f.key + " = " + f.get(hw) + "\n";
  }
  return out;
}

std::string config_hash(const HardwareConfig& hw) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : echo_hardware_config(hw)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace pdsim
