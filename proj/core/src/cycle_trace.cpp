#include "pdsim/cycle_trace.hpp"

#include <fmt/format.h>

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "pdsim/error.hpp"

namespace pdsim {
namespace {

using Counter = uint64_t WindowRecord::*;

struct Column {
  const char* name;
  Counter field;
};

constexpr std::array<Column, 20> kCounters{{
    {"photonic_ops", &WindowRecord::photonic_ops},
    {"macs", &WindowRecord::macs},
    {"pdac_conversions", &WindowRecord::pdac_conversions},
    {"adc_slots_max", &WindowRecord::adc_slots_max},
    {"adc_slots_total", &WindowRecord::adc_slots_total},
    {"lowres", &WindowRecord::lowres},
    {"overres", &WindowRecord::overres},
    {"saturated", &WindowRecord::saturated},
    {"digital_tasks", &WindowRecord::digital_tasks},
    {"digital_cycles_max", &WindowRecord::digital_cycles_max},
    {"digital_cycles_total", &WindowRecord::digital_cycles_total},
    {"spilled", &WindowRecord::spilled},
    {"register_peak", &WindowRecord::register_peak},
    {"softmax_cycles_max", &WindowRecord::softmax_cycles_max},
    {"softmax_cycles_total", &WindowRecord::softmax_cycles_total},
    {"hbm_read_bytes", &WindowRecord::hbm_read_bytes},
    {"hbm_write_bytes", &WindowRecord::hbm_write_bytes},
    {"sram_fill_bytes", &WindowRecord::sram_fill_bytes},
    {"broadcast_bytes", &WindowRecord::broadcast_bytes},
    {"flagged_bytes", &WindowRecord::flagged_bytes},
}};

WindowKind parse_kind(std::string_view s, const std::string& where) {
  for (auto k : {WindowKind::Load, WindowKind::Compute, WindowKind::Softmax, WindowKind::Store}) {
    if (s == to_string(k)) return k;
  }
  throw Error(fmt::format("{}: unknown window kind \"{}\"", where, s));
}

uint64_t parse_u64(std::string_view s, const std::string& where) {
  uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(fmt::format("{}: expected an unsigned integer, got \"{}\"", where, s));
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string header() {
  std::string h = "window,kind,gemm";
  for (std::size_t i = 0; i < kCounters.size(); ++i) {
    h += ',';
    h += kCounters[i].name;
  }
  return h;
}

}  // namespace

std::string_view to_string(WindowKind k) {
  switch (k) {
    case WindowKind::Load: return "load";
    case WindowKind::Compute: return "compute";
    case WindowKind::Softmax: return "softmax";
    case WindowKind::Store: return "store";
  }
  return "?";
}

WindowRecord& CycleTrace::open(WindowKind kind, uint32_t gemm) {
  WindowRecord w;
  w.window = windows.size();
  w.kind = kind;
  w.gemm = gemm;
  windows.push_back(w);
  return windows.back();
}

uint64_t CycleTrace::compute_cycles() const {
  uint64_t n = 0;
  for (const auto& w : windows) n += w.kind == WindowKind::Compute ? 1 : 0;
  return n;
}

void write_trace_csv(std::ostream& out, const CycleTrace& trace) {
  out << header() << '\n';
  for (const auto& w : trace.windows) {
    out << w.window << ',' << to_string(w.kind) << ',' << w.gemm;
    for (std::size_t i = 0; i < kCounters.size(); ++i) out << ',' << w.*kCounters[i].field;
    out << '\n';
  }
}

CycleTrace read_trace_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || line != header()) {
    throw Error(fmt::format("{}:1: missing or unexpected trace header", source));
  }
  CycleTrace trace;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto where = fmt::format("{}:{}", source, line_no);
    const auto cells = split(line);
    if (cells.size() != kCounters.size() + 3) {
      throw Error(fmt::format("{}: expected {} fields, got {}", where, kCounters.size() + 3,
                              cells.size()));
    }
    WindowRecord w;
    w.window = parse_u64(cells[0], where);
    w.kind = parse_kind(cells[1], where);
    w.gemm = static_cast<uint32_t>(parse_u64(cells[2], where));
    for (std::size_t i = 0; i < kCounters.size(); ++i) {
      w.*kCounters[i].field = parse_u64(cells[3 + i], where);
    }
    if (w.window != trace.windows.size()) {
      throw Error(fmt::format("{}: window {} out of sequence", where, w.window));
    }
    trace.windows.push_back(w);
  }
  return trace;
}

void save_trace_csv(const std::string& path, const CycleTrace& trace) {
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("{}: cannot open for writing", path));
  write_trace_csv(out, trace);
}

CycleTrace load_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("{}: cannot open for reading", path));
  return read_trace_csv(in, path);
}

}  // namespace pdsim
