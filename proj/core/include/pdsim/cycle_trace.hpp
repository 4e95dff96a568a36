#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace pdsim {

enum class WindowKind { Load, Compute, Softmax, Store };

std::string_view to_string(WindowKind k);

/// One schedule window. Compute windows are broadcast cycles; load, softmax
/// and store windows carry the transfers and the softmax pass between them.
/// All counters are integers so that replaying a dumped trace is exact.
struct WindowRecord {
  uint64_t window = 0;
  WindowKind kind = WindowKind::Compute;
  uint32_t gemm = 0;
  uint64_t photonic_ops = 0;
  uint64_t macs = 0;  // valid multiply-accumulates issued
  uint64_t pdac_conversions = 0;
  uint64_t adc_slots_max = 0;  // busiest array
  uint64_t adc_slots_total = 0;
  uint64_t lowres = 0;
  uint64_t overres = 0;
  uint64_t saturated = 0;
  uint64_t digital_tasks = 0;
  uint64_t digital_cycles_max = 0;  // busiest MAU, including spill handling
  uint64_t digital_cycles_total = 0;
  uint64_t spilled = 0;
  uint64_t register_peak = 0;  // entries
  uint64_t softmax_cycles_max = 0;
  uint64_t softmax_cycles_total = 0;
  uint64_t hbm_read_bytes = 0;
  uint64_t hbm_write_bytes = 0;
  uint64_t sram_fill_bytes = 0;   // shared SRAM -> local SRAMs
  uint64_t broadcast_bytes = 0;   // shared SRAM -> shared PDAC
  uint64_t flagged_bytes = 0;     // photonic die -> digital die

  friend bool operator==(const WindowRecord&, const WindowRecord&) = default;
};

struct CycleTrace {
  std::vector<WindowRecord> windows;

  WindowRecord& open(WindowKind kind, uint32_t gemm);
  uint64_t compute_cycles() const;

  friend bool operator==(const CycleTrace&, const CycleTrace&) = default;
};

void write_trace_csv(std::ostream& out, const CycleTrace& trace);
CycleTrace read_trace_csv(std::istream& in, const std::string& source = "<stream>");
void save_trace_csv(const std::string& path, const CycleTrace& trace);
CycleTrace load_trace_csv(const std::string& path);

}  // namespace pdsim
