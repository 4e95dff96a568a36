#pragma once

// Functional model of the photonic die: dot-product engine, crossbar tile,
// low-resolution ADC, comparator and the coordinate register.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "pdsim/qtensor.hpp"

namespace pdsim {

struct AdcSpec {
  int bits = 4;
  double lsb = 1.0;  // analog units per code step; 1.0 == one integer product
  int count_per_array = 32;
  double conversion_time = 1e-9;

  int32_t max_code() const { return pdsim::max_code(bits); }
  double full_scale() const { return max_code() * lsb; }
  void validate() const;
};

struct PdacSpec {
  int bits = 4;
  double modulation_time = 1e-9;
  int count = 64;
  void validate() const;
};

struct DptcSpec {
  std::size_t rows = 64;  // vertical waveguides: output rows per op
  std::size_t cols = 64;  // horizontal waveguides: output cols and K depth per op
  double op_time = 1e-9;
  double noise_sigma = 0.0;

  std::size_t k_depth() const { return cols; }
  void validate() const;
};

/// Global coordinate of one partial dot product: output (row, col) and the
/// K-slice that produced it.
struct Coordinate {
  uint32_t row = 0;
  uint32_t col = 0;
  uint32_t k_slice = 0;

  uint64_t key() const {
    return (uint64_t{row} << 42) | (uint64_t{col} << 21) | uint64_t{k_slice};
  }
  friend auto operator<=>(const Coordinate&, const Coordinate&) = default;
};

enum class SignalClass { LowRes, OverRes };

struct ComparatorOutcome {
  SignalClass classification = SignalClass::LowRes;
  Coordinate coordinate;
};

/// Seeded additive Gaussian noise on analog partials. sigma == 0 draws nothing.
class NoiseSource {
 public:
  NoiseSource(double sigma, uint64_t seed);
  double sample();
  double sigma() const { return sigma_; }

 private:
  double sigma_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_;
};

/// Photocurrent of one dot-product unit, in integer-product units.
double ddot(std::span<const int32_t> x, std::span<const int32_t> y, NoiseSource* noise = nullptr);

struct AnalogTile {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

/// One crossbar operation. Operands are zero-padded into the full array, so
/// the result is always rows x cols of the array.
AnalogTile dptc_tile_op(const QuantizedMatrix& a_tile, const QuantizedMatrix& b_tile,
                        const DptcSpec& dptc, NoiseSource* noise = nullptr);

struct AdcSample {
  int32_t code = 0;
  bool saturated = false;
};

/// code = clamp(round_half_away(analog / lsb), -max_code, +max_code).
AdcSample adc_convert(double analog, const AdcSpec& adc);

/// Per-tile log of over-resolution coordinates. When the register is full the
/// resident batch is spilled to shared SRAM; nothing is ever dropped, so
/// logged == spilled + drained + resident at all times.
class CoordinateRegister {
 public:
  explicit CoordinateRegister(std::size_t capacity_bytes = 8192, std::size_t entry_bytes = 4);

  /// Returns the number of entries spilled to make room (0 if none).
  std::size_t log(const Coordinate& c);

  /// Hands resident entries to the memory controller.
  std::vector<Coordinate> drain();
  /// Spilled entries not yet collected by the memory controller.
  std::vector<Coordinate> take_spilled();

  std::size_t capacity_entries() const { return capacity_entries_; }
  std::size_t entry_bytes() const { return entry_bytes_; }
  std::size_t resident() const { return entries_.size(); }
  /// Highest occupancy since the last drain.
  std::size_t peak() const { return peak_; }
  std::size_t resident_bytes() const { return entries_.size() * entry_bytes_; }
  uint64_t logged() const { return logged_; }
  uint64_t spilled() const { return spilled_; }
  uint64_t drained() const { return drained_; }
  uint64_t spill_events() const { return spill_events_; }
  const std::vector<Coordinate>& entries() const { return entries_; }

 private:
  std::size_t capacity_entries_;
  std::size_t entry_bytes_;
  std::vector<Coordinate> entries_;
  std::vector<Coordinate> spill_buffer_;
  uint64_t logged_ = 0;
  uint64_t spilled_ = 0;
  uint64_t drained_ = 0;
  uint64_t spill_events_ = 0;
  std::size_t peak_ = 0;
};

/// Entries moved per extra digital cycle when the register spills.
inline constexpr std::size_t kSpillEntriesPerCycle = 32;

/// Comparator: OverRes iff |analog| > full_scale. OverRes coordinates are
/// logged into `reg` when one is given.
ComparatorOutcome classify(double analog, const AdcSpec& adc, Coordinate coord,
                           CoordinateRegister* reg = nullptr);

struct GemmOperands {
  QuantizedMatrix a;
  QuantizedMatrix b;
};

struct ResolutionBin {
  int bits = 0;
  uint64_t within = 0;
  double fraction_in_range = 0.0;
};

struct ResolutionHistogram {
  uint64_t total_signals = 0;
  std::vector<ResolutionBin> bins;
};

/// Fraction of all K-slice partial sums (valid output coordinates only) whose
/// magnitude fits within full_scale(bits) = max_code(bits) * lsb.
ResolutionHistogram resolution_histogram(std::span<const GemmOperands> workload,
                                         std::span<const int> bits_list, std::size_t k_depth,
                                         double lsb = 1.0);

}  // namespace pdsim
