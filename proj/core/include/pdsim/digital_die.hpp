#pragma once

// Digital die: exact MAU recomputation of flagged partials, the per-slice
// accumulator, and the split-table exponent used by the softmax unit.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <unordered_set>
#include <vector>

#include "pdsim/photonic.hpp"

namespace pdsim {

struct MauSpec {
  int macs_per_cycle = 64;
  double cycle_time = 1e-9;
  std::size_t input_buffer_bytes = 512;
  std::size_t output_buffer_bytes = 512;
  void validate() const;
};

/// Coordinates the comparator has flagged and the MAU may recompute.
class FlaggedSet {
 public:
  void insert(const Coordinate& c) { keys_.insert(c.key()); }
  bool contains(const Coordinate& c) const { return keys_.contains(c.key()); }
  std::size_t size() const { return keys_.size(); }

 private:
  std::unordered_set<uint64_t> keys_;
};

struct RecomputeTask {
  Coordinate coordinate;
};

struct MauResult {
  int64_t value = 0;
  uint64_t cycles = 0;
};

uint64_t mau_cycles(std::size_t slice_length, const MauSpec& mau);

/// Exact partial sum for one flagged coordinate. Rejects coordinates that were
/// never flagged, which can only happen through a scheduling bug.
MauResult mau_recompute(const RecomputeTask& task, std::span<const int32_t> a_slice,
                        std::span<const int32_t> b_slice, const FlaggedSet& flagged,
                        const MauSpec& mau);

/// Softmax argument in signed Q8.8 (16-bit, 8 fractional bits).
struct FixedArg {
  static constexpr int kFracBits = 8;
  static constexpr int32_t kMinRaw = -32768;  // -128.0, the domain floor

  int32_t raw = 0;

  double value() const { return static_cast<double>(raw) / (1 << kFracBits); }
  /// Round-to-nearest-even quantization; values below -128 saturate to the
  /// floor, which the tables flush to zero.
  static FixedArg from_real(double arg);
};

/// exp(-m/256) = exp(-(m >> 8)) * exp(-(m & 0xFF)/256) for the argument
/// magnitude m. Each half lives in a 256 x 8-bit table of unsigned [0,1]
/// fixed-point values (code / 255).
class SoftmaxLut {
 public:
  static constexpr std::size_t kEntries = 256;

  SoftmaxLut();

  std::span<const uint8_t> hi_table() const { return hi_; }
  std::span<const uint8_t> lo_table() const { return lo_; }
  std::size_t size_bytes() const { return hi_.size() + lo_.size(); }

  static double decode(uint8_t code) { return code / 255.0; }
  static std::size_t hi_index(FixedArg a) { return static_cast<uint32_t>(-a.raw) >> 8; }
  static std::size_t lo_index(FixedArg a) { return static_cast<uint32_t>(-a.raw) & 0xFF; }

  /// Rejects positive arguments.
  double lut_exp(FixedArg arg) const;
  /// Quantizes to Q8.8 first; flushes to zero below the domain floor.
  double lut_exp(double arg) const;

  /// Hi table then lo table, one two-digit hex entry per line.
  void dump_hex(std::ostream& out) const;

 private:
  std::array<uint8_t, kEntries> hi_{};
  std::array<uint8_t, kEntries> lo_{};
};

/// Softmax of one score row. `scores` are in integer-product units and map to
/// reals via `scale`; arguments are (s - max) * scale / sqrt(d_k). The final
/// normalisation divides exactly.
std::vector<double> softmax_row(std::span<const double> scores, double scale, int d_k,
                                const SoftmaxLut& lut);

/// Accumulator result in integer-product units; real value = values * scale.
struct ScoreMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  double scale = 1.0;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

/// Collects exactly one contribution per (row, col, k-slice) and sums them in
/// slice order. LowRes contributions are code * lsb; OverRes ones are exact.
class Accumulator {
 public:
  Accumulator(std::size_t rows, std::size_t cols, std::size_t slices, double scale);

  void add_lowres(const Coordinate& c, int32_t code, double lsb);
  void add_exact(const Coordinate& c, int64_t value);

  /// Rejects any coordinate with a missing slice.
  ScoreMatrix finalize() const;

  uint64_t lowres_contributions() const { return lowres_; }
  uint64_t exact_contributions() const { return exact_; }

 private:
  void put(const Coordinate& c, double v);

  std::size_t rows_;
  std::size_t cols_;
  std::size_t slices_;
  double scale_;
  std::vector<double> partials_;  // [row][col][slice]
  std::vector<uint8_t> present_;
  uint64_t lowres_ = 0;
  uint64_t exact_ = 0;
};

}  // namespace pdsim
