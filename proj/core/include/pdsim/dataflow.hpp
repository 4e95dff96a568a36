#pragma once

// Shard partitioning, the broadcast schedule across Tiles, and the
// cycle-level engine that runs one GEMM or a full attention block.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pdsim/cycle_trace.hpp"
#include "pdsim/digital_die.hpp"
#include "pdsim/hardware_config.hpp"
#include "pdsim/qtensor.hpp"

namespace pdsim {

struct ShardGrid {
  std::size_t rows = 0;  // original matrix
  std::size_t cols = 0;
  std::size_t shard_rows = 0;
  std::size_t shard_cols = 0;
  std::size_t grid_rows = 0;
  std::size_t grid_cols = 0;
  std::vector<QuantizedMatrix> shards;  // row-major over the grid, each shard_rows x shard_cols

  const QuantizedMatrix& at(std::size_t i, std::size_t j) const { return shards[i * grid_cols + j]; }
  /// Unpadded extent of shard (i, j).
  std::size_t valid_rows(std::size_t i) const;
  std::size_t valid_cols(std::size_t j) const;
};

/// Zero-padded shard grid; every shard has exactly the requested shape.
ShardGrid partition(const QuantizedMatrix& m, std::size_t shard_rows, std::size_t shard_cols);
QuantizedMatrix reassemble(const ShardGrid& grid);

QuantizedMatrix slice_rows(const QuantizedMatrix& m, std::size_t first, std::size_t count);

struct GemmShape {
  std::size_t m = 0;
  std::size_t k = 0;
  std::size_t n = 0;
};

struct ArrayOp {
  uint32_t a_row_shard = 0;
  uint32_t k_slice = 0;
  uint32_t b_col_shard = 0;
  uint32_t tile = 0;
  uint64_t cycle = 0;
};

/// Consecutive B shards a Tile keeps resident in its local SRAM.
struct LocalBatch {
  uint32_t tile = 0;
  uint64_t first_step = 0;  // step = (round, k-slice) in the Tile's order
  uint64_t steps = 0;
  uint64_t bytes = 0;
};

/// Column shards of B are dealt to Tiles; each broadcast cycle converts one
/// A shard once and every Tile multiplies it with its current B shard.
/// Cycle c = (round * k_slices + k) * row_shards + i.
struct TileSchedule {
  GemmShape shape;
  std::size_t shard_rows = 0;
  std::size_t shard_cols = 0;
  std::size_t row_shards = 0;
  std::size_t k_slices = 0;
  std::size_t col_shards = 0;
  int tiles_total = 0;
  int tiles_used = 0;
  std::size_t rounds = 0;
  uint64_t cycles = 0;
  std::size_t shard_bytes = 0;
  std::size_t batch_capacity = 0;  // shards per local-SRAM batch
  std::vector<std::vector<uint32_t>> tile_columns;  // per Tile, in round order
  std::vector<ArrayOp> ops;                         // cycle-major, Tile ascending
  std::vector<LocalBatch> batches;

  uint64_t steps_per_tile(uint32_t tile) const { return tile_columns[tile].size() * k_slices; }
};

/// Packed operand footprint: codes of `bits` bits, rounded up to whole bytes.
uint64_t packed_bytes(std::size_t elements, int bits);
/// Accumulator outputs are stored as 32-bit words.
inline constexpr uint64_t kResultBytes = 4;

/// Rejects a B shard that cannot fit in local SRAM.
TileSchedule build_schedule(const GemmShape& shape, const HardwareConfig& hw);

/// ADC slots a full array needs to convert every output: ceil(rows*cols / ADCs).
uint64_t conversion_slots_per_op(const HardwareConfig& hw);

/// HBM transfers a GEMM performs; the caller decides residency.
struct GemmIo {
  uint64_t load_read_bytes = 0;      // before the first cycle
  uint64_t round_reread_bytes = 0;   // at the start of every round after the first
  uint64_t store_write_bytes = 0;    // after the last cycle
};

struct GemmStats {
  uint64_t array_ops = 0;
  uint64_t cycles = 0;
  uint64_t signals = 0;  // valid partials
  uint64_t lowres = 0;
  uint64_t overres = 0;
  uint64_t saturated = 0;
  uint64_t mau_tasks = 0;
  uint64_t exact_contributions = 0;
  uint64_t lowres_contributions = 0;
  uint64_t spilled = 0;
  uint64_t register_peak = 0;

  GemmStats& operator+=(const GemmStats& o);
};

struct GemmResult {
  ScoreMatrix out;  // integer-product units, real = value * scale
  GemmStats stats;
};

struct GemmContext {
  uint32_t gemm_id = 0;
  uint64_t seed = 0;
  GemmIo io;
};

/// Runs a GEMM through the schedule. Comparator-equipped configs route
/// over-range partials through the coordinate register to the MAU; others
/// convert every partial. Windows are appended to `trace` when given.
GemmResult run_gemm(const QuantizedMatrix& a, const QuantizedMatrix& b, const HardwareConfig& hw,
                    const GemmContext& ctx, CycleTrace* trace = nullptr);

/// Q, K and V stacked by (batch, head): rows = batch * heads * seq_len.
struct AttentionWorkload {
  std::size_t seq_len = 0;
  std::size_t d_k = 0;
  std::size_t heads = 1;
  std::size_t batch = 1;
  QuantizedMatrix q;
  QuantizedMatrix k;
  QuantizedMatrix v;

  std::size_t blocks() const { return heads * batch; }
  void validate() const;
};

/// Which per-head intermediates stay in shared SRAM; the rest go to HBM.
struct ResidencyPlan {
  uint64_t capacity_bytes = 0;
  bool q = false;
  bool k = false;
  bool v = false;
  bool s = false;
  bool p = false;
};

ResidencyPlan plan_residency(std::size_t seq_len, std::size_t d_k, const HardwareConfig& hw);

struct HeadResult {
  ScoreMatrix s;
  std::vector<double> probabilities;  // seq_len x seq_len, before re-quantization
  QuantizedMatrix p;
  ScoreMatrix o;
};

struct AttentionResult {
  RealMatrix output;  // stacked like the inputs
  CycleTrace trace;
  GemmStats score_stats;   // Q x K^T
  GemmStats output_stats;  // P x V
  ResidencyPlan residency;
  std::vector<HeadResult> heads;  // filled when requested
};

AttentionResult run_attention(const AttentionWorkload& w, const HardwareConfig& hw, uint64_t seed,
                              bool keep_heads = false);

/// Attention probabilities enter the second GEMM at the operand precision.
inline constexpr int kProbabilityBits = 4;

struct TrafficSummary {
  uint64_t hbm_read_bytes = 0;
  uint64_t hbm_write_bytes = 0;
  uint64_t shared_to_local_bytes = 0;
  uint64_t broadcast_bytes = 0;
  uint64_t photonic_to_digital_bytes = 0;

  uint64_t hbm_bytes() const { return hbm_read_bytes + hbm_write_bytes; }
  double hbm_time(double bandwidth) const { return static_cast<double>(hbm_bytes()) / bandwidth; }
};

TrafficSummary traffic_account(const CycleTrace& trace);

}  // namespace pdsim
