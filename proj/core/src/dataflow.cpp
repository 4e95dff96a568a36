#include "pdsim/dataflow.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <optional>

#include "pdsim/error.hpp"

namespace pdsim {
namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Noise stream of one array operation; independent of Tile assignment and
// execution order.
uint64_t op_seed(uint64_t seed, uint32_t gemm, std::size_t i, std::size_t k, std::size_t j) {
  uint64_t h = splitmix64(seed);
  for (uint64_t v : {uint64_t{gemm}, uint64_t{i}, uint64_t{k}, uint64_t{j}}) h = splitmix64(h ^ v);
  return h;
}

constexpr std::size_t kCoordLimit = std::size_t{1} << 21;

}  // namespace

std::size_t ShardGrid::valid_rows(std::size_t i) const {
  return std::min(shard_rows, rows - i * shard_rows);
}

std::size_t ShardGrid::valid_cols(std::size_t j) const {
  return std::min(shard_cols, cols - j * shard_cols);
}

ShardGrid partition(const QuantizedMatrix& m, std::size_t shard_rows, std::size_t shard_cols) {
  if (shard_rows == 0 || shard_cols == 0) throw Error("partition: shard dimensions must be > 0");
  ShardGrid g;
  g.rows = m.rows();
  g.cols = m.cols();
  g.shard_rows = shard_rows;
  g.shard_cols = shard_cols;
  g.grid_rows = ceil_div(m.rows(), shard_rows);
  g.grid_cols = ceil_div(m.cols(), shard_cols);
  g.shards.reserve(g.grid_rows * g.grid_cols);
  for (std::size_t i = 0; i < g.grid_rows; ++i) {
    for (std::size_t j = 0; j < g.grid_cols; ++j) {
      std::vector<int32_t> codes(shard_rows * shard_cols, 0);
      const std::size_t vr = g.valid_rows(i);
      const std::size_t vc = g.valid_cols(j);
      for (std::size_t r = 0; r < vr; ++r) {
        const auto src = m.row(i * shard_rows + r).subspan(j * shard_cols, vc);
        std::copy(src.begin(), src.end(), codes.begin() + static_cast<std::ptrdiff_t>(r * shard_cols));
      }
      g.shards.emplace_back(shard_rows, shard_cols, std::move(codes), m.bits(), m.scale());
    }
  }
  return g;
}

QuantizedMatrix reassemble(const ShardGrid& g) {
  std::vector<int32_t> codes(g.rows * g.cols, 0);
  int bits = kDefaultBits;
  double scale = 1.0;
  for (std::size_t i = 0; i < g.grid_rows; ++i) {
    for (std::size_t j = 0; j < g.grid_cols; ++j) {
      const auto& s = g.at(i, j);
      bits = s.bits();
      scale = s.scale();
      for (std::size_t r = 0; r < g.valid_rows(i); ++r) {
        for (std::size_t c = 0; c < g.valid_cols(j); ++c) {
          codes[(i * g.shard_rows + r) * g.cols + j * g.shard_cols + c] = s.at(r, c);
        }
      }
    }
  }
  return QuantizedMatrix(g.rows, g.cols, std::move(codes), bits, scale);
}

QuantizedMatrix slice_rows(const QuantizedMatrix& m, std::size_t first, std::size_t count) {
  if (first + count > m.rows()) {
    throw Error(fmt::format("slice_rows: rows [{}, {}) exceed {}", first, first + count, m.rows()));
  }
  const auto src = m.codes().subspan(first * m.cols(), count * m.cols());
  return QuantizedMatrix(count, m.cols(), std::vector<int32_t>(src.begin(), src.end()), m.bits(),
                         m.scale());
}

uint64_t packed_bytes(std::size_t elements, int bits) {
  return (uint64_t{elements} * static_cast<uint64_t>(bits) + 7) / 8;
}

TileSchedule build_schedule(const GemmShape& shape, const HardwareConfig& hw) {
  if (hw.tiles < 1) throw Error(fmt::format("schedule: tiles must be >= 1, got {}", hw.tiles));
  TileSchedule s;
  s.shape = shape;
  s.shard_rows = hw.dptc_rows;
  s.shard_cols = hw.dptc_cols;
  const std::size_t depth = hw.dptc_spec().k_depth();
  s.row_shards = ceil_div(shape.m, s.shard_rows);
  s.k_slices = ceil_div(shape.k, depth);
  s.col_shards = ceil_div(shape.n, s.shard_cols);
  s.tiles_total = hw.tiles;
  s.shard_bytes = packed_bytes(depth * s.shard_cols, hw.pdac_bits);
  if (s.shard_bytes > hw.local_sram_bytes) {
    throw Error(fmt::format("schedule: a {}-byte B shard does not fit the {}-byte local SRAM",
                            s.shard_bytes, hw.local_sram_bytes));
  }
  s.batch_capacity = hw.local_sram_bytes / s.shard_bytes;
  if (hw.double_buffering) s.batch_capacity = std::max<std::size_t>(1, s.batch_capacity / 2);

  const auto tiles = static_cast<std::size_t>(hw.tiles);
  s.tile_columns.assign(tiles, {});
  if (hw.assignment == TileAssignment::RoundRobin) {
    for (std::size_t j = 0; j < s.col_shards; ++j) {
      s.tile_columns[j % tiles].push_back(static_cast<uint32_t>(j));
    }
  } else {
    const std::size_t per = std::max<std::size_t>(1, ceil_div(s.col_shards, tiles));
    for (std::size_t j = 0; j < s.col_shards; ++j) {
      s.tile_columns[j / per].push_back(static_cast<uint32_t>(j));
    }
  }
  for (const auto& cols : s.tile_columns) {
    if (!cols.empty()) ++s.tiles_used;
    s.rounds = std::max(s.rounds, cols.size());
  }
  s.cycles = uint64_t{s.rounds} * s.k_slices * s.row_shards;

  s.ops.reserve(s.row_shards * s.k_slices * s.col_shards);
  for (std::size_t r = 0; r < s.rounds; ++r) {
    for (std::size_t k = 0; k < s.k_slices; ++k) {
      for (std::size_t i = 0; i < s.row_shards; ++i) {
        const uint64_t cycle = (r * s.k_slices + k) * s.row_shards + i;
        for (std::size_t t = 0; t < tiles; ++t) {
          if (r >= s.tile_columns[t].size()) continue;
          s.ops.push_back(ArrayOp{static_cast<uint32_t>(i), static_cast<uint32_t>(k),
                                  s.tile_columns[t][r], static_cast<uint32_t>(t), cycle});
        }
      }
    }
  }

  for (std::size_t t = 0; t < tiles; ++t) {
    const uint64_t steps = s.steps_per_tile(static_cast<uint32_t>(t));
    for (uint64_t first = 0; first < steps; first += s.batch_capacity) {
      const uint64_t n = std::min<uint64_t>(s.batch_capacity, steps - first);
      s.batches.push_back(LocalBatch{static_cast<uint32_t>(t), first, n, n * s.shard_bytes});
    }
  }
  return s;
}

uint64_t conversion_slots_per_op(const HardwareConfig& hw) {
  return ceil_div(hw.dptc_rows * hw.dptc_cols, static_cast<std::size_t>(hw.adc.count));
}

GemmStats& GemmStats::operator+=(const GemmStats& o) {
  array_ops += o.array_ops;
  cycles += o.cycles;
  signals += o.signals;
  lowres += o.lowres;
  overres += o.overres;
  saturated += o.saturated;
  mau_tasks += o.mau_tasks;
  exact_contributions += o.exact_contributions;
  lowres_contributions += o.lowres_contributions;
  spilled += o.spilled;
  register_peak = std::max(register_peak, o.register_peak);
  return *this;
}

GemmResult run_gemm(const QuantizedMatrix& a, const QuantizedMatrix& b, const HardwareConfig& hw,
                    const GemmContext& ctx, CycleTrace* trace) {
  if (a.cols() != b.rows()) {
    throw Error(fmt::format("gemm: inner dimensions differ ({}x{} * {}x{})", a.rows(), a.cols(),
                            b.rows(), b.cols()));
  }
  const TileSchedule sched = build_schedule({a.rows(), a.cols(), b.cols()}, hw);
  if (a.rows() >= kCoordLimit || b.cols() >= kCoordLimit || sched.k_slices >= kCoordLimit) {
    throw Error("gemm: dimensions exceed the coordinate encoding");
  }
  const DptcSpec dptc = hw.dptc_spec();
  const AdcSpec adc = hw.adc_spec();
  const MauSpec mau = hw.mau_spec();
  const bool hybrid = hw.hybrid();
  const std::size_t depth = dptc.k_depth();
  const std::size_t ma = sched.row_shards;
  const std::size_t kk = sched.k_slices;

  const ShardGrid ag = partition(a, sched.shard_rows, depth);
  const ShardGrid bg = partition(b, depth, sched.shard_cols);
  // Column access to B shards for the MAU.
  const ShardGrid btg = partition(b.transposed(), sched.shard_cols, depth);

  Accumulator acc(a.rows(), b.cols(), kk, a.scale() * b.scale());
  GemmResult result;
  GemmStats& st = result.stats;
  st.cycles = sched.cycles;

  const auto tiles = static_cast<std::size_t>(hw.tiles);
  std::vector<CoordinateRegister> regs;
  if (hybrid) regs.assign(tiles, CoordinateRegister(hw.register_bytes, hw.register_entry_bytes));

  // Local-SRAM fill bytes of the batches starting at each step, summed over Tiles.
  auto fill_at = [&](uint64_t step) {
    uint64_t bytes = 0;
    for (const auto& bt : sched.batches) bytes += bt.first_step == step ? bt.bytes : 0;
    return bytes;
  };

  const bool active = !sched.ops.empty();
  if (trace != nullptr && (active || ctx.io.load_read_bytes > 0)) {
    auto& w = trace->open(WindowKind::Load, ctx.gemm_id);
    w.hbm_read_bytes = ctx.io.load_read_bytes;
    w.sram_fill_bytes = active ? fill_at(0) : 0;
  }

  struct TileWork {
    std::optional<ArrayOp> op;
    uint64_t lowres = 0;
    uint64_t overres = 0;
    uint64_t spilled_before = 0;
  };
  std::vector<TileWork> work(tiles);
  const uint64_t a_shard_bytes = packed_bytes(sched.shard_rows * depth, a.bits());
  const std::size_t cap = sched.batch_capacity;
  std::size_t next_op = 0;

  for (uint64_t c = 0; c < sched.cycles; ++c) {
    const uint64_t step = c / ma;
    const uint64_t i_shard = c % ma;
    const bool step_start = i_shard == 0;
    if (trace != nullptr && step_start && step > 0 && step % cap == 0 && !hw.double_buffering) {
      auto& lw = trace->open(WindowKind::Load, ctx.gemm_id);
      lw.sram_fill_bytes = fill_at(step);
    }
    WindowRecord w;
    w.kind = WindowKind::Compute;
    w.gemm = ctx.gemm_id;
    w.pdac_conversions = 1;
    w.broadcast_bytes = a_shard_bytes;
    if (hw.double_buffering && step_start && step % cap == 0) w.sram_fill_bytes = fill_at(step + cap);
    if (step_start && step % kk == 0 && step > 0) w.hbm_read_bytes = ctx.io.round_reread_bytes;

    for (auto& tw : work) tw = TileWork{};
    while (next_op < sched.ops.size() && sched.ops[next_op].cycle == c) {
      const ArrayOp& op = sched.ops[next_op++];
      TileWork& tw = work[op.tile];
      tw.op = op;
      if (hybrid) tw.spilled_before = regs[op.tile].spilled();
      const auto& a_sh = ag.at(op.a_row_shard, op.k_slice);
      const auto& b_sh = bg.at(op.k_slice, op.b_col_shard);
      const std::size_t vr = ag.valid_rows(op.a_row_shard);
      const std::size_t vc = bg.valid_cols(op.b_col_shard);
      const std::size_t kv = ag.valid_cols(op.k_slice);

      std::optional<NoiseSource> noise;
      if (dptc.noise_sigma > 0.0) {
        noise.emplace(dptc.noise_sigma,
                      op_seed(ctx.seed, ctx.gemm_id, op.a_row_shard, op.k_slice, op.b_col_shard));
      }
      const AnalogTile analog = dptc_tile_op(a_sh, b_sh, dptc, noise ? &*noise : nullptr);

      for (std::size_t r = 0; r < vr; ++r) {
        for (std::size_t cc = 0; cc < vc; ++cc) {
          const Coordinate coord{static_cast<uint32_t>(op.a_row_shard * sched.shard_rows + r),
                                 static_cast<uint32_t>(op.b_col_shard * sched.shard_cols + cc),
                                 op.k_slice};
          const double v = analog.at(r, cc);
          if (hybrid && classify(v, adc, coord, &regs[op.tile]).classification ==
                            SignalClass::OverRes) {
            ++tw.overres;
            continue;
          }
          const AdcSample sample = adc_convert(v, adc);
          st.saturated += sample.saturated ? 1 : 0;
          w.saturated += sample.saturated ? 1 : 0;
          acc.add_lowres(coord, sample.code, adc.lsb);
          ++tw.lowres;
        }
      }
      ++w.photonic_ops;
      w.macs += uint64_t{vr} * vc * kv;
      st.signals += uint64_t{vr} * vc;
      ++st.array_ops;
    }

    const auto adc_count = static_cast<uint64_t>(adc.count_per_array);
    for (std::size_t t = 0; t < tiles; ++t) {
      TileWork& tw = work[t];
      if (!tw.op) continue;
      const uint64_t slots = (tw.lowres + adc_count - 1) / adc_count;
      w.adc_slots_total += slots;
      w.adc_slots_max = std::max(w.adc_slots_max, slots);
      w.lowres += tw.lowres;
      w.overres += tw.overres;
      if (!hybrid) continue;

      CoordinateRegister& reg = regs[t];
      const uint64_t spilled = reg.spilled() - tw.spilled_before;
      w.register_peak = std::max<uint64_t>(w.register_peak, reg.peak());
      std::vector<Coordinate> flagged = reg.take_spilled();
      const std::vector<Coordinate> resident = reg.drain();
      flagged.insert(flagged.end(), resident.begin(), resident.end());
      FlaggedSet set;
      for (const auto& f : flagged) set.insert(f);

      const ArrayOp& op = *tw.op;
      const auto& a_sh = ag.at(op.a_row_shard, op.k_slice);
      const auto& bt_sh = btg.at(op.b_col_shard, op.k_slice);
      const std::size_t kv = ag.valid_cols(op.k_slice);
      uint64_t cycles = 0;
      for (const auto& f : flagged) {
        const std::size_t r = f.row - op.a_row_shard * sched.shard_rows;
        const std::size_t cc = f.col - op.b_col_shard * sched.shard_cols;
        const MauResult res = mau_recompute(RecomputeTask{f}, a_sh.row(r).subspan(0, kv),
                                            bt_sh.row(cc).subspan(0, kv), set, mau);
        acc.add_exact(f, res.value);
        cycles += res.cycles;
      }
      cycles += (spilled + kSpillEntriesPerCycle - 1) / kSpillEntriesPerCycle;
      w.digital_tasks += flagged.size();
      w.digital_cycles_total += cycles;
      w.digital_cycles_max = std::max(w.digital_cycles_max, cycles);
      w.spilled += spilled;
      w.flagged_bytes +=
          flagged.size() * (hw.register_entry_bytes + packed_bytes(kv, a.bits()) +
                            packed_bytes(kv, b.bits()));
      st.mau_tasks += flagged.size();
      st.spilled += spilled;
      st.register_peak = std::max(st.register_peak, w.register_peak);
    }
    st.lowres += w.lowres;
    st.overres += w.overres;
    if (trace != nullptr) {
      w.window = trace->windows.size();
      trace->windows.push_back(w);
    }
  }

  if (trace != nullptr && ctx.io.store_write_bytes > 0) {
    auto& sw = trace->open(WindowKind::Store, ctx.gemm_id);
    sw.hbm_write_bytes = ctx.io.store_write_bytes;
  }

  result.out = acc.finalize();
  st.exact_contributions = acc.exact_contributions();
  st.lowres_contributions = acc.lowres_contributions();
  return result;
}

void AttentionWorkload::validate() const {
  if (seq_len == 0 || d_k == 0 || heads == 0 || batch == 0) {
    throw Error(fmt::format("workload: dimensions must be positive (seq_len {}, d_k {}, heads {}, "
                            "batch {})", seq_len, d_k, heads, batch));
  }
  const std::size_t rows = blocks() * seq_len;
  for (const auto* m : {&q, &k, &v}) {
    if (m->rows() != rows || m->cols() != d_k) {
      throw Error(fmt::format("workload: operand is {}x{}, expected {}x{}", m->rows(), m->cols(),
                              rows, d_k));
    }
  }
}

ResidencyPlan plan_residency(std::size_t seq_len, std::size_t d_k, const HardwareConfig& hw) {
  ResidencyPlan p;
  // Each Tile reserves a fill buffer the size of its local SRAM.
  const uint64_t reserved = uint64_t{static_cast<std::size_t>(hw.tiles)} * hw.local_sram_bytes;
  p.capacity_bytes = hw.shared_sram_bytes > reserved ? hw.shared_sram_bytes - reserved : 0;
  const uint64_t operand = packed_bytes(seq_len * d_k, hw.pdac_bits);
  const uint64_t sizes[] = {operand, operand, operand, uint64_t{seq_len} * seq_len * kResultBytes,
                            packed_bytes(seq_len * seq_len, kProbabilityBits)};
  bool* flags[] = {&p.q, &p.k, &p.v, &p.s, &p.p};
  uint64_t used = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    if (used + sizes[i] > p.capacity_bytes) break;
    used += sizes[i];
    *flags[i] = true;
  }
  return p;
}

AttentionResult run_attention(const AttentionWorkload& w, const HardwareConfig& hw, uint64_t seed,
                              bool keep_heads) {
  w.validate();
  const std::size_t L = w.seq_len;
  const std::size_t d = w.d_k;
  AttentionResult res;
  res.residency = plan_residency(L, d, hw);
  res.output = RealMatrix::zeros(w.blocks() * L, d);
  const ResidencyPlan& rp = res.residency;
  const SoftmaxLut lut;

  const uint64_t q_bytes = packed_bytes(L * d, w.q.bits());
  const uint64_t k_bytes = packed_bytes(L * d, w.k.bits());
  const uint64_t v_bytes = packed_bytes(L * d, w.v.bits());
  const uint64_t s_bytes = uint64_t{L} * L * kResultBytes;
  const uint64_t p_bytes = packed_bytes(L * L, kProbabilityBits);
  const uint64_t o_bytes = uint64_t{L} * d * kResultBytes;

  for (std::size_t blk = 0; blk < w.blocks(); ++blk) {
    spdlog::debug("attention block {}/{}", blk + 1, w.blocks());
    const QuantizedMatrix qh = slice_rows(w.q, blk * L, L);
    const QuantizedMatrix kh = slice_rows(w.k, blk * L, L);
    const QuantizedMatrix vh = slice_rows(w.v, blk * L, L);
    const auto id = static_cast<uint32_t>(2 * blk);

    GemmContext c1{id, seed, {q_bytes + k_bytes, rp.q ? 0 : q_bytes, 0}};
    GemmResult g1 = run_gemm(qh, kh.transposed(), hw, c1, &res.trace);
    res.score_stats += g1.stats;

    // Barrier: every score of a row exists before its softmax.
    auto& sw = res.trace.open(WindowKind::Softmax, id);
    const uint64_t units = std::max(1, hw.softmax.count) * static_cast<uint64_t>(hw.tiles);
    sw.softmax_cycles_max = ((L + units - 1) / units) * L;
    sw.softmax_cycles_total = uint64_t{L} * L;
    if (!rp.s) {
      sw.hbm_write_bytes += s_bytes;
      sw.hbm_read_bytes += s_bytes;
    }
    if (!rp.p) sw.hbm_write_bytes += p_bytes;

    RealMatrix probs = RealMatrix::zeros(L, L);
    for (std::size_t r = 0; r < L; ++r) {
      const std::span<const double> row(g1.out.values.data() + r * L, L);
      const auto pr = softmax_row(row, g1.out.scale, static_cast<int>(d), lut);
      std::copy(pr.begin(), pr.end(), probs.values.begin() + static_cast<std::ptrdiff_t>(r * L));
    }
    QuantizedMatrix p = quantize(probs, QuantSpec::per_tensor_max(kProbabilityBits));

    GemmContext c2{id + 1, seed, {v_bytes + (rp.p ? 0 : p_bytes), rp.p ? 0 : p_bytes, o_bytes}};
    GemmResult g2 = run_gemm(p, vh, hw, c2, &res.trace);
    res.output_stats += g2.stats;

    for (std::size_t r = 0; r < L; ++r) {
      for (std::size_t c = 0; c < d; ++c) {
        res.output.at(blk * L + r, c) = g2.out.at(r, c) * g2.out.scale;
      }
    }
    if (keep_heads) {
      res.heads.push_back(HeadResult{std::move(g1.out), std::move(probs.values), std::move(p),
                                     std::move(g2.out)});
    }
  }
  return res;
}

TrafficSummary traffic_account(const CycleTrace& trace) {
  TrafficSummary t;
  for (const auto& w : trace.windows) {
    t.hbm_read_bytes += w.hbm_read_bytes;
    t.hbm_write_bytes += w.hbm_write_bytes;
    t.shared_to_local_bytes += w.sram_fill_bytes;
    t.broadcast_bytes += w.broadcast_bytes;
    t.photonic_to_digital_bytes += w.flagged_bytes;
  }
  return t;
}

}  // namespace pdsim
