#include "pdsim/photonic.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "pdsim/error.hpp"

namespace pdsim {

void AdcSpec::validate() const {
  if (bits < 2 || bits > 30) throw Error(fmt::format("adc: bits must be in [2, 30], got {}", bits));
  if (!(lsb > 0.0 && std::isfinite(lsb))) throw Error(fmt::format("adc: lsb must be > 0, got {}", lsb));
  if (count_per_array < 1) {
    throw Error(fmt::format("adc: count_per_array must be >= 1, got {}", count_per_array));
  }
  if (!(conversion_time >= 0.0)) throw Error("adc: conversion_time must be >= 0");
}

void PdacSpec::validate() const {
  if (bits < 2) throw Error(fmt::format("pdac: bits must be >= 2, got {}", bits));
  if (!(modulation_time >= 0.0)) throw Error("pdac: modulation_time must be >= 0");
  if (count < 0) throw Error("pdac: count must be >= 0");
}

void DptcSpec::validate() const {
  if (rows < 1 || cols < 1) throw Error(fmt::format("dptc: array {}x{} is empty", rows, cols));
  if (!(op_time >= 0.0)) throw Error("dptc: op_time must be >= 0");
  if (!(noise_sigma >= 0.0)) throw Error("dptc: noise_sigma must be >= 0");
}

NoiseSource::NoiseSource(double sigma, uint64_t seed)
    : sigma_(sigma), engine_(seed), dist_(0.0, sigma > 0.0 ? sigma : 1.0) {
  if (!(sigma >= 0.0)) throw Error("noise: sigma must be >= 0");
}

double NoiseSource::sample() { return sigma_ > 0.0 ? dist_(engine_) : 0.0; }

double ddot(std::span<const int32_t> x, std::span<const int32_t> y, NoiseSource* noise) {
  if (x.size() != y.size()) {
    throw Error(fmt::format("ddot: vector lengths differ ({} vs {})", x.size(), y.size()));
  }
  int64_t acc = 0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += int64_t{x[i]} * y[i];
  double out = static_cast<double>(acc);
  if (noise != nullptr && noise->sigma() > 0.0) out += noise->sample();
  return out;
}

AnalogTile dptc_tile_op(const QuantizedMatrix& a_tile, const QuantizedMatrix& b_tile,
                        const DptcSpec& dptc, NoiseSource* noise) {
  if (a_tile.cols() != b_tile.rows()) {
    throw Error(fmt::format("dptc: operand depths differ ({} vs {})", a_tile.cols(),
                            b_tile.rows()));
  }
  if (a_tile.rows() > dptc.rows || b_tile.cols() > dptc.cols || a_tile.cols() > dptc.k_depth()) {
    throw Error(fmt::format("dptc: {}x{} * {}x{} tile exceeds the {}x{} array (depth {})",
                            a_tile.rows(), a_tile.cols(), b_tile.rows(), b_tile.cols(), dptc.rows,
                            dptc.cols, dptc.k_depth()));
  }
  AnalogTile out{dptc.rows, dptc.cols, std::vector<double>(dptc.rows * dptc.cols, 0.0)};
  const std::size_t depth = a_tile.cols();
  std::vector<int32_t> column(depth);
  for (std::size_t c = 0; c < dptc.cols; ++c) {
    if (c < b_tile.cols()) {
      for (std::size_t t = 0; t < depth; ++t) column[t] = b_tile.at(t, c);
    } else {
      std::fill(column.begin(), column.end(), 0);
    }
    for (std::size_t r = 0; r < dptc.rows; ++r) {
      // Padded rows still produce a (noisy) photocurrent of a zero dot product.
      double v = 0.0;
      if (r < a_tile.rows()) {
        v = ddot(a_tile.row(r), column, noise);
      } else if (noise != nullptr) {
        v = noise->sample();
      }
      out.values[r * dptc.cols + c] = v;
    }
  }
  return out;
}

AdcSample adc_convert(double analog, const AdcSpec& adc) {
  const double qmax = adc.max_code();
  const double steps = std::round(analog / adc.lsb);  // ties away from zero
  if (steps > qmax) return {adc.max_code(), true};
  if (steps < -qmax) return {-adc.max_code(), true};
  return {static_cast<int32_t>(steps), false};
}

CoordinateRegister::CoordinateRegister(std::size_t capacity_bytes, std::size_t entry_bytes)
    : capacity_entries_(entry_bytes == 0 ? 0 : capacity_bytes / entry_bytes),
      entry_bytes_(entry_bytes) {
  if (entry_bytes == 0) throw Error("coordinate register: entry size must be > 0");
  entries_.reserve(capacity_entries_);
}

std::size_t CoordinateRegister::log(const Coordinate& c) {
  ++logged_;
  if (capacity_entries_ == 0) {
    spill_buffer_.push_back(c);
    ++spilled_;
    ++spill_events_;
    return 1;
  }
  std::size_t moved = 0;
  if (entries_.size() == capacity_entries_) {
    moved = entries_.size();
    spill_buffer_.insert(spill_buffer_.end(), entries_.begin(), entries_.end());
    entries_.clear();
    spilled_ += moved;
    ++spill_events_;
  }
  entries_.push_back(c);
  peak_ = std::max(peak_, entries_.size());
  return moved;
}

std::vector<Coordinate> CoordinateRegister::drain() {
  std::vector<Coordinate> out;
  out.swap(entries_);
  entries_.reserve(capacity_entries_);
  drained_ += out.size();
  peak_ = 0;
  return out;
}

std::vector<Coordinate> CoordinateRegister::take_spilled() {
  std::vector<Coordinate> out;
  out.swap(spill_buffer_);
  return out;
}

ComparatorOutcome classify(double analog, const AdcSpec& adc, Coordinate coord,
                           CoordinateRegister* reg) {
  if (std::fabs(analog) > adc.full_scale()) {
    if (reg != nullptr) reg->log(coord);
    return {SignalClass::OverRes, coord};
  }
  return {SignalClass::LowRes, coord};
}

ResolutionHistogram resolution_histogram(std::span<const GemmOperands> workload,
                                         std::span<const int> bits_list, std::size_t k_depth,
                                         double lsb) {
  if (workload.empty()) throw Error("resolution histogram: empty workload");
  if (bits_list.empty()) throw Error("resolution histogram: empty bit-width list");
  for (std::size_t i = 0; i < bits_list.size(); ++i) {
    if (bits_list[i] < 2 || bits_list[i] > 30) {
      throw Error(fmt::format("resolution histogram: bit-width {} out of range", bits_list[i]));
    }
    if (i > 0 && bits_list[i] <= bits_list[i - 1]) {
      throw Error("resolution histogram: bit-widths must be strictly ascending");
    }
  }
  if (k_depth == 0) throw Error("resolution histogram: k_depth must be > 0");
  if (!(lsb > 0.0)) throw Error("resolution histogram: lsb must be > 0");

  std::vector<double> magnitudes;
  for (const auto& g : workload) {
    if (g.a.cols() != g.b.rows()) {
      throw Error(fmt::format("resolution histogram: operand depths differ ({} vs {})",
                              g.a.cols(), g.b.rows()));
    }
    const std::size_t depth = g.a.cols();
    const std::size_t slices = (depth + k_depth - 1) / k_depth;
    const QuantizedMatrix bt = g.b.transposed();
    for (std::size_t r = 0; r < g.a.rows(); ++r) {
      for (std::size_t c = 0; c < g.b.cols(); ++c) {
        for (std::size_t s = 0; s < slices; ++s) {
          const std::size_t lo = s * k_depth;
          const std::size_t len = std::min(k_depth, depth - lo);
          magnitudes.push_back(
              std::fabs(ddot(g.a.row(r).subspan(lo, len), bt.row(c).subspan(lo, len))));
        }
      }
    }
  }
  std::sort(magnitudes.begin(), magnitudes.end());

  ResolutionHistogram h;
  h.total_signals = magnitudes.size();
  for (int bits : bits_list) {
    const double full_scale = max_code(bits) * lsb;
    const auto within = static_cast<uint64_t>(
        std::upper_bound(magnitudes.begin(), magnitudes.end(), full_scale) - magnitudes.begin());
    const double frac =
        h.total_signals == 0 ? 1.0 : static_cast<double>(within) / static_cast<double>(h.total_signals);
    h.bins.push_back({bits, within, frac});
  }
  return h;
}

}  // namespace pdsim
