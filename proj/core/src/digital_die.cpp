#include "pdsim/digital_die.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <ostream>

#include "pdsim/error.hpp"

namespace pdsim {

void MauSpec::validate() const {
  if (macs_per_cycle < 1) {
    throw Error(fmt::format("mau: macs_per_cycle must be >= 1, got {}", macs_per_cycle));
  }
  if (!(cycle_time >= 0.0)) throw Error("mau: cycle_time must be >= 0");
}

uint64_t mau_cycles(std::size_t slice_length, const MauSpec& mau) {
  const auto per = static_cast<std::size_t>(mau.macs_per_cycle);
  return (slice_length + per - 1) / per;
}

MauResult mau_recompute(const RecomputeTask& task, std::span<const int32_t> a_slice,
                        std::span<const int32_t> b_slice, const FlaggedSet& flagged,
                        const MauSpec& mau) {
  if (!flagged.contains(task.coordinate)) {
    throw Error(fmt::format("mau: coordinate (row {}, col {}, slice {}) was never flagged",
                            task.coordinate.row, task.coordinate.col, task.coordinate.k_slice));
  }
  if (a_slice.size() != b_slice.size()) {
    throw Error(fmt::format("mau: operand slices differ in length ({} vs {})", a_slice.size(),
                            b_slice.size()));
  }
  int64_t acc = 0;
  for (std::size_t i = 0; i < a_slice.size(); ++i) acc += int64_t{a_slice[i]} * b_slice[i];
  return {acc, mau_cycles(a_slice.size(), mau)};
}

FixedArg FixedArg::from_real(double arg) {
  const double scaled = arg * (1 << kFracBits);
  if (scaled <= kMinRaw) return FixedArg{kMinRaw};
  if (scaled >= 32767.0) return FixedArg{32767};
  const int saved_mode = std::fegetround();
  std::fesetround(FE_TONEAREST);
  const auto raw = static_cast<int32_t>(std::nearbyint(scaled));
  std::fesetround(saved_mode);
  return FixedArg{raw};
}

SoftmaxLut::SoftmaxLut() {
  for (std::size_t i = 0; i < kEntries; ++i) {
    hi_[i] = static_cast<uint8_t>(std::lround(255.0 * std::exp(-static_cast<double>(i))));
    lo_[i] = static_cast<uint8_t>(
        std::lround(255.0 * std::exp(-static_cast<double>(i) / (1 << FixedArg::kFracBits))));
  }
}

double SoftmaxLut::lut_exp(FixedArg arg) const {
  if (arg.raw > 0) {
    throw Error(fmt::format("lut_exp: argument {} is positive", arg.value()));
  }
  return decode(hi_[hi_index(arg)]) * decode(lo_[lo_index(arg)]);
}

double SoftmaxLut::lut_exp(double arg) const {
  if (arg > 0.0) throw Error(fmt::format("lut_exp: argument {} is positive", arg));
  if (arg < FixedArg::kMinRaw / double(1 << FixedArg::kFracBits)) return 0.0;
  return lut_exp(FixedArg::from_real(arg));
}

void SoftmaxLut::dump_hex(std::ostream& out) const {
  for (uint8_t v : hi_) out << fmt::format("{:02x}\n", v);
  for (uint8_t v : lo_) out << fmt::format("{:02x}\n", v);
}

std::vector<double> softmax_row(std::span<const double> scores, double scale, int d_k,
                                const SoftmaxLut& lut) {
  if (scores.empty()) throw Error("softmax: empty row");
  if (d_k <= 0) throw Error(fmt::format("softmax: d_k must be > 0, got {}", d_k));
  const double peak = *std::max_element(scores.begin(), scores.end());
  const double arg_scale = scale / std::sqrt(static_cast<double>(d_k));

  std::vector<double> out(scores.size());
  double denom = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double arg = (scores[i] - peak) * arg_scale;
    out[i] = lut.lut_exp(arg);
    denom += out[i];
  }
  // The peak maps to exp(0) == 1, so denom >= 1.
  for (double& v : out) v /= denom;
  return out;
}

Accumulator::Accumulator(std::size_t rows, std::size_t cols, std::size_t slices, double scale)
    : rows_(rows),
      cols_(cols),
      slices_(slices),
      scale_(scale),
      partials_(rows * cols * slices, 0.0),
      present_(rows * cols * slices, 0) {}

void Accumulator::put(const Coordinate& c, double v) {
  if (c.row >= rows_ || c.col >= cols_ || c.k_slice >= slices_) {
    throw Error(fmt::format("accumulator: coordinate (row {}, col {}, slice {}) out of range",
                            c.row, c.col, c.k_slice));
  }
  const std::size_t idx = (std::size_t{c.row} * cols_ + c.col) * slices_ + c.k_slice;
  if (present_[idx]) {
    throw Error(fmt::format("accumulator: duplicate contribution at (row {}, col {}, slice {})",
                            c.row, c.col, c.k_slice));
  }
  present_[idx] = 1;
  partials_[idx] = v;
}

void Accumulator::add_lowres(const Coordinate& c, int32_t code, double lsb) {
  put(c, code * lsb);
  ++lowres_;
}

void Accumulator::add_exact(const Coordinate& c, int64_t value) {
  put(c, static_cast<double>(value));
  ++exact_;
}

ScoreMatrix Accumulator::finalize() const {
  ScoreMatrix out{rows_, cols_, std::vector<double>(rows_ * cols_, 0.0), scale_};
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) {
      double sum = 0.0;
      const std::size_t base = (r * cols_ + c) * slices_;
      for (std::size_t s = 0; s < slices_; ++s) {
        if (!present_[base + s]) {
          throw Error(fmt::format("accumulator: missing slice {} at (row {}, col {})", s, r, c));
        }
        sum += partials_[base + s];
      }
      out.values[r * cols_ + c] = sum;
    }
  }
  return out;
}

}  // namespace pdsim
