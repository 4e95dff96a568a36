#include "pdsim/qtensor.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cfenv>
#include <cmath>

#include "pdsim/error.hpp"

namespace pdsim {

RealMatrix RealMatrix::zeros(std::size_t rows, std::size_t cols) {
  return RealMatrix{rows, cols, std::vector<double>(rows * cols, 0.0)};
}

void QuantSpec::validate() const {
  if (bits < 2 || bits > 16) {
    throw Error(fmt::format("quant spec: bits must be in [2, 16], got {}", bits));
  }
  if (fixed_scale && !(std::isfinite(*fixed_scale) && *fixed_scale > 0.0)) {
    throw Error(fmt::format("quant spec: fixed scale must be finite and > 0, got {}",
                            *fixed_scale));
  }
}

QuantizedMatrix::QuantizedMatrix(std::size_t rows, std::size_t cols,
                                 std::vector<int32_t> codes, int bits, double scale)
    : rows_(rows), cols_(cols), bits_(bits), scale_(scale), codes_(std::move(codes)) {
  if (bits_ < 2 || bits_ > 16) {
    throw Error(fmt::format("quantized matrix: bits must be in [2, 16], got {}", bits_));
  }
  if (!(std::isfinite(scale_) && scale_ > 0.0)) {
    throw Error(fmt::format("quantized matrix: scale must be finite and > 0, got {}", scale_));
  }
  if (codes_.size() != rows_ * cols_) {
    throw Error(fmt::format("quantized matrix: {} codes for a {}x{} shape", codes_.size(),
                            rows_, cols_));
  }
  const int32_t qmax = max_code(bits_);
  for (std::size_t i = 0; i < codes_.size(); ++i) {
    if (codes_[i] < -qmax || codes_[i] > qmax) {
      throw Error(fmt::format("quantized matrix: code {} at index {} outside [-{}, {}]",
                              codes_[i], i, qmax, qmax));
    }
  }
}

QuantizedMatrix QuantizedMatrix::zeros(std::size_t rows, std::size_t cols, int bits,
                                       double scale) {
  return QuantizedMatrix(rows, cols, std::vector<int32_t>(rows * cols, 0), bits, scale);
}

QuantizedMatrix QuantizedMatrix::transposed() const {
  std::vector<int32_t> t(codes_.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) {
      t[c * rows_ + r] = codes_[r * cols_ + c];
    }
  }
  return QuantizedMatrix(cols_, rows_, std::move(t), bits_, scale_);
}

QuantizedMatrix quantize(const RealMatrix& m, const QuantSpec& spec) {
  spec.validate();
  if (m.values.size() != m.rows * m.cols) {
    throw Error(fmt::format("quantize: {} values for a {}x{} shape", m.values.size(), m.rows,
                            m.cols));
  }
  double max_abs = 0.0;
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    const double v = m.values[i];
    if (!std::isfinite(v)) {
      throw Error(fmt::format("quantize: non-finite value {} at index {} (row {}, col {})", v,
                              i, i / std::max<std::size_t>(m.cols, 1),
                              i % std::max<std::size_t>(m.cols, 1)));
    }
    max_abs = std::max(max_abs, std::fabs(v));
  }

  const int32_t qmax = max_code(spec.bits);
  double scale = 1.0;
  if (spec.fixed_scale) {
    scale = *spec.fixed_scale;
  } else if (max_abs > 0.0) {
    scale = max_abs / qmax;
  }

  // nearbyint honours the current rounding mode; pin it to ties-to-even.
  const int saved_mode = std::fegetround();
  std::fesetround(FE_TONEAREST);
  std::vector<int32_t> codes(m.values.size());
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const double q = std::nearbyint(m.values[i] / scale);
    codes[i] = static_cast<int32_t>(std::clamp(q, -double(qmax), double(qmax)));
  }
  std::fesetround(saved_mode);
  return QuantizedMatrix(m.rows, m.cols, std::move(codes), spec.bits, scale);
}

RealMatrix dequantize(const QuantizedMatrix& q) {
  RealMatrix out = RealMatrix::zeros(q.rows(), q.cols());
  const auto codes = q.codes();
  for (std::size_t i = 0; i < codes.size(); ++i) {
    out.values[i] = codes[i] * q.scale();
  }
  return out;
}

IntMatrix int_gemm(const QuantizedMatrix& a, const QuantizedMatrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(fmt::format("int_gemm: inner dimensions differ ({}x{} times {}x{})", a.rows(),
                            a.cols(), b.rows(), b.cols()));
  }
  const std::size_t depth = a.cols();
  const int depth_bits = depth <= 1 ? 0 : static_cast<int>(std::bit_width(depth - 1));
  if (a.bits() + b.bits() + depth_bits > 63) {
    throw Error(fmt::format("int_gemm: {}+{} bit operands at depth {} overflow a 64-bit "
                            "accumulator", a.bits(), b.bits(), depth));
  }

  IntMatrix out{a.rows(), b.cols(), std::vector<int64_t>(a.rows() * b.cols(), 0),
                a.scale() * b.scale()};
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto arow = a.row(i);
    int64_t* orow = out.values.data() + i * out.cols;
    for (std::size_t t = 0; t < depth; ++t) {
      const int64_t x = arow[t];
      if (x == 0) continue;
      const auto brow = b.row(t);
      for (std::size_t j = 0; j < out.cols; ++j) {
        orow[j] += x * brow[j];
      }
    }
  }
  return out;
}

}  // namespace pdsim
