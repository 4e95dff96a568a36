#pragma once

/**
 * Fixed-point tensors shared by every stage of the simulator.
 *
 * Quantization scheme (symmetric, zero_point = 0):
 *   qmax  = 2^(bits-1) - 1
 *   scale = max|v| / qmax            (per-tensor-max policy)
 *   code  = clamp(rne(v / scale), -qmax, +qmax)
 *   v'    = code * scale
 *
 * The asymmetric minimum -2^(bits-1) is never produced, so negation is
 * closed over the code range.
 */

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pdsim {

inline constexpr int kDefaultBits = 4;

/// Largest code magnitude for a symmetric signed range of `bits` bits.
constexpr int32_t max_code(int bits) { return (int32_t{1} << (bits - 1)) - 1; }

struct RealMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major

  static RealMatrix zeros(std::size_t rows, std::size_t cols);

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
};

struct QuantSpec {
  int bits = kDefaultBits;
  std::optional<double> fixed_scale;  // empty => per-tensor-max

  static QuantSpec per_tensor_max(int bits = kDefaultBits) { return {bits, std::nullopt}; }
  static QuantSpec fixed(double scale, int bits = kDefaultBits) { return {bits, scale}; }

  void validate() const;
};

/// Integer-coded matrix with a single per-tensor scale. Immutable once built;
/// the constructor enforces the code range, scale and shape invariants.
class QuantizedMatrix {
 public:
  QuantizedMatrix() = default;
  QuantizedMatrix(std::size_t rows, std::size_t cols, std::vector<int32_t> codes,
                  int bits, double scale);

  static QuantizedMatrix zeros(std::size_t rows, std::size_t cols,
                               int bits = kDefaultBits, double scale = 1.0);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  int bits() const { return bits_; }
  double scale() const { return scale_; }
  std::span<const int32_t> codes() const { return codes_; }
  int32_t at(std::size_t r, std::size_t c) const { return codes_[r * cols_ + c]; }
  std::span<const int32_t> row(std::size_t r) const {
    return std::span<const int32_t>(codes_).subspan(r * cols_, cols_);
  }

  QuantizedMatrix transposed() const;

  friend bool operator==(const QuantizedMatrix&, const QuantizedMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  int bits_ = kDefaultBits;
  double scale_ = 1.0;
  std::vector<int32_t> codes_;
};

/// Exact integer GEMM result. value = entry * scale.
struct IntMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<int64_t> values;
  double scale = 1.0;

  int64_t at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

QuantizedMatrix quantize(const RealMatrix& m, const QuantSpec& spec);
RealMatrix dequantize(const QuantizedMatrix& q);

/// Reference GEMM over codes. Accumulates in 64 bits, which covers
/// 2*bits + ceil(log2 K) for every legal bit-width and depth.
IntMatrix int_gemm(const QuantizedMatrix& a, const QuantizedMatrix& b);

// --- file formats -----------------------------------------------------------

/// Binary "QMAT" layout: 16-byte header (magic, u32 rows, u32 cols, u8 bits,
/// 3 pad bytes), row-major little-endian int8 codes, then an 8-byte
/// little-endian IEEE-754 scale.
void write_qmat(std::ostream& out, const QuantizedMatrix& q);
QuantizedMatrix read_qmat(std::istream& in, const std::string& source = "<stream>");
void save_qmat(const std::string& path, const QuantizedMatrix& q);
QuantizedMatrix load_qmat(const std::string& path);

/// Whitespace-separated reals, one matrix row per non-empty line.
RealMatrix read_real_text(std::istream& in, const std::string& source = "<stream>");
RealMatrix load_real_text(const std::string& path);

}  // namespace pdsim
