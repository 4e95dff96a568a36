#include "pdsim/reference.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "pdsim/error.hpp"

namespace pdsim {

std::vector<double> hybrid_reference(const QuantizedMatrix& a, const QuantizedMatrix& b,
                                     const AdcSpec& adc, std::size_t k_depth) {
  if (a.cols() != b.rows()) throw Error("hybrid_reference: inner dimensions differ");
  if (k_depth == 0) throw Error("hybrid_reference: k_depth must be > 0");
  std::vector<double> out(a.rows() * b.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double sum = 0.0;
      for (std::size_t k0 = 0; k0 < a.cols(); k0 += k_depth) {
        int64_t partial = 0;
        for (std::size_t k = k0; k < std::min(a.cols(), k0 + k_depth); ++k) {
          partial += int64_t{a.at(i, k)} * b.at(k, j);
        }
        const double p = static_cast<double>(partial);
        sum += std::abs(p) > adc.full_scale() ? p : adc_convert(p, adc).code * adc.lsb;
      }
      out[i * b.cols() + j] = sum;
    }
  }
  return out;
}

RealMatrix reference_attention(const RealMatrix& q, const RealMatrix& k, const RealMatrix& v) {
  if (q.cols != k.cols || k.rows != v.rows) {
    throw Error(fmt::format("reference_attention: shapes {}x{}, {}x{}, {}x{} do not chain",
                            q.rows, q.cols, k.rows, k.cols, v.rows, v.cols));
  }
  const double inv = 1.0 / std::sqrt(static_cast<double>(q.cols));
  RealMatrix out = RealMatrix::zeros(q.rows, v.cols);
  std::vector<double> s(k.rows);
  for (std::size_t i = 0; i < q.rows; ++i) {
    for (std::size_t j = 0; j < k.rows; ++j) {
      double dot = 0.0;
      for (std::size_t t = 0; t < q.cols; ++t) dot += q.at(i, t) * k.at(j, t);
      s[j] = dot * inv;
    }
    const double peak = *std::max_element(s.begin(), s.end());
    double denom = 0.0;
    for (double& x : s) {
      x = std::exp(x - peak);
      denom += x;
    }
    for (std::size_t j = 0; j < k.rows; ++j) {
      const double w = s[j] / denom;
      for (std::size_t c = 0; c < v.cols; ++c) out.at(i, c) += w * v.at(j, c);
    }
  }
  return out;
}

}  // namespace pdsim
