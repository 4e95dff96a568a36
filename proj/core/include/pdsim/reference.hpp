#pragma once

// Straight-line reference computations used by fidelity runs. They share no
// code with the scheduled engine.

#include <vector>

#include "pdsim/photonic.hpp"
#include "pdsim/qtensor.hpp"

namespace pdsim {

/// Per output: sum over K-slices of the exact partial when it exceeds the ADC
/// range, else its ADC reconstruction (code * lsb). Integer-product units,
/// row-major. Noise-free.
std::vector<double> hybrid_reference(const QuantizedMatrix& a, const QuantizedMatrix& b,
                                     const AdcSpec& adc, std::size_t k_depth);

/// softmax(Q K^T / sqrt(d_k)) V in double precision.
RealMatrix reference_attention(const RealMatrix& q, const RealMatrix& k, const RealMatrix& v);

}  // namespace pdsim
