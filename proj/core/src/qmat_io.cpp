#include <fmt/format.h>

#include <array>
#include <bit>
#include <cmath>
#include <cctype>
#include <cstring>
#include <string>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "pdsim/error.hpp"
#include "pdsim/qtensor.hpp"

namespace pdsim {
namespace {

constexpr std::array<char, 4> kMagic{'Q', 'M', 'A', 'T'};
constexpr std::size_t kHeaderBytes = 16;

void put_u32(std::ostream& out, uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                              static_cast<char>((v >> 16) & 0xFF),
                              static_cast<char>((v >> 24) & 0xFF)};
  out.write(b.data(), b.size());
}

uint32_t get_u32(const unsigned char* p) {
  return uint32_t{p[0]} | (uint32_t{p[1]} << 8) | (uint32_t{p[2]} << 16) |
         (uint32_t{p[3]} << 24);
}

}  // namespace

void write_qmat(std::ostream& out, const QuantizedMatrix& q) {
  if (q.bits() > 8) {
    throw Error(fmt::format("qmat: {}-bit codes do not fit the int8 payload", q.bits()));
  }
  if (q.rows() > UINT32_MAX || q.cols() > UINT32_MAX) {
    throw Error("qmat: matrix dimensions exceed u32");
  }
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, static_cast<uint32_t>(q.rows()));
  put_u32(out, static_cast<uint32_t>(q.cols()));
  const char hdr_tail[4] = {static_cast<char>(q.bits()), 0, 0, 0};
  out.write(hdr_tail, 4);
  for (int32_t c : q.codes()) {
    const auto byte = static_cast<char>(static_cast<int8_t>(c));
    out.write(&byte, 1);
  }
  const auto bits = std::bit_cast<uint64_t>(q.scale());
  for (int i = 0; i < 8; ++i) {
    const auto byte = static_cast<char>((bits >> (8 * i)) & 0xFF);
    out.write(&byte, 1);
  }
  if (!out) throw Error("qmat: write failed");
}

QuantizedMatrix read_qmat(std::istream& in, const std::string& source) {
  std::array<unsigned char, kHeaderBytes> hdr{};
  in.read(reinterpret_cast<char*>(hdr.data()), hdr.size());
  const auto got = static_cast<std::size_t>(in.gcount());
  if (got < kHeaderBytes) {
    throw Error(fmt::format("{}: truncated QMAT header at byte offset {}", source, got));
  }
  if (std::memcmp(hdr.data(), kMagic.data(), kMagic.size()) != 0) {
    throw Error(fmt::format("{}: bad magic at byte offset 0 (expected \"QMAT\")", source));
  }
  const uint32_t rows = get_u32(hdr.data() + 4);
  const uint32_t cols = get_u32(hdr.data() + 8);
  const int bits = hdr[12];
  if (bits < 2 || bits > 8) {
    throw Error(fmt::format("{}: unsupported bit-width {} at byte offset 12", source, bits));
  }
  const std::size_t count = std::size_t{rows} * cols;
  std::vector<unsigned char> payload(count + 8);
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  const auto read = static_cast<std::size_t>(in.gcount());
  if (read < payload.size()) {
    throw Error(fmt::format("{}: truncated payload at byte offset {} (expected {} bytes)", source,
                            kHeaderBytes + read, kHeaderBytes + payload.size()));
  }
  const int32_t qmax = max_code(bits);
  std::vector<int32_t> codes(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int32_t c = static_cast<int8_t>(payload[i]);
    if (c < -qmax || c > qmax) {
      throw Error(fmt::format("{}: code {} at byte offset {} outside the {}-bit range", source, c,
                              kHeaderBytes + i, bits));
    }
    codes[i] = c;
  }
  uint64_t scale_bits = 0;
  for (int i = 0; i < 8; ++i) {
    scale_bits |= uint64_t{payload[count + i]} << (8 * i);
  }
  const double scale = std::bit_cast<double>(scale_bits);
  if (!(std::isfinite(scale) && scale > 0.0)) {
    throw Error(fmt::format("{}: invalid scale {} at byte offset {}", source, scale,
                            kHeaderBytes + count));
  }
  return QuantizedMatrix(rows, cols, std::move(codes), bits, scale);
}

void save_qmat(const std::string& path, const QuantizedMatrix& q) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("{}: cannot open for writing", path));
  write_qmat(out, q);
}

QuantizedMatrix load_qmat(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("{}: cannot open for reading", path));
  return read_qmat(in, path);
}

RealMatrix read_real_text(std::istream& in, const std::string& source) {
  RealMatrix m;
  std::string line;
  std::size_t line_no = 0;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t line_start = offset;
    offset += line.size() + 1;
    std::size_t pos = 0;
    std::size_t count = 0;
    while (pos < line.size()) {
      while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
      if (pos >= line.size()) break;
      std::size_t end = pos;
      while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
      const std::string token = line.substr(pos, end - pos);
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size() || !std::isfinite(v)) {
        throw Error(fmt::format("{}: line {}: bad real \"{}\" at byte offset {}", source, line_no,
                                token, line_start + pos));
      }
      m.values.push_back(v);
      ++count;
      pos = end;
    }
    if (count == 0) continue;
    if (m.rows == 0) {
      m.cols = count;
    } else if (count != m.cols) {
      throw Error(fmt::format("{}: line {}: {} values but previous rows have {} (byte offset {})",
                              source, line_no, count, m.cols, line_start));
    }
    ++m.rows;
  }
  return m;
}

RealMatrix load_real_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("{}: cannot open for reading", path));
  return read_real_text(in, path);
}

}  // namespace pdsim
