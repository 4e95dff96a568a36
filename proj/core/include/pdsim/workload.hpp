#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "pdsim/dataflow.hpp"

namespace pdsim {

enum class WorkloadSource { Synthetic, Files };
enum class Distribution { Gaussian, Uniform };

/// Workload file: `key = value` lines, `#` comments.
///   seq_len, d_k, heads, batch, bits, seed
///   source = synthetic | files
///   distribution = gaussian | uniform, sigma (gaussian), range (uniform half-width)
///   q_path, k_path, v_path (files; .qmat or whitespace text, relative to the file)
struct WorkloadSpec {
  std::size_t seq_len = 128;
  std::size_t d_k = 64;
  std::size_t heads = 1;
  std::size_t batch = 1;
  int bits = kDefaultBits;
  WorkloadSource source = WorkloadSource::Synthetic;
  Distribution distribution = Distribution::Gaussian;
  double sigma = 0.33;
  double range = 1.0;
  std::optional<uint64_t> seed;
  std::string q_path;
  std::string k_path;
  std::string v_path;
};

WorkloadSpec parse_workload_spec(std::istream& in, const std::string& source = "<stream>",
                                 const std::string& base_dir = ".");
WorkloadSpec load_workload_spec(const std::string& path);
std::string echo_workload_spec(const WorkloadSpec& spec);

/// Deterministic in `seed`. Synthetic operands are drawn Q, then K, then V
/// and quantized per tensor.
AttentionWorkload gen_workload(const WorkloadSpec& spec, uint64_t seed);

/// Writes q.qmat, k.qmat, v.qmat and workload.cfg into `dir`.
void save_workload(const AttentionWorkload& w, const std::string& dir);
AttentionWorkload load_workload(const std::string& spec_path);

}  // namespace pdsim
