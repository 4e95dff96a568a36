#pragma once

#include <cstdint>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "pdsim/cost_model.hpp"
#include "pdsim/dataflow.hpp"
#include "pdsim/hardware_config.hpp"
#include "pdsim/workload.hpp"

namespace pdsim {

enum class Mode { Fidelity, Histogram, Cost, Compare, Sweep };

std::string_view to_string(Mode m);
Mode parse_mode(std::string_view s);

struct ExperimentSpec {
  std::string name = "experiment";
  Mode mode = Mode::Cost;
  std::string config_path;    // empty: built-in defaults
  std::string workload_path;  // empty: built-in defaults
  uint64_t seed = 1;
  std::string out_dir;  // empty: nothing written
  std::vector<int> bits{2, 4, 8};
  std::optional<int> tiles;
  std::optional<double> noise;
  bool serialize_transfers = false;
  bool dump_output = false;
  std::vector<std::size_t> sweep_seq_lens{128, 256, 512};
  std::vector<int> sweep_tiles{8, 16, 32, 64};
};

struct SimulationReport {
  nlohmann::json json;  // keys sorted, no timestamps
};

/// Config file (or defaults) with the experiment's command-line overrides applied.
HardwareConfig resolve_config(const ExperimentSpec& spec);
WorkloadSpec resolve_workload(const ExperimentSpec& spec);

SimulationReport run_experiment(const ExperimentSpec& spec);

/// Schedule totals of one attention block run on `hw`.
struct AttentionShape {
  uint64_t array_ops = 0;
  uint64_t cycles = 0;
  uint64_t output_shards = 0;
};
AttentionShape attention_shape(std::size_t seq_len, std::size_t d_k, std::size_t blocks,
                               const HardwareConfig& hw);

struct SweepPoint {
  std::string axis;  // "seq_len" or "tiles"
  double value = 0.0;
  CostReport report;
  TrafficSummary traffic;
  uint64_t compute_cycles = 0;
  uint64_t output_shards = 0;
  uint64_t array_ops = 0;

  double cycles_per_shard() const {
    return output_shards > 0 ? static_cast<double>(compute_cycles) / output_shards : 0.0;
  }
};

/// Independent runs, one worker each; results come back in input order.
std::vector<SweepPoint> sweep_seq_len(const WorkloadSpec& base, const HardwareConfig& hw,
                                      const std::vector<std::size_t>& seq_lens, uint64_t seed);
std::vector<SweepPoint> sweep_tiles(const WorkloadSpec& base, const HardwareConfig& hw,
                                    const std::vector<int>& tiles, uint64_t seed);

nlohmann::json to_json(const CostReport& r);
nlohmann::json to_json(const GemmStats& s);
nlohmann::json to_json(const TrafficSummary& t);

/// One summary row per labelled report.
void write_cost_csv(std::ostream& out,
                    const std::vector<std::pair<std::string, const CostReport*>>& reports);
/// Long form: label, metric, component, value, fraction.
void write_breakdown_csv(std::ostream& out,
                         const std::vector<std::pair<std::string, const CostReport*>>& reports);

/// Fully-resolved echo of the config followed by its area/power totals.
/// Throws ConfigError with one line per violation.
std::string validate_config(const std::string& path);

}  // namespace pdsim
