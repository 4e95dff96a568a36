// simulate: command-line front end for the photonic-digital attention model.
//
//   simulate fidelity|histogram|cost|compare|sweep --config <path> --workload <path>
//            --seed <n> --out <dir> [--bits 2,4,8] [--tiles N] [--noise s]
//            [--serialize-transfers]
//   simulate validate <config>
//   simulate dump-lut [--out <file>]
//
// Log verbosity comes from PDSIM_LOG (trace, debug, info, warn, error, off).

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pdsim/digital_die.hpp"
#include "pdsim/harness.hpp"
#include "pdsim/logging.hpp"

namespace {

int report_error(std::string_view kind, const std::exception& e,
                 const std::vector<std::string>& diagnostics = {}) {
  nlohmann::json j{{"error", {{"kind", kind}, {"message", e.what()}}}};
  if (!diagnostics.empty()) j["error"]["diagnostics"] = diagnostics;
  std::cerr << j.dump() << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  pdsim::configure_logging();

  CLI::App app{"Photonic-digital hybrid attention simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", PDSIM_VERSION_STRING);

  pdsim::ExperimentSpec spec;
  std::string bits = "2,4,8";
  std::string sweep_seq = "128,256,512";
  std::string sweep_tiles = "8,16,32,64";
  int tiles = 0;
  double noise = -1.0;

  auto add_experiment = [&](pdsim::Mode mode, const std::string& help) {
    CLI::App* sub = app.add_subcommand(std::string(pdsim::to_string(mode)), help);
    sub->add_option("--config", spec.config_path, "Hardware config file (default: built-in)")
        ->check(CLI::ExistingFile);
    sub->add_option("--workload", spec.workload_path, "Workload file (default: built-in)")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", spec.seed, "Random seed")->capture_default_str();
    sub->add_option("--out", spec.out_dir, "Output directory")->required();
    sub->add_option("--name", spec.name, "Experiment name")->capture_default_str();
    sub->add_option("--bits", bits, "ADC bit-widths for the histogram")->capture_default_str();
    sub->add_option("--tiles", tiles, "Override the Tile count")->check(CLI::PositiveNumber);
    sub->add_option("--noise", noise, "Override the analog noise sigma")->check(CLI::NonNegativeNumber);
    sub->add_flag("--serialize-transfers", spec.serialize_transfers,
                  "Serialize flagged transfers with photonic compute");
    sub->add_flag("--dump-output", spec.dump_output, "Write the attention output matrix");
    sub->add_option("--sweep-seq", sweep_seq, "Sequence lengths for sweep")->capture_default_str();
    sub->add_option("--sweep-tiles", sweep_tiles, "Tile counts for sweep")->capture_default_str();
    sub->callback([&spec, mode] { spec.mode = mode; });
    return sub;
  };
  add_experiment(pdsim::Mode::Fidelity, "Compare simulated outputs with reference oracles");
  add_experiment(pdsim::Mode::Histogram, "Fraction of partial sums within each ADC range");
  add_experiment(pdsim::Mode::Cost, "Area, power, latency and energy of one attention run");
  add_experiment(pdsim::Mode::Compare, "Hybrid design against the single-ADC baseline");
  add_experiment(pdsim::Mode::Sweep, "Sequence-length and Tile-count sweeps");

  std::string validate_path;
  CLI::App* validate = app.add_subcommand("validate", "Check a hardware config and echo it resolved");
  validate->add_option("config", validate_path, "Hardware config file")->required();

  std::string lut_out;
  CLI::App* dump_lut = app.add_subcommand("dump-lut", "Softmax exponent tables, one hex byte per line");
  dump_lut->add_option("--out", lut_out, "Output file (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  auto parse_list = [](const std::string& text, auto& out) {
    out.clear();
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      out.push_back(static_cast<typename std::decay_t<decltype(out)>::value_type>(std::stoll(item)));
    }
  };

  try {
    if (validate->parsed()) {
      std::cout << pdsim::validate_config(validate_path);
      return 0;
    }
    if (dump_lut->parsed()) {
      const pdsim::SoftmaxLut lut;
      if (lut_out.empty()) {
        lut.dump_hex(std::cout);
      } else {
        std::ofstream out(lut_out);
        if (!out) throw pdsim::Error(lut_out + ": cannot open for writing");
        lut.dump_hex(out);
      }
      return 0;
    }
    try {
      parse_list(bits, spec.bits);
      parse_list(sweep_seq, spec.sweep_seq_lens);
      parse_list(sweep_tiles, spec.sweep_tiles);
    } catch (const std::exception&) {
      throw pdsim::Error("list options take comma-separated integers");
    }
    if (tiles > 0) spec.tiles = tiles;
    if (noise >= 0.0) spec.noise = noise;
    const pdsim::SimulationReport report = pdsim::run_experiment(spec);
    const auto& results = report.json["results"];
    if (spec.mode == pdsim::Mode::Compare) {
      std::cout << "speedup_per_area " << results["speedup_per_area"].get<double>()
                << " (published " << results["published_speedup_per_area"].get<double>() << ")\n"
                << "energy_eff_per_area " << results["energy_eff_per_area"].get<double>()
                << " (published " << results["published_energy_eff_per_area"].get<double>()
                << ")\n";
    }
    std::cout << spec.out_dir << "/report.json\n";
    if (spec.mode == pdsim::Mode::Fidelity && !results["pass"].get<bool>()) return 2;
    return 0;
  } catch (const pdsim::ConfigError& e) {
    return report_error("config", e, e.diagnostics());
  } catch (const pdsim::Error& e) {
    return report_error("simulation", e);
  } catch (const std::exception& e) {
    return report_error("internal", e);
  }
}
