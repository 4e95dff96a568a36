#include "pdsim/logging.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <string_view>

namespace pdsim {

void configure_logging() {
  auto logger = spdlog::get("pdsim");
  if (!logger) logger = spdlog::stderr_color_mt("pdsim");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("PDSIM_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string_view(env) != "off") {
      spdlog::warn("PDSIM_LOG: unknown level \"{}\", keeping warn", env);
    } else {
      spdlog::set_level(level);
    }
  }
}

}  // namespace pdsim
