#pragma once

namespace pdsim {

/// Routes library logging to stderr. The level comes from PDSIM_LOG
/// (trace, debug, info, warn, error, off) and defaults to warn.
void configure_logging();

}  // namespace pdsim
