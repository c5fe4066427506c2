#pragma once

#include <spdlog/logger.h>

namespace cbs {

/// Shared stderr logger. Its level comes from the CABS_LOG environment
/// variable (trace, debug, info, warn, error, off); the default is warn.
spdlog::logger& log();

}  // namespace cbs
