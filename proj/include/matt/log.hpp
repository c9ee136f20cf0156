#pragma once

#include <string_view>

namespace matt {

/// Routes spdlog to stderr. Level from MATT_LOG (error|warn|info|debug),
/// else `fallback_level`.
void init_logging(std::string_view fallback_level = "info");

}  // namespace matt
