#include "matt/log.hpp"

#include <cstdlib>
#include <string_view>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

namespace matt {

void init_logging(std::string_view fallback_level) {
    auto logger = spdlog::stderr_logger_mt("matt");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    const char* env = std::getenv("MATT_LOG");
    const std::string_view level = env != nullptr && *env != '\0' ? std::string_view(env) : fallback_level;
    const auto parsed = spdlog::level::from_str(std::string(level));
    // from_str maps unknown names to off; keep warnings visible instead.
    spdlog::set_level(parsed == spdlog::level::off && level != "off" ? spdlog::level::warn : parsed);
}

}  // namespace matt
