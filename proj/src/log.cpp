#include "cbs/log.hpp"

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <string_view>

namespace cbs {

spdlog::logger& log() {
    static const std::shared_ptr<spdlog::logger> logger = [] {
        auto l = std::make_shared<spdlog::logger>("cabs", std::make_shared<spdlog::sinks::stderr_sink_mt>());
        l->set_pattern("[%l] %v");
        l->set_level(spdlog::level::warn);
        if (const char* env = std::getenv("CABS_LOG"); env != nullptr && *env != '\0') {
            const auto level = spdlog::level::from_str(env);
            // from_str maps unknown names to off
            if (level != spdlog::level::off || std::string_view(env) == "off") l->set_level(level);
        }
        return l;
    }();
    return *logger;
}

}  // namespace cbs
