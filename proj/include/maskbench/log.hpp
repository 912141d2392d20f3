#pragma once

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <memory>
#include <string>

namespace maskbench::log {

// Shared stderr logger. Level comes from MASKBENCH_LOG
// (trace|debug|info|warn|error|off), default "warn".
inline spdlog::logger& get() {
  static const std::shared_ptr<spdlog::logger> logger = [] {
    auto l = spdlog::stderr_color_mt("maskbench");
    const char* env = std::getenv("MASKBENCH_LOG");
    l->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
    l->set_pattern("[%l] %v");
    return l;
  }();
  return *logger;
}

template <typename... Args>
void warn(fmt::format_string<Args...> f, Args&&... args) {
  get().warn(f, std::forward<Args>(args)...);
}

template <typename... Args>
void info(fmt::format_string<Args...> f, Args&&... args) {
  get().info(f, std::forward<Args>(args)...);
}

template <typename... Args>
void debug(fmt::format_string<Args...> f, Args&&... args) {
  get().debug(f, std::forward<Args>(args)...);
}

}  // namespace maskbench::log
